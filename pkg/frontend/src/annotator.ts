/**
 * The annotation session: draft lifecycle and live suggestions.
 *
 * A session begins when the drawn shape is committed (the server assigns
 * the annotation). While the user types, a trailing 1 s debounce fires at
 * most one suggestion round per idle window; responses that arrive after
 * a newer round started are discarded. LT sessions never call the
 * suggestion endpoints; they use manual comma-separated label entry.
 */

import { ApiClient, ApiError, Condition, SuggestResponse } from "./api.js";
import { ChipPanel, Debouncer, LatestOnly, suggestionSources } from "./state.js";

export interface SessionOptions {
  creatorId: string;
  creatorName?: string;
  seed?: number;
  debounceMs?: number;
  onChipsChanged: () => void;
  onError?: (message: string) => void;
}

export class AnnotationSession {
  readonly panel = new ChipPanel();
  condition: Condition = "SMT_CTX";
  annotationId: string | null = null;
  private mapId: string | null = null;
  private text = "";
  private readonly rounds = new LatestOnly();
  private readonly debouncer: Debouncer;

  constructor(
    private readonly api: ApiClient,
    private readonly options: SessionOptions,
  ) {
    this.debouncer = new Debouncer(() => void this.requestSuggestions(), options.debounceMs);
  }

  setCondition(condition: Condition): void {
    this.condition = condition;
  }

  /** Create the server-side draft once the shape is final. */
  async begin(mapId: string, shape: Array<[number, number]>): Promise<string> {
    const doc = await this.api.createAnnotation(mapId, {
      shape,
      body_text: "",
      creator: { id: this.options.creatorId, display_name: this.options.creatorName ?? "" },
      condition: this.condition,
    });
    this.mapId = mapId;
    this.annotationId = doc.id;
    this.panel.clear();
    this.options.onChipsChanged();
    return doc.id;
  }

  /** Called on every keystroke of the comment box. */
  onTextInput(text: string): void {
    this.text = text;
    if (this.annotationId === null || suggestionSources(this.condition).length === 0) {
      return;
    }
    this.debouncer.poke();
  }

  private async requestSuggestions(): Promise<void> {
    const annotationId = this.annotationId;
    if (annotationId === null) {
      return;
    }
    const token = this.rounds.issue();
    const sources = suggestionSources(this.condition);
    const results: SuggestResponse[] = [];
    for (const source of sources) {
      try {
        if (source === "text") {
          if (this.text.trim()) {
            results.push(await this.api.suggestText(annotationId, this.text));
          }
        } else if (source === "region") {
          results.push(await this.api.suggestRegion(annotationId));
        } else {
          results.push(await this.api.suggestHistory(annotationId, this.options.seed ?? 0));
        }
      } catch (err) {
        // 409 = source not available for this map/condition; anything else
        // degrades silently to "no suggestions this round".
        if (!(err instanceof ApiError)) {
          this.options.onError?.("Suggestion request failed");
        }
      }
    }
    if (!this.rounds.isCurrent(token)) {
      return; // a newer round superseded this one
    }
    let changed = false;
    for (const response of results) {
      if (this.panel.merge(response.suggestions).length > 0) {
        changed = true;
      }
    }
    if (changed) {
      this.options.onChipsChanged();
    }
  }

  /** Manual label entry, LT condition only. */
  async addLabels(raw: string): Promise<void> {
    if (this.annotationId === null) {
      return;
    }
    const response = await this.api.addLabels(this.annotationId, raw);
    this.panel.merge(response.tags);
    this.options.onChipsChanged();
  }

  /** Persist the final comment text. */
  async save(): Promise<void> {
    if (this.annotationId === null) {
      return;
    }
    this.debouncer.cancel();
    await this.api.setBody(this.annotationId, this.text);
  }

  /** Load a saved annotation and continue the session on it. */
  async resume(annotationId: string): Promise<{ text: string }> {
    const doc = await this.api.getAnnotation(annotationId);
    const { tags } = await this.api.getTags(annotationId);
    this.annotationId = annotationId;
    this.condition = doc.condition;
    const textBody = doc.body.find((b) => b.type === "text");
    this.text = textBody && "value" in textBody ? textBody.value : "";
    this.panel.clear();
    this.panel.merge(tags);
    this.options.onChipsChanged();
    return { text: this.text };
  }

  reset(): void {
    this.debouncer.cancel();
    this.annotationId = null;
    this.mapId = null;
    this.text = "";
    this.panel.clear();
    this.options.onChipsChanged();
  }
}
