/**
 * Session state: the chip panel model, suggestion debouncing, and
 * stale-response tracking. Pure logic, no DOM.
 */

import type { ChipState, Condition, SuggestionView, TagView } from "./api.js";

export const CHIP_CAP = 15;
export const DEBOUNCE_MS = 1000;

export interface Chip {
  key: string;
  label: string;
  abstract: string | null;
  state: ChipState;
}

/** The optimistic guess for one click; the server response is authoritative. */
export function nextChipState(state: ChipState): ChipState {
  switch (state) {
    case "neutral":
      return "accepted";
    case "accepted":
      return "rejected";
    case "rejected":
      return "neutral";
  }
}

/**
 * Chips shown under the draft annotation. Never exceeds CHIP_CAP entries;
 * merge keeps existing chips (and their states) and appends new neutral
 * ones while room remains.
 */
export class ChipPanel {
  private chips = new Map<string, Chip>();

  merge(suggestions: Array<SuggestionView | TagView>): Chip[] {
    const added: Chip[] = [];
    for (const s of suggestions) {
      if (this.chips.has(s.key)) {
        continue;
      }
      if (this.chips.size >= CHIP_CAP) {
        break;
      }
      const chip: Chip = { key: s.key, label: s.label, abstract: s.abstract, state: s.state };
      this.chips.set(chip.key, chip);
      added.push(chip);
    }
    return added;
  }

  get(key: string): Chip | undefined {
    return this.chips.get(key);
  }

  all(): Chip[] {
    return [...this.chips.values()];
  }

  get size(): number {
    return this.chips.size;
  }

  setState(key: string, state: ChipState): void {
    const chip = this.chips.get(key);
    if (chip) {
      chip.state = state;
    }
  }

  clear(): void {
    this.chips.clear();
  }

  /** Keys by state, for comparing against a reloaded annotation. */
  keysIn(state: ChipState): string[] {
    return this.all()
      .filter((c) => c.state === state)
      .map((c) => c.key)
      .sort();
  }
}

/**
 * Trailing-edge debouncer: `poke` restarts the idle window and the action
 * fires once per quiet period.
 */
export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly action: () => void,
    private readonly delayMs: number = DEBOUNCE_MS,
  ) {}

  poke(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.action();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}

/**
 * Sequence numbers for in-flight suggestion requests: a response only
 * applies if no newer request was issued meanwhile.
 */
export class LatestOnly {
  private seq = 0;

  issue(): number {
    return ++this.seq;
  }

  isCurrent(token: number): boolean {
    return token === this.seq;
  }
}

/** Which suggestion sources a condition mode uses. */
export function suggestionSources(condition: Condition): Array<"text" | "region" | "history"> {
  switch (condition) {
    case "LT":
      return [];
    case "ST":
      return ["history"];
    case "SMT":
    case "SMT_CTX":
      return ["text", "region"];
  }
}

export function showsAbstracts(condition: Condition): boolean {
  return condition === "SMT_CTX";
}
