/**
 * Chip rendering and interaction.
 *
 * Chips show labels only; no URI ever reaches the DOM. A single shared
 * tooltip element shows the concept abstract on hover when the session
 * condition exposes context. Clicking walks the tri-state cycle through
 * the server: the chip updates optimistically, reconciles to the server's
 * answer (label-only chips skip "rejected" server-side), and reverts with
 * a toast if the call fails.
 */

import type { ApiClient, ChipState } from "./api.js";
import { Chip, ChipPanel, nextChipState } from "./state.js";

export interface ChipAreaOptions {
  showAbstracts: () => boolean;
  annotationId: () => string | null;
  onError?: (message: string) => void;
}

export class ChipArea {
  readonly element: HTMLElement;
  private readonly tooltip: HTMLElement;
  private readonly rendered = new Map<string, HTMLElement>();

  constructor(
    private readonly panel: ChipPanel,
    private readonly api: ApiClient,
    private readonly options: ChipAreaOptions,
    doc: Document = document,
  ) {
    this.element = doc.createElement("div");
    this.element.className = "chip-area";
    this.tooltip = doc.createElement("div");
    this.tooltip.className = "chip-tooltip";
    this.tooltip.hidden = true;
    this.element.append(this.tooltip);
  }

  render(): void {
    for (const el of this.rendered.values()) {
      el.remove();
    }
    this.rendered.clear();
    for (const chip of this.panel.all()) {
      const el = this.chipElement(chip);
      this.rendered.set(chip.key, el);
      this.element.append(el);
    }
  }

  private chipElement(chip: Chip): HTMLElement {
    const el = this.element.ownerDocument.createElement("button");
    el.type = "button";
    el.className = `chip chip--${chip.state}`;
    el.dataset.key = chip.key;
    el.dataset.state = chip.state;
    el.textContent = chip.label;
    el.addEventListener("click", () => void this.handleClick(chip.key));
    el.addEventListener("mouseenter", () => this.showTooltip(chip.key, el));
    el.addEventListener("mouseleave", () => this.hideTooltip());
    return el;
  }

  private applyState(key: string, state: ChipState): void {
    this.panel.setState(key, state);
    const el = this.rendered.get(key);
    if (el) {
      el.dataset.state = state;
      el.className = `chip chip--${state}`;
    }
  }

  async handleClick(key: string): Promise<void> {
    const annotationId = this.options.annotationId();
    const chip = this.panel.get(key);
    if (!chip || annotationId === null) {
      return;
    }
    const previous = chip.state;
    this.applyState(key, nextChipState(previous));
    try {
      const result = await this.api.cycleTag(annotationId, key);
      this.applyState(key, result.state);
    } catch (err) {
      this.applyState(key, previous);
      this.options.onError?.(`Could not update tag "${chip.label}"`);
    }
  }

  private showTooltip(key: string, anchor: HTMLElement): void {
    if (!this.options.showAbstracts()) {
      return;
    }
    const chip = this.panel.get(key);
    if (!chip?.abstract) {
      return;
    }
    this.tooltip.textContent = chip.abstract;
    this.tooltip.hidden = false;
    anchor.setAttribute("aria-describedby", "chip-tooltip");
  }

  private hideTooltip(): void {
    this.tooltip.hidden = true;
    this.tooltip.textContent = "";
  }
}
