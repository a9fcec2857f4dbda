/**
 * Browse and search panel. Hits render as kind + id + where they matched;
 * identifiers are opaque ids, never URIs.
 */

import type { ApiClient, SearchHit } from "./api.js";

export class SearchPanel {
  readonly element: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly results: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly onOpen: (hit: SearchHit) => void,
    doc: Document = document,
  ) {
    this.element = doc.createElement("div");
    this.element.className = "search-panel";
    this.input = doc.createElement("input");
    this.input.type = "search";
    this.input.placeholder = "Search maps, comments, tags";
    const button = doc.createElement("button");
    button.type = "button";
    button.textContent = "Search";
    this.results = doc.createElement("ul");
    this.results.className = "search-results";
    this.element.append(this.input, button, this.results);

    button.addEventListener("click", () => void this.run());
    this.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        void this.run();
      }
    });
  }

  async run(): Promise<void> {
    const { hits } = await this.api.search(this.input.value);
    this.render(hits);
  }

  render(hits: SearchHit[]): void {
    this.results.replaceChildren();
    if (hits.length === 0) {
      const empty = this.element.ownerDocument.createElement("li");
      empty.textContent = "No matches";
      this.results.append(empty);
      return;
    }
    for (const hit of hits) {
      const item = this.element.ownerDocument.createElement("li");
      const link = this.element.ownerDocument.createElement("button");
      link.type = "button";
      link.className = "search-hit";
      link.textContent = `${hit.kind} ${hit.id} (${hit.matched_in})`;
      link.addEventListener("click", () => this.onOpen(hit));
      item.append(link);
      this.results.append(item);
    }
  }
}
