/** Chip tri-state interaction against the (fake) server. */

import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession } from "../src/annotator.js";
import { ChipArea } from "../src/chips.js";
import { FakeService, GIBRALTAR_TEXT } from "./fakeservice.js";

const MED_KEY = "http://en.wikipedia.org/wiki/Mediterranean_sea";

async function setup(condition: "SMT" | "SMT_CTX" | "ST" = "SMT_CTX") {
  vi.useFakeTimers();
  const service = new FakeService();
  const api = new ApiClient("http://fake.test", service.fetch);
  const errors: string[] = [];
  let area: ChipArea;
  const session = new AnnotationSession(api, {
    creatorId: "web-user",
    onChipsChanged: () => area.render(),
    onError: (m) => errors.push(m),
  });
  session.setCondition(condition);
  area = new ChipArea(session.panel, api, {
    showAbstracts: () => session.condition === "SMT_CTX",
    annotationId: () => session.annotationId,
    onError: (m) => errors.push(m),
  });
  document.body.replaceChildren(area.element);
  const annId = await session.begin("m1", [[0, 0], [10, 0], [10, 10]]);
  session.onTextInput(GIBRALTAR_TEXT);
  await vi.advanceTimersByTimeAsync(1000);
  vi.useRealTimers();
  return { service, api, session, area, errors, annId };
}

function chipEl(key: string): HTMLElement {
  for (const el of document.querySelectorAll<HTMLElement>(".chip")) {
    if (el.dataset.key === key) {
      return el;
    }
  }
  throw new Error(`chip ${key} not rendered`);
}

describe("chip clicking", () => {
  beforeEach(() => {
    document.body.replaceChildren();
  });

  it("one click accepts and turns the chip green", async () => {
    const { area, service, annId } = await setup();
    await area.handleClick(MED_KEY);
    const el = chipEl(MED_KEY);
    expect(el.dataset.state).toBe("accepted");
    expect(el.classList.contains("chip--accepted")).toBe(true);
    expect(service.annotations.get(annId)?.tags.get(MED_KEY)?.state).toBe("accepted");
  });

  it("three clicks return the chip to neutral and the server agrees", async () => {
    const { area, service, annId } = await setup();
    const seen: string[] = [];
    for (let i = 0; i < 3; i++) {
      await area.handleClick(MED_KEY);
      seen.push(chipEl(MED_KEY).dataset.state ?? "");
      expect(service.annotations.get(annId)?.tags.get(MED_KEY)?.state).toBe(chipEl(MED_KEY).dataset.state);
    }
    expect(seen).toEqual(["accepted", "rejected", "neutral"]);
  });

  it("rejected chips get the struck-through style class", async () => {
    const { area } = await setup();
    await area.handleClick(MED_KEY);
    await area.handleClick(MED_KEY);
    expect(chipEl(MED_KEY).classList.contains("chip--rejected")).toBe(true);
  });

  it("reconciles to the server state for label-only chips", async () => {
    // Label chips toggle accepted <-> neutral server-side; the optimistic
    // 3-cycle guess of "rejected" must be corrected by the response.
    vi.useFakeTimers();
    const service = new FakeService();
    const api = new ApiClient("http://fake.test", service.fetch);
    let area!: ChipArea;
    const session = new AnnotationSession(api, {
      creatorId: "web-user",
      onChipsChanged: () => area.render(),
    });
    session.setCondition("ST");
    area = new ChipArea(session.panel, api, {
      showAbstracts: () => false,
      annotationId: () => session.annotationId,
    });
    document.body.replaceChildren(area.element);
    await session.begin("m1", [[0, 0], [10, 0], [10, 10]]);
    session.onTextInput("x");
    await vi.advanceTimersByTimeAsync(1000);
    vi.useRealTimers();

    const key = "harbor crossing";
    await area.handleClick(key); // neutral -> accepted
    expect(chipEl(key).dataset.state).toBe("accepted");
    await area.handleClick(key); // server says neutral, not rejected
    expect(chipEl(key).dataset.state).toBe("neutral");
  });

  it("reverts the chip and reports an error when the server fails", async () => {
    const { area, service, errors } = await setup();
    service.failCycles = true;
    await area.handleClick(MED_KEY);
    expect(chipEl(MED_KEY).dataset.state).toBe("neutral");
    expect(errors.length).toBe(1);
    expect(errors[0]).toContain("Mediterranean Sea");
  });
});
