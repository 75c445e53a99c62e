/** Force input: deflection mapping, release behaviour, sampling rate. */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ForceInput, mapDeflection } from "../src/forceInput.js";

describe("mapDeflection", () => {
  it("linear curve endpoints and midpoint", () => {
    expect(mapDeflection(0, 10, 1)).toBe(0);
    expect(mapDeflection(1, 10, 1)).toBe(10);
    expect(mapDeflection(0.5, 10, 1)).toBeCloseTo(5, 9);
  });

  it("clamps deflection", () => {
    expect(mapDeflection(-0.2, 10, 1)).toBe(0);
    expect(mapDeflection(1.4, 10, 1)).toBe(10);
  });

  it("gamma curve bends the midpoint", () => {
    expect(mapDeflection(0.5, 10, 2)).toBeCloseTo(2.5, 9);
    expect(mapDeflection(1, 10, 2)).toBe(10);
  });
});

function pointerEvent(type: string, clientY: number): Event {
  // jsdom lacks PointerEvent; a MouseEvent with the same fields suffices
  const ev = new MouseEvent(type, { clientY, bubbles: true });
  Object.defineProperty(ev, "pointerId", { value: 1 });
  return ev;
}

describe("ForceInput", () => {
  let root: HTMLElement;
  let sent: number[];
  let input: ForceInput;

  beforeEach(() => {
    vi.useFakeTimers();
    document.body.innerHTML = `<div id="f"></div>`;
    root = document.getElementById("f")!;
    // jsdom has no layout: pin the control's rect
    root.getBoundingClientRect = () =>
      ({ top: 0, left: 0, bottom: 300, right: 60, height: 300, width: 60,
         x: 0, y: 0, toJSON: () => ({}) }) as DOMRect;
    sent = [];
    input = new ForceInput(root, { onForce: (n) => sent.push(n) });
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("released control reads 0 N", () => {
    expect(input.newtons).toBe(0);
  });

  it("full deflection reads 10 N, mid reads ~5 N", () => {
    root.dispatchEvent(pointerEvent("pointerdown", 300)); // bottom: 0 N
    expect(input.newtons).toBeCloseTo(0, 6);
    root.dispatchEvent(pointerEvent("pointermove", 0)); // top: full
    expect(input.newtons).toBeCloseTo(10, 6);
    root.dispatchEvent(pointerEvent("pointermove", 150)); // middle
    expect(input.newtons).toBeCloseTo(5, 6);
  });

  it("samples at >= 30 Hz while engaged", () => {
    root.dispatchEvent(pointerEvent("pointerdown", 150));
    vi.advanceTimersByTime(1000);
    expect(sent.length).toBeGreaterThanOrEqual(30);
    expect(sent.every((n) => Math.abs(n - 5) < 1e-6)).toBe(true);
  });

  it("release sends a final 0 N and stops the stream", () => {
    root.dispatchEvent(pointerEvent("pointerdown", 0));
    vi.advanceTimersByTime(100);
    const before = sent.length;
    root.dispatchEvent(pointerEvent("pointerup", 0));
    expect(sent[sent.length - 1]).toBe(0);
    vi.advanceTimersByTime(500);
    expect(sent.length).toBe(before + 1); // nothing after the release zero
  });

  it("rejects sub-30 Hz configuration", () => {
    expect(
      () => new ForceInput(root, { sendHz: 10, onForce: () => void 0 }),
    ).toThrow();
  });
});
