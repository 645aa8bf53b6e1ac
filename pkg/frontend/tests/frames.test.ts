import { describe, expect, it, vi } from "vitest";

import { FrameSequencer } from "../src/frames";
import type { PushFrame } from "../src/types";

const frame = (seq: number): PushFrame => ({ kind: "status", payload: { seq }, seq });

describe("FrameSequencer", () => {
  it("delivers in-order frames straight through", () => {
    const seen: number[] = [];
    const sequencer = new FrameSequencer((f) => seen.push(f.seq));
    for (let i = 0; i < 5; i++) sequencer.push(frame(i));
    expect(seen).toEqual([0, 1, 2, 3, 4]);
  });

  it("reorders shuffled frames by sequence number", () => {
    const seen: number[] = [];
    const sequencer = new FrameSequencer((f) => seen.push(f.seq));
    for (const seq of [2, 0, 1, 4, 3]) sequencer.push(frame(seq));
    expect(seen).toEqual([0, 1, 2, 3, 4]);
  });

  it("drops duplicates", () => {
    const seen: number[] = [];
    const sequencer = new FrameSequencer((f) => seen.push(f.seq));
    for (const seq of [0, 1, 1, 0, 2]) sequencer.push(frame(seq));
    expect(seen).toEqual([0, 1, 2]);
  });

  it("flushes and requests a resync when a gap persists", () => {
    const seen: number[] = [];
    const onGap = vi.fn();
    const sequencer = new FrameSequencer((f) => seen.push(f.seq), onGap, 4);
    sequencer.push(frame(0));
    // frame 1 never arrives; 2..6 pile up past the pending limit
    for (const seq of [2, 3, 4, 5, 6]) sequencer.push(frame(seq));
    expect(onGap).toHaveBeenCalledOnce();
    expect(seen).toEqual([0, 2, 3, 4, 5, 6]); // held frames released in order
    sequencer.push(frame(7)); // stream continues after the hole
    expect(seen.at(-1)).toBe(7);
  });

  it("reset starts a fresh connection sequence", () => {
    const seen: number[] = [];
    const sequencer = new FrameSequencer((f) => seen.push(f.seq));
    sequencer.push(frame(0));
    sequencer.push(frame(1));
    sequencer.reset();
    sequencer.push(frame(0));
    expect(seen).toEqual([0, 1, 0]);
  });
});
