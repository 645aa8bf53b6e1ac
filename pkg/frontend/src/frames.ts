// Per-connection frame ordering. The gateway stamps strictly increasing
// sequence numbers; frames can still arrive shuffled through the socket
// layer, so we release them in order and treat a persistent hole as a lost
// frame: flush what we have and ask the app to resync from snapshots.

import type { PushFrame } from "./types";

export class FrameSequencer {
  private expected = 0;
  private pending = new Map<number, PushFrame>();

  constructor(
    private deliver: (frame: PushFrame) => void,
    private onGap: () => void = () => {},
    private maxPending = 64,
  ) {}

  /** New connection: sequence numbers start over. */
  reset(): void {
    this.expected = 0;
    this.pending.clear();
  }

  push(frame: PushFrame): void {
    if (frame.seq < this.expected || this.pending.has(frame.seq)) {
      return; // duplicate
    }
    this.pending.set(frame.seq, frame);
    this.drain();
    if (this.pending.size > this.maxPending) {
      // Give up on the missing frame(s): deliver the rest in order, then resync.
      const seqs = [...this.pending.keys()].sort((a, b) => a - b);
      for (const seq of seqs) {
        this.deliver(this.pending.get(seq)!);
      }
      this.expected = seqs[seqs.length - 1] + 1;
      this.pending.clear();
      this.onGap();
    }
  }

  private drain(): void {
    while (this.pending.has(this.expected)) {
      const frame = this.pending.get(this.expected)!;
      this.pending.delete(this.expected);
      this.expected += 1;
      this.deliver(frame);
    }
  }

  get pendingCount(): number {
    return this.pending.size;
  }
}
