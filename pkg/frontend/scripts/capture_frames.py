"""Regenerate tests/fixtures/replenish_frames.json.

Runs the backend's default scenario on the virtual clock (seeded, fully
deterministic), places one replenishment order, and records every push
frame exactly as a websocket subscriber would receive it.

Usage: python3 scripts/capture_frames.py   (from frontend/, backend installed)
"""

import json
from pathlib import Path

from supplynet.client import OrderRequest, ProcessTracker, SystemClient
from supplynet.clock import VirtualClock
from supplynet.events import EventSink, FRAME_KINDS
from supplynet.gateway import FrameBroadcaster
from supplynet.scenario import build_system, load_scenario


def main() -> None:
    sink = EventSink()
    handles = build_system(load_scenario(), clock=VirtualClock(), sink=sink)
    broadcaster = FrameBroadcaster(sink, buffer_size=100_000)
    subscriber = broadcaster.subscribe(set(FRAME_KINDS))
    tracker = ProcessTracker(handles.system)
    client = SystemClient(handles.system)
    handles.system.step_until_idle()

    holder = {}
    client.place_order(
        OrderRequest("replenish", "beef", 100, 10.0), "wholesaler", "retailer-1",
        lambda process, error: holder.update(process=process, error=error),
    )
    handles.system.step_until_idle()
    process = holder["process"]
    handles.system.run_virtual(
        until=lambda: tracker.outcome(process) is not None, max_ms=7_200_000
    )

    frames = []
    while True:
        frame = subscriber.get(timeout=0.01)
        if frame is None:
            break
        frames.append(frame)

    out = Path(__file__).resolve().parent.parent / "tests/fixtures/replenish_frames.json"
    out.write_text(json.dumps(
        {"process": process, "outcome": tracker.outcome(process), "frames": frames},
        indent=1,
    ))
    kinds: dict[str, int] = {}
    for frame in frames:
        kinds[frame["kind"]] = kinds.get(frame["kind"], 0) + 1
    print(f"captured {len(frames)} frames {kinds} -> {out}")


if __name__ == "__main__":
    main()
