"""System-wide event fan-out.

Agents and the router publish typed events (chat mirrors of envelopes,
telemetry, notifications, reports, status changes); the gateway broadcaster,
log writers, and process trackers subscribe.  Publishing is synchronous on
the caller's thread; subscribers must be fast and non-blocking.
"""

from __future__ import annotations

import threading
from typing import Any, Callable

__all__ = ["EventSink", "FRAME_KINDS"]

FRAME_KINDS = ("notification", "chat", "location", "sensor", "report", "status")

Subscriber = Callable[[str, dict[str, Any]], None]


class EventSink:
    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[Subscriber] = []

    def subscribe(self, fn: Subscriber) -> Callable[[], None]:
        """Register a subscriber; returns an unsubscribe callable."""
        with self._lock:
            self._subscribers.append(fn)

        def cancel() -> None:
            with self._lock:
                if fn in self._subscribers:
                    self._subscribers.remove(fn)

        return cancel

    def publish(self, kind: str, payload: dict[str, Any]) -> None:
        if kind not in FRAME_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            subscribers = list(self._subscribers)
        for fn in subscribers:
            fn(kind, payload)
