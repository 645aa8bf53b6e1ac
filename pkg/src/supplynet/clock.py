"""Clocks for the agent runtime: real, scaled real time, and virtual.

All timestamps are integer milliseconds.  The virtual clock starts at zero
and only moves when told to, which is what makes headless runs replayable
byte for byte.  The scaled clock makes demo runs finish a recorded journey
faster than real time.
"""

from __future__ import annotations

import time

__all__ = ["Clock", "RealClock", "ScaledClock", "VirtualClock", "WrongClockMode"]


class WrongClockMode(RuntimeError):
    pass


class Clock:
    """Interface: subclasses provide ``now_ms`` and wall-wait conversion."""

    virtual = False

    def now_ms(self) -> int:
        raise NotImplementedError

    def wall_seconds_until(self, due_ms: int) -> float:
        """Wall-clock seconds to sleep until virtual time reaches due_ms."""
        raise NotImplementedError


class RealClock(Clock):
    def now_ms(self) -> int:
        return int(time.time() * 1000)

    def wall_seconds_until(self, due_ms: int) -> float:
        return max(0.0, (due_ms - self.now_ms()) / 1000.0)


class ScaledClock(Clock):
    """Time flows ``factor`` times faster than the wall, from origin 0."""

    def __init__(self, factor: float):
        if factor <= 0:
            raise ValueError("speed factor must be positive")
        self.factor = factor
        self._start_wall = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._start_wall) * 1000 * self.factor)

    def wall_seconds_until(self, due_ms: int) -> float:
        return max(0.0, (due_ms - self.now_ms()) / 1000.0 / self.factor)


class VirtualClock(Clock):
    """Manual clock: time advances only via :meth:`advance_to`."""

    virtual = True

    def __init__(self, start_ms: int = 0):
        self._now = int(start_ms)

    def now_ms(self) -> int:
        return self._now

    def advance_to(self, ms: int) -> None:
        if ms < self._now:
            raise ValueError(f"virtual time cannot go backwards ({ms} < {self._now})")
        self._now = int(ms)

    def wall_seconds_until(self, due_ms: int) -> float:
        return 0.0
