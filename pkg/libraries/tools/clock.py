"""
Session clocks.

Simulated latency advances a clock instead of blocking a thread. The virtual
clock keeps runs fast and replayable; the wall clock really sleeps, for demos.
"""

import time
from typing import Optional


class VirtualClock:
    """Millisecond clock that moves only when advanced."""

    def __init__(self, start: int = 0):
        self._start = start
        self._now = start

    def now(self) -> int:
        return self._now

    def elapsed(self) -> int:
        return self._now - self._start

    def advance(self, ms: int) -> int:
        if ms < 0:
            raise ValueError(f"Cannot advance by a negative amount: {ms}")
        self._now += ms
        return self._now

    def advance_to(self, timestamp: int) -> int:
        """Move forward to ``timestamp``; earlier timestamps are a no-op."""
        if timestamp > self._now:
            self._now = timestamp
        return self._now

    def fork(self) -> "VirtualClock":
        """Independent clock starting at the current time (one per lane)."""
        clock = VirtualClock(self._now)
        clock._start = self._start
        return clock

    def reset(self, start: int = 0) -> None:
        self._start = start
        self._now = start


class WallClock:
    """Clock backed by ``time.monotonic`` whose advance really sleeps."""

    def __init__(self, origin: Optional[float] = None):
        self._origin = time.monotonic() if origin is None else origin

    def now(self) -> int:
        return int((time.monotonic() - self._origin) * 1000)

    def elapsed(self) -> int:
        return self.now()

    def advance(self, ms: int) -> int:
        if ms < 0:
            raise ValueError(f"Cannot advance by a negative amount: {ms}")
        time.sleep(ms / 1000.0)
        return self.now()

    def advance_to(self, timestamp: int) -> int:
        remaining = timestamp - self.now()
        if remaining > 0:
            time.sleep(remaining / 1000.0)
        return self.now()

    def fork(self) -> "WallClock":
        return WallClock(self._origin)

    def reset(self, start: int = 0) -> None:
        self._origin = time.monotonic() - start / 1000.0


def make_clock(kind: str = "virtual"):
    if kind == "virtual":
        return VirtualClock()
    if kind == "wall":
        return WallClock()
    raise ValueError(f"Unknown clock kind: {kind}")
