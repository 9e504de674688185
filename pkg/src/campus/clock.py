"""Time sources. Simulation code never touches the wall clock directly."""

import time


class VirtualClock:
    """Settable integer-seconds clock for deterministic runs."""

    def __init__(self, start: int = 0):
        self._now = int(start)

    def now(self) -> int:
        return self._now

    def advance(self, dt: int) -> int:
        if dt < 0:
            raise ValueError("cannot advance by a negative delta")
        self._now += int(dt)
        return self._now

    def set_to(self, ts: int) -> int:
        if ts < self._now:
            raise ValueError(f"cannot move clock backwards from {self._now} to {ts}")
        self._now = int(ts)
        return self._now


class WallClock:
    """Integer-seconds wall clock, used only by live `campus serve`."""

    def now(self) -> int:
        return int(time.time())
