"""Deterministic event-driven clock and the cache<->memory bus.

Events are (fire_cycle, seq) ordered: among events scheduled for the same
cycle, insertion order wins, which makes every run of the same input
bit-reproducible. Scheduling into the past is a simulator bug, not a user
error, and trips an assertion.
"""

import heapq
from typing import Callable


class SimulatorBug(AssertionError):
    """Internal protocol violation (never a consequence of user input)."""


class TimingWheel:
    def __init__(self):
        self.now = 0
        self._seq = 0
        self._queue: list = []

    def schedule(self, cycle: int, action: Callable[[int], None], label: str = ""):
        if cycle < self.now:
            raise SimulatorBug(
                f"event {label!r} scheduled at {cycle}, before current cycle {self.now}")
        heapq.heappush(self._queue, (cycle, self._seq, action, label))
        self._seq += 1

    def advance(self) -> bool:
        """Execute the next event, moving the clock to it. False once empty."""
        if not self._queue:
            return False
        cycle, _, action, _ = heapq.heappop(self._queue)
        self.now = cycle
        action(cycle)
        return True

    def peek_cycle(self) -> int | None:
        return self._queue[0][0] if self._queue else None

    def run_until(self, cycle: int):
        """Execute everything due at or before `cycle`, then park the clock there.

        Events executing may schedule further events inside the window; those
        run too, in (cycle, seq) order.
        """
        while self._queue and self._queue[0][0] <= cycle:
            self.advance()
        if cycle > self.now:
            self.now = cycle

    def run_until_idle(self):
        while self.advance():
            pass

    def run_while(self, waiting: Callable[[], bool], what: str = "completion"):
        """Advance events until `waiting()` turns false; an empty queue while
        still waiting means a lost wakeup somewhere."""
        while waiting():
            if not self.advance():
                raise SimulatorBug(f"deadlock waiting for {what} at cycle {self.now}")


TO_MEMORY = 0
FROM_MEMORY = 1


class Bus:
    """Bi-directional sector bus; each direction moves one sector per slot."""

    def __init__(self, transfer_cycles: int = 1):
        self.transfer_cycles = transfer_cycles
        self._busy_until = [0, 0]

    def acquire(self, direction: int, earliest: int) -> int:
        """Reserve the next free slot at or after `earliest`; returns its start."""
        grant = max(earliest, self._busy_until[direction])
        self._busy_until[direction] = grant + self.transfer_cycles
        return grant
