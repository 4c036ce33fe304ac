"""Discrete-event scheduling core.

The simulation clock advances event to event through a time-ordered queue.
Simultaneous events are dispatched in scheduling order (FIFO by a sequence
number stamped at schedule time), which keeps replications deterministic.
Time is measured in simulated minutes since scenario start.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

SimTime = float


class SimulationBugError(RuntimeError):
    """A model-logic contract was violated; the replication is not trustworthy."""


class SchedulingInPastError(SimulationBugError):
    """An event was scheduled at a time earlier than the current clock."""


class IllegalTransitionError(SimulationBugError):
    """An agent received a trigger that is not legal in its current state."""


class EventKind(IntEnum):
    ARRIVAL = 0
    DELAY_ELAPSED = 1
    PATIENCE_EXPIRED = 2
    SERVICE_COMPLETE = 3
    SHOP_CLOSE = 4
    REPORT_TICK = 5


@dataclass(slots=True)
class Event:
    """A scheduled occurrence.

    ``target`` is the customer id for customer-directed kinds and None for
    system events (arrivals, closings, report ticks). ``data`` carries the
    kind-specific extra: staff id for SERVICE_COMPLETE, the enqueue token
    for PATIENCE_EXPIRED.
    """

    time: SimTime
    kind: EventKind
    target: Optional[int] = None
    data: Optional[int] = None
    seq: int = field(default=-1, compare=False)


class EventQueue:
    """Time-ordered event queue with a FIFO tie-break and the simulation clock.

    (time, seq) is a strict total order over all scheduled events; ``seq`` is
    stamped here, monotonically, when the event is scheduled.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Event]] = []
        self._next_seq = 0
        self.now: SimTime = 0.0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, event: Event) -> Event:
        """Insert an event; scheduling into the past is a model bug."""
        if event.time < self.now:
            raise SchedulingInPastError(
                f"schedule at t={event.time} but clock is {self.now} ({event.kind.name})"
            )
        event.seq = self._next_seq
        self._next_seq += 1
        heapq.heappush(self._heap, (event.time, event.seq, event))
        return event

    def pop_next(self) -> Optional[Event]:
        """Remove and return the earliest event, advancing the clock to it.

        Returns None (clock unchanged) when the queue is empty.
        """
        if not self._heap:
            return None
        time, _seq, event = heapq.heappop(self._heap)
        self.now = time
        return event
