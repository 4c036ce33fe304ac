"""Typed service queues with pluggable dequeue rules and reneging.

A customer first tries to obtain service directly; only when no suitable
staff member is free does the request join its kind's queue. Queued requests
leave either by assignment (when a qualified staff member frees up) or by
reneging when the customer's patience deadline passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .agents import QUALIFICATION_RANK, SCAN_ORDER, RequestKind, StaffAgent, qualified
from .kernel import SimTime, SimulationBugError


class QueueRule(Enum):
    FIFO = "fifo"
    LIFO = "lifo"
    SHORTEST_DEADLINE_FIRST = "shortest_deadline_first"


@dataclass(slots=True)
class QueueEntry:
    seq: int
    customer_id: int
    enqueue_time: SimTime
    deadline: SimTime


@dataclass
class ServiceQueue:
    kind: RequestKind
    rule: QueueRule
    entries: list[QueueEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def push(self, entry: QueueEntry) -> None:
        if any(e.customer_id == entry.customer_id for e in self.entries):
            raise SimulationBugError(f"customer {entry.customer_id} enqueued twice in {self.kind.name}")
        self.entries.append(entry)

    def pop(self) -> QueueEntry | None:
        """Remove and return the next entry under this queue's rule."""
        if not self.entries:
            return None
        if self.rule is QueueRule.FIFO:
            return self.entries.pop(0)
        if self.rule is QueueRule.LIFO:
            return self.entries.pop()
        # Shortest deadline first; ties fall back to enqueue order.
        best = min(range(len(self.entries)), key=lambda i: (self.entries[i].deadline, self.entries[i].seq))
        return self.entries.pop(best)

    def remove(self, customer_id: int) -> QueueEntry | None:
        for i, entry in enumerate(self.entries):
            if entry.customer_id == customer_id:
                return self.entries.pop(i)
        return None


@dataclass(frozen=True)
class Assigned:
    staff_id: int


@dataclass(frozen=True)
class Enqueued:
    deadline: SimTime


def select_staff(candidates: list[StaffAgent], kind: RequestKind) -> StaffAgent:
    """Pick which free staff member takes a request.

    Least qualified first, so broadly-skilled staff stay free for the work
    only they can do. Ties go to the longest-idle member, then lowest id.
    """
    if not candidates:
        raise SimulationBugError("select_staff called with no candidates")
    return min(candidates, key=lambda s: (QUALIFICATION_RANK[s.role], s.idle_since, s.id))


class ServiceSystem:
    """Matches service requests to qualified, available staff.

    Owns one queue per request kind. The engine drives it: request_service on
    a customer decision, on_staff_freed after a release, renege when a
    patience event fires for a still-queued customer.
    """

    def __init__(self, staff: list[StaffAgent], rule: QueueRule) -> None:
        self.staff = staff
        self.queues = {kind: ServiceQueue(kind, rule) for kind in RequestKind}
        self._next_entry_seq = 0

    def queue_length(self, kind: RequestKind) -> int:
        return len(self.queues[kind])

    def free_qualified(self, kind: RequestKind) -> list[StaffAgent]:
        return [s for s in self.staff if s.available and qualified(s.role, kind)]

    def request_service(self, customer_id: int, kind: RequestKind, now: SimTime, patience: float) -> Assigned | Enqueued:
        """Try direct assignment; otherwise queue with a patience deadline."""
        candidates = self.free_qualified(kind)
        if candidates:
            return Assigned(select_staff(candidates, kind).id)
        entry = QueueEntry(
            seq=self._next_entry_seq,
            customer_id=customer_id,
            enqueue_time=now,
            deadline=now + patience,
        )
        self._next_entry_seq += 1
        self.queues[kind].push(entry)
        return Enqueued(entry.deadline)

    def on_staff_freed(self, staff: StaffAgent) -> tuple[RequestKind, QueueEntry] | None:
        """Offer the freed staff member the waiting work they are best used
        for, scanning their queues most-specialised first."""
        if not staff.available:
            raise SimulationBugError(f"on_staff_freed for busy staff {staff.id}")
        for kind in SCAN_ORDER[staff.role]:
            entry = self.queues[kind].pop()
            if entry is not None:
                return kind, entry
        return None

    def renege(self, customer_id: int, kind: RequestKind) -> QueueEntry | None:
        """Remove a queued customer who ran out of patience. Returns None if
        the customer already left the queue (stale patience event)."""
        return self.queues[kind].remove(customer_id)
