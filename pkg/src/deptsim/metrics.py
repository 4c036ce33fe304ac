"""Satisfaction accounting and KPI aggregation.

Certain situations hit customer satisfaction harder than others, so state
transitions log weighted satisfaction events. The service level index is the
per-arrival normalised weighted sum of those events; weights are analyst
configuration, positive for satisfying events and negative for dissatisfying
ones. All other KPIs (transactions, waits, abandonment, utilization) are
standard queue measures computed from the replication trace.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .agents import RequestKind, StaffAgent
from .kernel import SimTime

WEEK_MINUTES = 7 * 24 * 60.0


class SatisfactionEventKind(Enum):
    SERVED_IMMEDIATELY = "served_immediately"
    SERVED_AFTER_WAIT = "served_after_wait"
    HELP_ABANDONED = "help_abandoned"
    TILL_ABANDONED = "till_abandoned"
    PURCHASE_COMPLETED = "purchase_completed"
    LEFT_WITHOUT_PURCHASE = "left_without_purchase"


_TERMINAL_KINDS = frozenset(
    {
        SatisfactionEventKind.HELP_ABANDONED,
        SatisfactionEventKind.TILL_ABANDONED,
        SatisfactionEventKind.PURCHASE_COMPLETED,
        SatisfactionEventKind.LEFT_WITHOUT_PURCHASE,
    }
)


@dataclass(frozen=True)
class SatisfactionWeights:
    """Weight per satisfaction event kind. Defaults are placeholders an
    analyst is expected to override to stress different operational aspects."""

    served_immediately: float = 2.0
    served_after_wait: float = 1.0
    help_abandoned: float = -2.0
    till_abandoned: float = -3.0
    purchase_completed: float = 2.0
    left_without_purchase: float = 0.0

    def weight(self, kind: SatisfactionEventKind) -> float:
        return getattr(self, kind.value)

    def as_dict(self) -> dict[str, float]:
        return {kind.value: self.weight(kind) for kind in SatisfactionEventKind}

    def scaled(self, factor: float) -> "SatisfactionWeights":
        return SatisfactionWeights(**{k: v * factor for k, v in self.as_dict().items()})

    def validate(self) -> list[str]:
        values = list(self.as_dict().values())
        errors = []
        if not any(v > 0 for v in values):
            errors.append("weights: at least one weight must be positive")
        if not any(v < 0 for v in values):
            errors.append("weights: at least one weight must be negative")
        return errors


@dataclass(slots=True)
class SatisfactionRecord:
    time: SimTime
    customer_id: int
    kind: SatisfactionEventKind
    # Queue the event is attributed to: TILL, a help kind, or None for
    # events outside both service paths (leaving without purchase).
    queue: RequestKind | None


class SatisfactionLedger:
    """Replication-wide satisfaction event log plus per-customer logs."""

    def __init__(self) -> None:
        self.events: list[SatisfactionRecord] = []
        self.per_customer: dict[int, list[SatisfactionRecord]] = {}

    def record(
        self,
        customer_id: int,
        kind: SatisfactionEventKind,
        now: SimTime,
        queue: RequestKind | None = None,
    ) -> None:
        rec = SatisfactionRecord(now, customer_id, kind, queue)
        self.events.append(rec)
        self.per_customer.setdefault(customer_id, []).append(rec)

    def customer_log(self, customer_id: int) -> list[SatisfactionRecord]:
        return self.per_customer.get(customer_id, [])

    def terminal_count(self, customer_id: int) -> int:
        return sum(1 for r in self.customer_log(customer_id) if r.kind in _TERMINAL_KINDS)


def service_level_index(
    ledger: SatisfactionLedger,
    weights: SatisfactionWeights,
    customers_arrived: int,
) -> float:
    """Weighted event sum normalised per arrival; 0 when nobody arrived."""
    if customers_arrived == 0:
        return 0.0
    total = sum(weights.weight(rec.kind) for rec in ledger.events)
    return total / customers_arrived


def index_from_counts(event_counts: dict[str, int], weights: SatisfactionWeights, customers_arrived: int) -> float:
    """Recompute an index from aggregated event counts (exact, so weight
    rescalings can be checked without re-running the simulation)."""
    if customers_arrived == 0:
        return 0.0
    return sum(weights.weight(kind) * event_counts.get(kind.value, 0) for kind in SatisfactionEventKind) / customers_arrived


@dataclass
class ReplicationTrace:
    """Raw timestamped measurements of one replication, before windowing."""

    ledger: SatisfactionLedger
    arrival_times: list[float]
    # (assignment time, wait) per queue group.
    help_waits: list[tuple[float, float]] = field(default_factory=list)
    till_waits: list[tuple[float, float]] = field(default_factory=list)
    staff: list[StaffAgent] = field(default_factory=list)


@dataclass(frozen=True)
class AggregationWindow:
    """When KPIs count: events at or after warmup_end, bucketed into weeks."""

    warmup_end: float
    weeks: int
    open_windows: tuple[tuple[float, float], ...]

    def week_of(self, t: float) -> int:
        w = int(t // WEEK_MINUTES)
        return min(max(w, 0), self.weeks - 1)

    def open_minutes_after_warmup(self) -> float:
        return sum(max(0.0, close - max(open_, self.warmup_end)) for open_, close in self.open_windows)


@dataclass
class KpiReport:
    replication: int
    seed: int
    customers_arrived: int
    transactions: int
    service_level_index: float
    help_index: float
    till_index: float
    mean_help_wait: float
    p95_help_wait: float
    mean_till_wait: float
    p95_till_wait: float
    outcome_counts: dict[str, int]
    event_counts: dict[str, int]
    utilization: dict[str, float]
    weekly: dict[str, list[float]]
    arm_value: float | None = None


def _percentile95(values: list[float]) -> float:
    if not values:
        return 0.0
    ordered = sorted(values)
    # Linear interpolation between closest ranks.
    pos = 0.95 * (len(ordered) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(ordered) - 1)
    frac = pos - lo
    return ordered[lo] * (1.0 - frac) + ordered[hi] * frac


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _clipped_busy_minutes(
    intervals: list[tuple[float, float]],
    window: AggregationWindow,
    weekly_out: list[float] | None = None,
) -> float:
    """Busy time inside opening hours from warmup_end on. Service run-over
    past closing (the end-of-day drain) is excluded so utilization stays a
    fraction of scheduled hours."""
    opens = [w[0] for w in window.open_windows]
    total = 0.0
    for start, end in intervals:
        if end <= window.warmup_end:
            continue
        start = max(start, window.warmup_end)
        idx = max(0, bisect.bisect_right(opens, start) - 1)
        while idx < len(window.open_windows):
            open_, close = window.open_windows[idx]
            if open_ >= end:
                break
            credit = min(end, close) - max(start, open_)
            if credit > 0:
                total += credit
                if weekly_out is not None:
                    weekly_out[window.week_of(open_)] += credit
            idx += 1
    return total


def finalize_report(
    trace: ReplicationTrace,
    window: AggregationWindow,
    weights: SatisfactionWeights,
    replication: int,
    seed: int,
    staff_counts: dict[str, int],
) -> KpiReport:
    """Aggregate a replication trace into the KPI report.

    Everything is attributed by event time: events before warmup_end are
    excluded, later events land in their week's bucket.
    """
    weeks = window.weeks
    warm = window.warmup_end

    arrivals = [t for t in trace.arrival_times if t >= warm]
    weekly_arrivals = [0.0] * weeks
    for t in arrivals:
        weekly_arrivals[window.week_of(t)] += 1

    event_counts: Counter[str] = Counter()
    weekly_weight_sum = [0.0] * weeks
    weekly_help_counts: list[float] = [0.0] * weeks
    weekly_till_counts: list[float] = [0.0] * weeks
    weekly_transactions = [0.0] * weeks
    help_sum = 0.0
    till_sum = 0.0
    weight_sum = 0.0
    for rec in trace.ledger.events:
        if rec.time < warm:
            continue
        w = weights.weight(rec.kind)
        event_counts[rec.kind.value] += 1
        weight_sum += w
        wk = window.week_of(rec.time)
        weekly_weight_sum[wk] += w
        if rec.queue is RequestKind.TILL:
            till_sum += w
        elif rec.queue is not None:
            help_sum += w
        if rec.kind is SatisfactionEventKind.PURCHASE_COMPLETED:
            weekly_transactions[wk] += 1
        elif rec.kind is SatisfactionEventKind.HELP_ABANDONED:
            weekly_help_counts[wk] += 1
        elif rec.kind is SatisfactionEventKind.TILL_ABANDONED:
            weekly_till_counts[wk] += 1

    n_arrived = len(arrivals)
    index = weight_sum / n_arrived if n_arrived else 0.0
    help_index = help_sum / n_arrived if n_arrived else 0.0
    till_index = till_sum / n_arrived if n_arrived else 0.0

    help_waits = [wt for t, wt in trace.help_waits if t >= warm]
    till_waits = [wt for t, wt in trace.till_waits if t >= warm]
    weekly_till_wait_buckets: list[list[float]] = [[] for _ in range(weeks)]
    for t, wt in trace.till_waits:
        if t >= warm:
            weekly_till_wait_buckets[window.week_of(t)].append(wt)

    open_minutes = window.open_minutes_after_warmup()
    utilization: dict[str, float] = {}
    weekly_util: dict[str, list[float]] = {}
    busy_by_role: dict[str, float] = {}
    weekly_busy_by_role: dict[str, list[float]] = {}
    for member in trace.staff:
        role = member.role.value
        weekly_busy = weekly_busy_by_role.setdefault(role, [0.0] * weeks)
        busy_by_role[role] = busy_by_role.get(role, 0.0) + _clipped_busy_minutes(
            member.busy_intervals, window, weekly_busy
        )
    weekly_open = [0.0] * weeks
    for open_, close in window.open_windows:
        weekly_open[window.week_of(open_)] += max(0.0, close - max(open_, warm))
    for role, count in staff_counts.items():
        if count == 0 or open_minutes == 0:
            utilization[role] = 0.0
            weekly_util[role] = [0.0] * weeks
            continue
        utilization[role] = busy_by_role.get(role, 0.0) / (count * open_minutes)
        weekly_util[role] = [
            (weekly_busy_by_role.get(role, [0.0] * weeks)[w] / (count * weekly_open[w]) if weekly_open[w] > 0 else 0.0)
            for w in range(weeks)
        ]

    outcome_counts = {
        "purchased": event_counts.get(SatisfactionEventKind.PURCHASE_COMPLETED.value, 0),
        "left_without_purchase": event_counts.get(SatisfactionEventKind.LEFT_WITHOUT_PURCHASE.value, 0),
        "abandoned_help_queue": event_counts.get(SatisfactionEventKind.HELP_ABANDONED.value, 0),
        "abandoned_till_queue": event_counts.get(SatisfactionEventKind.TILL_ABANDONED.value, 0),
    }

    weekly = {
        "arrivals": weekly_arrivals,
        "transactions": weekly_transactions,
        "service_level_index": [
            weekly_weight_sum[w] / weekly_arrivals[w] if weekly_arrivals[w] else 0.0 for w in range(weeks)
        ],
        "abandoned_help": weekly_help_counts,
        "abandoned_till": weekly_till_counts,
        "mean_till_wait": [_mean(b) for b in weekly_till_wait_buckets],
        "p95_till_wait": [_percentile95(b) for b in weekly_till_wait_buckets],
    }
    for role, series in weekly_util.items():
        weekly[f"util_{role}"] = series

    return KpiReport(
        replication=replication,
        seed=seed,
        customers_arrived=n_arrived,
        transactions=outcome_counts["purchased"],
        service_level_index=index,
        help_index=help_index,
        till_index=till_index,
        mean_help_wait=_mean(help_waits),
        p95_help_wait=_percentile95(help_waits),
        mean_till_wait=_mean(till_waits),
        p95_till_wait=_percentile95(till_waits),
        outcome_counts=outcome_counts,
        event_counts=dict(event_counts),
        utilization=utilization,
        weekly=weekly,
    )
