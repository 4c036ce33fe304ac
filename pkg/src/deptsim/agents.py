"""Customer and staff agents.

Customers walk a fixed state chart: they enter contemplating (a zero-duration
routing state), browse, then decide between seeking help, queueing at the
till, or leaving. Waiting states can be exited by an assignment or by running
out of patience. Staff are simple servers: once assigned they stay busy until
the customer releases them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .kernel import EventKind, IllegalTransitionError, SimTime, SimulationBugError
from .randomness import Distribution, RngStream


class CustomerState(Enum):
    CONTEMPLATING = "contemplating"
    BROWSING = "browsing"
    WAITING_FOR_HELP = "waiting_for_help"
    RECEIVING_HELP = "receiving_help"
    WAITING_AT_TILL = "waiting_at_till"
    BEING_SERVED_AT_TILL = "being_served_at_till"
    DEPARTED = "departed"


class DepartureOutcome(Enum):
    PURCHASED = "purchased"
    LEFT_WITHOUT_PURCHASE = "left_without_purchase"
    ABANDONED_HELP_QUEUE = "abandoned_help_queue"
    ABANDONED_TILL_QUEUE = "abandoned_till_queue"


class RequestKind(IntEnum):
    TILL = 0
    HELP_NORMAL = 1
    HELP_EXPERT = 2


class StaffRole(Enum):
    CASHIER = "cashier"
    SELLER_NORMAL = "seller_normal"
    SELLER_EXPERT = "seller_expert"
    SECTION_MANAGER = "section_manager"


# Which request kinds a role may be dispatched to. Tills are physical points
# manned by cashiers ("tills open" = cashier headcount), so till requests go
# to cashiers only; help requests follow training level, with section
# managers serving as expert-equivalent help resources.
CAPABILITIES: dict[StaffRole, frozenset[RequestKind]] = {
    StaffRole.CASHIER: frozenset({RequestKind.TILL}),
    StaffRole.SELLER_NORMAL: frozenset({RequestKind.HELP_NORMAL}),
    StaffRole.SELLER_EXPERT: frozenset({RequestKind.HELP_NORMAL, RequestKind.HELP_EXPERT}),
    StaffRole.SECTION_MANAGER: frozenset({RequestKind.HELP_NORMAL, RequestKind.HELP_EXPERT}),
}

# Queues a freed staff member scans, most specialised work first.
SCAN_ORDER: dict[StaffRole, tuple[RequestKind, ...]] = {
    StaffRole.CASHIER: (RequestKind.TILL,),
    StaffRole.SELLER_NORMAL: (RequestKind.HELP_NORMAL,),
    StaffRole.SELLER_EXPERT: (RequestKind.HELP_EXPERT, RequestKind.HELP_NORMAL),
    StaffRole.SECTION_MANAGER: (RequestKind.HELP_EXPERT, RequestKind.HELP_NORMAL),
}

# Lower rank = less broadly qualified; used to keep experts free for expert
# work when several staff could take a request.
QUALIFICATION_RANK: dict[StaffRole, int] = {
    StaffRole.CASHIER: 0,
    StaffRole.SELLER_NORMAL: 1,
    StaffRole.SELLER_EXPERT: 2,
    StaffRole.SECTION_MANAGER: 3,
}


def qualified(role: StaffRole, kind: RequestKind) -> bool:
    return kind in CAPABILITIES[role]


# Legal (state, trigger) pairs of the customer chart. Anything else is a bug.
LEGAL_TRIGGERS: dict[CustomerState, frozenset[EventKind]] = {
    CustomerState.CONTEMPLATING: frozenset({EventKind.DELAY_ELAPSED}),
    CustomerState.BROWSING: frozenset({EventKind.DELAY_ELAPSED}),
    CustomerState.WAITING_FOR_HELP: frozenset({EventKind.PATIENCE_EXPIRED}),
    CustomerState.RECEIVING_HELP: frozenset({EventKind.SERVICE_COMPLETE}),
    CustomerState.WAITING_AT_TILL: frozenset({EventKind.PATIENCE_EXPIRED}),
    CustomerState.BEING_SERVED_AT_TILL: frozenset({EventKind.SERVICE_COMPLETE}),
    CustomerState.DEPARTED: frozenset(),
}

# Reachable state pairs, used by the trace auditor. Assignment moves a waiting
# customer into service; both can happen at the same timestamp when a suitable
# staff member is free, which realises the zero-duration pass through the
# waiting state.
LEGAL_EDGES: frozenset[tuple[CustomerState, CustomerState]] = frozenset(
    {
        (CustomerState.CONTEMPLATING, CustomerState.BROWSING),
        (CustomerState.BROWSING, CustomerState.WAITING_FOR_HELP),
        (CustomerState.BROWSING, CustomerState.WAITING_AT_TILL),
        (CustomerState.BROWSING, CustomerState.DEPARTED),
        (CustomerState.WAITING_FOR_HELP, CustomerState.RECEIVING_HELP),
        (CustomerState.WAITING_FOR_HELP, CustomerState.DEPARTED),
        (CustomerState.RECEIVING_HELP, CustomerState.BROWSING),
        (CustomerState.RECEIVING_HELP, CustomerState.WAITING_AT_TILL),
        (CustomerState.WAITING_AT_TILL, CustomerState.BEING_SERVED_AT_TILL),
        (CustomerState.WAITING_AT_TILL, CustomerState.DEPARTED),
        (CustomerState.BEING_SERVED_AT_TILL, CustomerState.DEPARTED),
    }
)


def check_trigger(state: CustomerState, trigger: EventKind) -> None:
    if trigger not in LEGAL_TRIGGERS[state]:
        raise IllegalTransitionError(f"trigger {trigger.name} is illegal in state {state.value}")


@dataclass(slots=True)
class CustomerAgent:
    """One shopper, with attributes sampled at creation from the population
    distributions so individuals differ."""

    id: int
    entry_time: SimTime
    rng: RngStream
    help_need_p: float
    expert_help_p: float
    purchase_p: float
    to_till_after_help_p: float
    help_patience: float
    till_patience: float
    state: CustomerState = CustomerState.CONTEMPLATING
    outcome: DepartureOutcome | None = None
    # Set while the customer has an open service request.
    open_request: RequestKind | None = None
    request_token: int = -1

    def attributes(self) -> tuple[float, ...]:
        """Sampled per-customer attribute vector, in sampling order."""
        return (
            self.help_need_p,
            self.expert_help_p,
            self.purchase_p,
            self.to_till_after_help_p,
            self.help_patience,
            self.till_patience,
        )


@dataclass(slots=True)
class StaffAgent:
    """A role-typed server. Serves one customer at a time; a service runs
    from assignment until the customer releases the staff member."""

    id: int
    role: StaffRole
    serving_customer: int | None = None
    serving_kind: RequestKind | None = None
    serving_since: SimTime = -1.0
    idle_since: SimTime = 0.0
    busy_minutes: float = 0.0
    sampled_service_minutes: float = 0.0
    busy_intervals: list[tuple[float, float]] = field(default_factory=list)

    @property
    def available(self) -> bool:
        return self.serving_customer is None

    def begin(self, customer_id: int, kind: RequestKind, now: SimTime) -> None:
        if not self.available:
            raise SimulationBugError(f"staff {self.id} assigned while already serving {self.serving_customer}")
        if not qualified(self.role, kind):
            raise SimulationBugError(f"staff {self.id} ({self.role.value}) is not qualified for {kind.name}")
        self.serving_customer = customer_id
        self.serving_kind = kind
        self.serving_since = now

    def release(self, now: SimTime) -> None:
        if self.available:
            raise SimulationBugError(f"staff {self.id} released while not serving")
        self.busy_minutes += now - self.serving_since
        self.busy_intervals.append((self.serving_since, now))
        self.serving_customer = None
        self.serving_kind = None
        self.serving_since = -1.0
        self.idle_since = now


def spawn_customer(
    customer_id: int,
    now: SimTime,
    rng: RngStream,
    attrs: "PopulationAttributes",
) -> CustomerAgent:
    """Create a contemplating customer with attributes drawn from the
    population distributions, in a fixed order so streams replay identically."""
    return CustomerAgent(
        id=customer_id,
        entry_time=now,
        rng=rng,
        help_need_p=attrs.help_need_probability.sample(rng),
        expert_help_p=attrs.expert_help_probability.sample(rng),
        purchase_p=attrs.purchase_probability.sample(rng),
        to_till_after_help_p=attrs.to_till_after_help_probability.sample(rng),
        help_patience=attrs.help_patience.sample(rng),
        till_patience=attrs.till_patience.sample(rng),
    )


@dataclass(frozen=True)
class PopulationAttributes:
    """Population-level distributions the per-customer attributes are drawn
    from. Degenerate (Constant) distributions give a homogeneous population."""

    browse_time: Distribution
    help_need_probability: Distribution
    expert_help_probability: Distribution
    purchase_probability: Distribution
    to_till_after_help_probability: Distribution
    help_patience: Distribution
    till_patience: Distribution
