"""One replication: wiring between the event queue, agents, queues and KPIs.

Arrivals are pre-generated per trading day from a dedicated stream; each
customer then owns a substream keyed by arrival index, so the same customer
draws the same attributes, decisions and service durations in every
experiment arm (common random numbers). The loop runs until the event queue
empties, which naturally drains customers still in the shop at closing time.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import TYPE_CHECKING

from .agents import (
    LEGAL_EDGES,
    CustomerAgent,
    CustomerState,
    DepartureOutcome,
    RequestKind,
    StaffAgent,
    StaffRole,
    check_trigger,
    spawn_customer,
)
from .kernel import Event, EventKind, EventQueue, SimulationBugError
from .metrics import (
    WEEK_MINUTES,
    AggregationWindow,
    KpiReport,
    ReplicationTrace,
    SatisfactionEventKind,
    SatisfactionLedger,
    finalize_report,
)
from .queuing import Assigned, ServiceSystem
from .randomness import RngStream

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

STREAM_ARRIVALS = 0
STREAM_CUSTOMER = 1

_WAITING_STATE = {
    RequestKind.TILL: CustomerState.WAITING_AT_TILL,
    RequestKind.HELP_NORMAL: CustomerState.WAITING_FOR_HELP,
    RequestKind.HELP_EXPERT: CustomerState.WAITING_FOR_HELP,
}
_SERVING_STATE = {
    RequestKind.TILL: CustomerState.BEING_SERVED_AT_TILL,
    RequestKind.HELP_NORMAL: CustomerState.RECEIVING_HELP,
    RequestKind.HELP_EXPERT: CustomerState.RECEIVING_HELP,
}


class AuditError(SimulationBugError):
    """A replication invariant failed during an audited run."""


class Replication:
    """A single deterministic run of a scenario."""

    def __init__(self, config: "ScenarioConfig", replication_index: int, audit: bool = False) -> None:
        self.cfg = config
        self.rep = replication_index
        self.audit = audit
        self.queue = EventQueue()
        self.ledger = SatisfactionLedger()
        self.customers: dict[int, CustomerAgent] = {}
        self.arrived = 0
        self.in_system = 0
        self.outcome_counts: Counter[DepartureOutcome] = Counter()
        self.arrival_times: list[float] = []
        self.help_waits: list[tuple[float, float]] = []
        self.till_waits: list[tuple[float, float]] = []
        self.spawned_attributes: list[tuple[int, tuple[float, ...]]] = []
        self.transition_log: list[tuple[float, int, CustomerState, CustomerState]] = []
        self._next_customer_id = 0
        self._next_token = 0

        self.staff: list[StaffAgent] = []
        staff_id = 0
        for role in (StaffRole.CASHIER, StaffRole.SELLER_NORMAL, StaffRole.SELLER_EXPERT, StaffRole.SECTION_MANAGER):
            for _ in range(config.staffing.count(role)):
                self.staff.append(StaffAgent(id=staff_id, role=role))
                staff_id += 1
        self.staff_by_id = {s.id: s for s in self.staff}
        self.services = ServiceSystem(self.staff, config.queue_rule)

        self._windows = config.open_windows()
        self._schedule_calendar()

    # -- setup ------------------------------------------------------------

    def _schedule_calendar(self) -> None:
        arrivals = RngStream(self.cfg.seed, self.rep, STREAM_ARRIVALS)
        interarrival = self.cfg.interarrival
        schedule = self.queue.schedule
        for open_, close in self._windows:
            t = open_
            while True:
                t += interarrival.sample(arrivals)
                if t > close:
                    break
                schedule(Event(t, EventKind.ARRIVAL))
            schedule(Event(close, EventKind.SHOP_CLOSE))
        for week in range(1, self.cfg.weeks + 1):
            self.queue.schedule(Event(week * WEEK_MINUTES, EventKind.REPORT_TICK))

    # -- main loop ---------------------------------------------------------

    def run(self) -> KpiReport:
        pop = self.queue.pop_next
        while True:
            event = pop()
            if event is None:
                break
            kind = event.kind
            if kind is EventKind.DELAY_ELAPSED:
                self._on_delay_elapsed(event.target, event.time)
            elif kind is EventKind.SERVICE_COMPLETE:
                self._on_service_complete(event.target, event.data, event.time)
            elif kind is EventKind.PATIENCE_EXPIRED:
                self._on_patience_expired(event.target, event.data, event.time)
            elif kind is EventKind.ARRIVAL:
                self._on_arrival(event.time)
            elif kind is EventKind.REPORT_TICK:
                if self.audit:
                    self._check_conservation(event.time)
            # SHOP_CLOSE needs no action: arrivals are generated per trading
            # day, and in-shop customers drain naturally.
        if self.audit:
            self._check_conservation(self.queue.now)
        return self._finalize()

    # -- handlers ----------------------------------------------------------

    def _on_arrival(self, now: float) -> None:
        cid = self._next_customer_id
        self._next_customer_id += 1
        rng = RngStream(self.cfg.seed, self.rep, STREAM_CUSTOMER, cid)
        agent = spawn_customer(cid, now, rng, self.cfg.population)
        self.customers[cid] = agent
        self.arrived += 1
        self.in_system += 1
        self.arrival_times.append(now)
        if self.audit:
            self.spawned_attributes.append((cid, agent.attributes()))
        # Zero-duration routing state: the first decision fires at once.
        self.queue.schedule(Event(now, EventKind.DELAY_ELAPSED, target=cid))

    def _on_delay_elapsed(self, cid: int, now: float) -> None:
        agent = self.customers[cid]
        check_trigger(agent.state, EventKind.DELAY_ELAPSED)
        if agent.state is CustomerState.CONTEMPLATING:
            self._set_state(agent, CustomerState.BROWSING, now)
            browse = self.cfg.population.browse_time.sample(agent.rng)
            self.queue.schedule(Event(now + browse, EventKind.DELAY_ELAPSED, target=cid))
            return
        # Browsing finished: seek help, head for the till, or give up.
        rng = agent.rng
        if rng.bernoulli(agent.help_need_p):
            kind = RequestKind.HELP_EXPERT if rng.bernoulli(agent.expert_help_p) else RequestKind.HELP_NORMAL
            self._open_request(agent, kind, now)
        elif rng.bernoulli(agent.purchase_p):
            self._open_request(agent, RequestKind.TILL, now)
        else:
            self.ledger.record(cid, SatisfactionEventKind.LEFT_WITHOUT_PURCHASE, now)
            self._depart(agent, DepartureOutcome.LEFT_WITHOUT_PURCHASE, now)

    def _on_service_complete(self, cid: int, staff_id: int, now: float) -> None:
        agent = self.customers[cid]
        check_trigger(agent.state, EventKind.SERVICE_COMPLETE)
        staff = self.staff_by_id[staff_id]
        if staff.serving_customer != cid:
            raise SimulationBugError(f"service completion for staff {staff_id} names customer {cid}")
        served_kind = staff.serving_kind
        staff.release(now)
        # The freed staff member first picks up waiting work, so queued
        # customers are not overtaken by the one just released.
        handoff = self.services.on_staff_freed(staff)
        if handoff is not None:
            next_kind, entry = handoff
            self._start_service(staff, self.customers[entry.customer_id], next_kind, now, entry.enqueue_time)
        if served_kind is RequestKind.TILL:
            self.ledger.record(cid, SatisfactionEventKind.PURCHASE_COMPLETED, now, queue=RequestKind.TILL)
            self._depart(agent, DepartureOutcome.PURCHASED, now)
        else:
            if agent.rng.bernoulli(agent.to_till_after_help_p):
                self._open_request(agent, RequestKind.TILL, now)
            else:
                self._set_state(agent, CustomerState.BROWSING, now)
                browse = self.cfg.population.browse_time.sample(agent.rng)
                self.queue.schedule(Event(now + browse, EventKind.DELAY_ELAPSED, target=cid))

    def _on_patience_expired(self, cid: int, token: int, now: float) -> None:
        agent = self.customers[cid]
        if agent.request_token != token or agent.open_request is None:
            return  # stale: the customer was served (or left) before this fired
        kind = agent.open_request
        entry = self.services.renege(cid, kind)
        if entry is None:
            raise SimulationBugError(f"customer {cid} holds open request {kind.name} but is not queued")
        agent.open_request = None
        agent.request_token = -1
        if kind is RequestKind.TILL:
            self.ledger.record(cid, SatisfactionEventKind.TILL_ABANDONED, now, queue=RequestKind.TILL)
            self._depart(agent, DepartureOutcome.ABANDONED_TILL_QUEUE, now)
        else:
            self.ledger.record(cid, SatisfactionEventKind.HELP_ABANDONED, now, queue=kind)
            self._depart(agent, DepartureOutcome.ABANDONED_HELP_QUEUE, now)

    # -- plumbing ----------------------------------------------------------

    def _open_request(self, agent: CustomerAgent, kind: RequestKind, now: float) -> None:
        if agent.open_request is not None:
            raise SimulationBugError(f"customer {agent.id} already holds an open {agent.open_request.name} request")
        patience = agent.till_patience if kind is RequestKind.TILL else agent.help_patience
        self._set_state(agent, _WAITING_STATE[kind], now)
        result = self.services.request_service(agent.id, kind, now, patience)
        if isinstance(result, Assigned):
            # Suitable staff free: the waiting state is passed through in
            # zero time.
            self._start_service(self.staff_by_id[result.staff_id], agent, kind, now, enqueue_time=None)
        else:
            agent.open_request = kind
            agent.request_token = self._next_token
            self._next_token += 1
            if math.isfinite(result.deadline):
                self.queue.schedule(
                    Event(result.deadline, EventKind.PATIENCE_EXPIRED, target=agent.id, data=agent.request_token)
                )

    def _start_service(
        self,
        staff: StaffAgent,
        agent: CustomerAgent,
        kind: RequestKind,
        now: float,
        enqueue_time: float | None,
    ) -> None:
        staff.begin(agent.id, kind, now)
        duration = self.cfg.service_times[kind].sample(agent.rng)
        staff.sampled_service_minutes += duration
        self.queue.schedule(Event(now + duration, EventKind.SERVICE_COMPLETE, target=agent.id, data=staff.id))
        agent.open_request = None
        agent.request_token = -1
        self._set_state(agent, _SERVING_STATE[kind], now)
        if enqueue_time is None:
            self.ledger.record(agent.id, SatisfactionEventKind.SERVED_IMMEDIATELY, now, queue=kind)
            wait = 0.0
        else:
            self.ledger.record(agent.id, SatisfactionEventKind.SERVED_AFTER_WAIT, now, queue=kind)
            wait = now - enqueue_time
        if kind is RequestKind.TILL:
            self.till_waits.append((now, wait))
        else:
            self.help_waits.append((now, wait))

    def _set_state(self, agent: CustomerAgent, state: CustomerState, now: float) -> None:
        if self.audit:
            if (agent.state, state) not in LEGAL_EDGES:
                raise AuditError(f"illegal edge {agent.state.value} -> {state.value} for customer {agent.id}")
            self.transition_log.append((now, agent.id, agent.state, state))
        agent.state = state

    def _depart(self, agent: CustomerAgent, outcome: DepartureOutcome, now: float) -> None:
        self._set_state(agent, CustomerState.DEPARTED, now)
        agent.outcome = outcome
        self.outcome_counts[outcome] += 1
        self.in_system -= 1

    # -- invariants and results ---------------------------------------------

    def _check_conservation(self, now: float) -> None:
        departed = sum(self.outcome_counts.values())
        if self.arrived != self.in_system + departed:
            raise AuditError(
                f"conservation broken at t={now}: arrived {self.arrived} != "
                f"{self.in_system} in system + {departed} departed"
            )
        for role in StaffRole:
            configured = self.cfg.staffing.count(role)
            present = sum(1 for s in self.staff if s.role is role)
            if present != configured:
                raise AuditError(f"staff conservation broken for {role.value}")
        queued_ids: list[int] = []
        for queue in self.services.queues.values():
            queued_ids.extend(e.customer_id for e in queue.entries)
        if len(queued_ids) != len(set(queued_ids)):
            raise AuditError("a customer appears in more than one queue")
        for cid in queued_ids:
            state = self.customers[cid].state
            if state not in (CustomerState.WAITING_FOR_HELP, CustomerState.WAITING_AT_TILL):
                raise AuditError(f"queued customer {cid} is in state {state.value}")
        serving = {s.serving_customer for s in self.staff if not s.available}
        if serving & set(queued_ids):
            raise AuditError("a customer is queued while being served")

    def _finalize(self) -> KpiReport:
        trace = ReplicationTrace(
            ledger=self.ledger,
            arrival_times=self.arrival_times,
            help_waits=self.help_waits,
            till_waits=self.till_waits,
            staff=self.staff,
        )
        window = AggregationWindow(
            warmup_end=self.cfg.warmup_end(),
            weeks=self.cfg.weeks,
            open_windows=self._windows,
        )
        return finalize_report(
            trace,
            window,
            self.cfg.weights,
            replication=self.rep,
            seed=self.cfg.seed,
            staff_counts=self.cfg.staffing.counts(),
        )
