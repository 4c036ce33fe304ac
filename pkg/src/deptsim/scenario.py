"""Scenario configuration, validation, and the experiment harness.

A scenario fully describes one simulated department: opening schedule,
arrival process, staffing mix, service and customer-attribute distributions,
satisfaction weights, and the random seed. Experiments are sweeps over the
staffing mix (till count, expert count) holding total headcount at ten, run
with common random numbers so arm differences are attributable to the swept
parameter.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import yaml

from .agents import PopulationAttributes, RequestKind, StaffRole
from .metrics import WEEK_MINUTES, KpiReport, SatisfactionEventKind, SatisfactionWeights
from .queuing import QueueRule
from .randomness import Constant, Distribution, Empirical, Exponential, Triangular

TOTAL_STAFF_EXPERIMENT = 10
TILL_SWEEP_VALUES = tuple(range(1, 10))
EXPERT_SWEEP_VALUES = tuple(range(0, 5))


class ConfigError(ValueError):
    """Scenario configuration is invalid; carries every violation found."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Staffing:
    cashiers: int = 0
    sellers_normal: int = 0
    sellers_expert: int = 0
    managers: int = 0

    def total(self) -> int:
        return self.cashiers + self.sellers_normal + self.sellers_expert + self.managers

    def count(self, role: StaffRole) -> int:
        return {
            StaffRole.CASHIER: self.cashiers,
            StaffRole.SELLER_NORMAL: self.sellers_normal,
            StaffRole.SELLER_EXPERT: self.sellers_expert,
            StaffRole.SECTION_MANAGER: self.managers,
        }[role]

    def counts(self) -> dict[str, int]:
        return {role.value: self.count(role) for role in StaffRole}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    seed: int
    weeks: int
    warmup_weeks: int
    replications: int
    days_per_week: int
    hours_per_day: float
    queue_rule: QueueRule
    staff_selection: str
    staffing: Staffing
    interarrival: Distribution
    service_times: dict[RequestKind, Distribution]
    population: PopulationAttributes
    weights: SatisfactionWeights

    def open_windows(self) -> tuple[tuple[float, float], ...]:
        """(open, close) wall-clock minutes of every trading day."""
        minutes_per_day = self.hours_per_day * 60.0
        windows = []
        for week in range(self.weeks):
            for day in range(self.days_per_week):
                open_ = (week * 7 + day) * 1440.0
                windows.append((open_, open_ + minutes_per_day))
        return tuple(windows)

    def warmup_end(self) -> float:
        return self.warmup_weeks * WEEK_MINUTES

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.weeks <= 0:
            errors.append(f"weeks: must be > 0, got {self.weeks}")
        if self.warmup_weeks < 0 or self.warmup_weeks >= max(self.weeks, 1):
            errors.append(f"warmup_weeks: must be in [0, weeks), got {self.warmup_weeks}")
        if self.replications < 1:
            errors.append(f"replications: must be >= 1, got {self.replications}")
        if not (1 <= self.days_per_week <= 7):
            errors.append(f"days_per_week: must be in 1..7, got {self.days_per_week}")
        if not (0 < self.hours_per_day <= 24):
            errors.append(f"hours_per_day: must be in (0, 24], got {self.hours_per_day}")

        staff = self.staffing
        for fname in ("cashiers", "sellers_normal", "sellers_expert", "managers"):
            if getattr(staff, fname) < 0:
                errors.append(f"staffing.{fname}: must be >= 0, got {getattr(staff, fname)}")
        if staff.total() <= 0:
            errors.append("staffing: total staff must be > 0")

        errors.extend(self.interarrival.validate("arrivals.interarrival"))
        for kind, dist in self.service_times.items():
            name = f"service_times.{_SERVICE_KEYS[kind]}"
            errors.extend(dist.validate(name))
            if isinstance(dist, Constant) and math.isinf(dist.value):
                errors.append(f"{name}: service time may not be infinite")

        pop = self.population
        errors.extend(pop.browse_time.validate("customers.browse_time"))
        if isinstance(pop.browse_time, Constant) and math.isinf(pop.browse_time.value):
            errors.append("customers.browse_time: may not be infinite")
        for pname in (
            "help_need_probability",
            "expert_help_probability",
            "purchase_probability",
            "to_till_after_help_probability",
        ):
            dist = getattr(pop, pname)
            name = f"customers.{pname}"
            errors.extend(dist.validate(name))
            if isinstance(dist, Exponential):
                errors.append(f"{name}: probabilities need a bounded distribution, not exponential")
            else:
                lo, hi = dist.support()
                if lo < 0.0 or hi > 1.0:
                    errors.append(f"{name}: support [{lo}, {hi}] must lie within [0, 1]")
        for pname in ("help_patience", "till_patience"):
            errors.extend(getattr(pop, pname).validate(f"customers.{pname}"))

        errors.extend(self.weights.validate())
        errors.extend(self._deadlock_errors())
        return errors

    def _deadlock_errors(self) -> list[str]:
        """A request kind that can occur, can wait forever, and has no
        qualified staff would strand customers; reject such configs."""
        errors = []
        help_possible = self.population.help_need_probability.support()[1] > 0.0
        expert_possible = help_possible and self.population.expert_help_probability.support()[1] > 0.0
        normal_possible = help_possible
        till_possible = (
            self.population.purchase_probability.support()[1] > 0.0
            or (help_possible and self.population.to_till_after_help_probability.support()[1] > 0.0)
        )
        help_wait_inf = _can_sample_infinite(self.population.help_patience)
        till_wait_inf = _can_sample_infinite(self.population.till_patience)
        staff = self.staffing
        help_capable = staff.sellers_normal + staff.sellers_expert + staff.managers
        expert_capable = staff.sellers_expert + staff.managers
        if till_possible and till_wait_inf and staff.cashiers == 0:
            errors.append("staffing.cashiers: till requests can wait forever but no cashier is configured")
        if normal_possible and help_wait_inf and help_capable == 0:
            errors.append("staffing: help requests can wait forever but no help-capable staff is configured")
        if expert_possible and help_wait_inf and expert_capable == 0:
            errors.append("staffing: expert help requests can wait forever but no expert or manager is configured")
        return errors


def _can_sample_infinite(dist: Distribution) -> bool:
    """True only when a draw can literally be infinity (never reneges).
    Unbounded-support families such as the exponential always return a
    finite value."""
    if isinstance(dist, Constant):
        return math.isinf(dist.value)
    if isinstance(dist, Empirical):
        return any(math.isinf(v) for v, _ in dist.table)
    return False


_SERVICE_KEYS = {
    RequestKind.TILL: "till",
    RequestKind.HELP_NORMAL: "help_normal",
    RequestKind.HELP_EXPERT: "help_expert",
}

_DIST_TYPES = {"constant", "exponential", "triangular", "empirical"}

_TOP_LEVEL_KEYS = {
    "preset",
    "seed",
    "weeks",
    "warmup_weeks",
    "replications",
    "days_per_week",
    "hours_per_day",
    "queue_rule",
    "staff_selection",
    "staffing",
    "arrivals",
    "service_times",
    "customers",
    "weights",
}

# The one staff-selection rule implemented; named in configs so scenarios
# stay explicit about dispatch behaviour.
STAFF_SELECTION_RULES = ("least_qualified_first",)

_CUSTOMER_KEYS = (
    "browse_time",
    "help_need_probability",
    "expert_help_probability",
    "purchase_probability",
    "to_till_after_help_probability",
    "help_patience",
    "till_patience",
)


def _parse_distribution(raw: Any, name: str, errors: list[str]) -> Distribution:
    fallback = Constant(0.0)
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return Constant(float(raw))
    if not isinstance(raw, dict):
        errors.append(f"{name}: expected a number or a distribution mapping, got {type(raw).__name__}")
        return fallback
    kind = raw.get("type")
    if kind not in _DIST_TYPES:
        errors.append(f"{name}: unknown distribution type {kind!r} (expected one of {sorted(_DIST_TYPES)})")
        return fallback

    def num(key: str) -> float:
        value = raw.get(key)
        if isinstance(value, str) and value.lower() in {"inf", ".inf", "infinity"}:
            value = math.inf
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            errors.append(f"{name}: field {key!r} must be a number")
            return 0.0
        return float(value)

    allowed = {"type"}
    if kind == "constant":
        allowed |= {"value"}
        dist: Distribution = Constant(num("value"))
    elif kind == "exponential":
        allowed |= {"rate"}
        dist = Exponential(num("rate"))
    elif kind == "triangular":
        allowed |= {"min", "mode", "max"}
        dist = Triangular(num("min"), num("mode"), num("max"))
    else:
        allowed |= {"table"}
        table = raw.get("table")
        pairs: list[tuple[float, float]] = []
        if not isinstance(table, list) or not table:
            errors.append(f"{name}: empirical table must be a non-empty list of [value, probability] pairs")
        else:
            for i, pair in enumerate(table):
                if (not isinstance(pair, (list, tuple))) or len(pair) != 2:
                    errors.append(f"{name}: table entry {i} must be a [value, probability] pair")
                    continue
                pairs.append((float(pair[0]), float(pair[1])))
        dist = Empirical(tuple(pairs))
    unknown = set(raw) - allowed
    if unknown:
        errors.append(f"{name}: unknown keys {sorted(unknown)}")
    return dist


def _require_int(mapping: dict, key: str, errors: list[str], default: int) -> int:
    value = mapping.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{key}: must be an integer, got {value!r}")
        return default
    return value


def _require_num(mapping: dict, key: str, errors: list[str], default: float) -> float:
    value = mapping.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{key}: must be a number, got {value!r}")
        return default
    return float(value)


def build_config(mapping: dict[str, Any], name: str = "custom") -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a raw mapping.

    A ``preset`` key pulls in that preset's values first; remaining keys
    override it section by section. Unknown keys anywhere are errors. Raises
    ConfigError listing every violation found, not just the first.
    """
    from .presets import PRESETS, preset_mapping

    errors: list[str] = []
    if not isinstance(mapping, dict):
        raise ConfigError(["scenario: top level must be a mapping"])

    merged: dict[str, Any] = {}
    preset_name = mapping.get("preset")
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigError([f"preset: unknown preset {preset_name!r}; available: {sorted(PRESETS)}"])
        merged = preset_mapping(preset_name)
        name = preset_name
    for key, value in mapping.items():
        if key == "preset":
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key].update(value)
        else:
            merged[key] = value

    unknown = set(merged) - _TOP_LEVEL_KEYS
    if unknown:
        errors.append(f"scenario: unknown keys {sorted(unknown)}")

    seed = _require_int(merged, "seed", errors, 0)
    weeks = _require_int(merged, "weeks", errors, 10)
    warmup = _require_int(merged, "warmup_weeks", errors, 1)
    replications = _require_int(merged, "replications", errors, 20)
    days = _require_int(merged, "days_per_week", errors, 6)
    hours = _require_num(merged, "hours_per_day", errors, 9.0)

    rule_raw = merged.get("queue_rule", "fifo")
    try:
        rule = QueueRule(rule_raw)
    except ValueError:
        errors.append(f"queue_rule: unknown rule {rule_raw!r} (expected one of {[r.value for r in QueueRule]})")
        rule = QueueRule.FIFO

    selection = merged.get("staff_selection", STAFF_SELECTION_RULES[0])
    if selection not in STAFF_SELECTION_RULES:
        errors.append(
            f"staff_selection: unknown rule {selection!r} (expected one of {list(STAFF_SELECTION_RULES)})"
        )
        selection = STAFF_SELECTION_RULES[0]

    staffing_raw = merged.get("staffing", {})
    if not isinstance(staffing_raw, dict):
        errors.append("staffing: must be a mapping")
        staffing_raw = {}
    unknown = set(staffing_raw) - {"cashiers", "sellers_normal", "sellers_expert", "managers"}
    if unknown:
        errors.append(f"staffing: unknown keys {sorted(unknown)}")
    staffing = Staffing(
        cashiers=_require_int(staffing_raw, "cashiers", errors, 0),
        sellers_normal=_require_int(staffing_raw, "sellers_normal", errors, 0),
        sellers_expert=_require_int(staffing_raw, "sellers_expert", errors, 0),
        managers=_require_int(staffing_raw, "managers", errors, 0),
    )

    arrivals_raw = merged.get("arrivals", {})
    if not isinstance(arrivals_raw, dict):
        errors.append("arrivals: must be a mapping")
        arrivals_raw = {}
    unknown = set(arrivals_raw) - {"interarrival"}
    if unknown:
        errors.append(f"arrivals: unknown keys {sorted(unknown)}")
    interarrival = _parse_distribution(
        arrivals_raw.get("interarrival", {"type": "constant", "value": math.inf}),
        "arrivals.interarrival",
        errors,
    )

    service_raw = merged.get("service_times", {})
    if not isinstance(service_raw, dict):
        errors.append("service_times: must be a mapping")
        service_raw = {}
    unknown = set(service_raw) - set(_SERVICE_KEYS.values())
    if unknown:
        errors.append(f"service_times: unknown keys {sorted(unknown)}")
    service_times = {
        kind: _parse_distribution(service_raw.get(key, 1.0), f"service_times.{key}", errors)
        for kind, key in _SERVICE_KEYS.items()
    }

    customers_raw = merged.get("customers", {})
    if not isinstance(customers_raw, dict):
        errors.append("customers: must be a mapping")
        customers_raw = {}
    unknown = set(customers_raw) - set(_CUSTOMER_KEYS)
    if unknown:
        errors.append(f"customers: unknown keys {sorted(unknown)}")
    defaults = {
        "browse_time": 5.0,
        "help_need_probability": 0.0,
        "expert_help_probability": 0.0,
        "purchase_probability": 1.0,
        "to_till_after_help_probability": 0.7,
        "help_patience": {"type": "constant", "value": math.inf},
        "till_patience": {"type": "constant", "value": math.inf},
    }
    pop_dists = {
        key: _parse_distribution(customers_raw.get(key, defaults[key]), f"customers.{key}", errors)
        for key in _CUSTOMER_KEYS
    }
    population = PopulationAttributes(**pop_dists)

    weights_raw = merged.get("weights", {})
    if not isinstance(weights_raw, dict):
        errors.append("weights: must be a mapping")
        weights_raw = {}
    weight_fields = {k.value for k in SatisfactionEventKind}
    unknown = set(weights_raw) - weight_fields
    if unknown:
        errors.append(f"weights: unknown keys {sorted(unknown)}")
    weight_values = {}
    for fname in weight_fields:
        if fname in weights_raw:
            weight_values[fname] = _require_num(weights_raw, fname, errors, 0.0)
    weights = SatisfactionWeights(**weight_values)

    config = ScenarioConfig(
        name=name,
        seed=seed,
        weeks=weeks,
        warmup_weeks=warmup,
        replications=replications,
        days_per_week=days,
        hours_per_day=hours,
        queue_rule=rule,
        staff_selection=selection,
        staffing=staffing,
        interarrival=interarrival,
        service_times=service_times,
        population=population,
        weights=weights,
    )
    errors.extend(config.validate())
    if errors:
        raise ConfigError(errors)
    return config


def load_and_validate(source: str | Path | dict[str, Any]) -> ScenarioConfig:
    """Load a scenario from a YAML file path or a raw mapping and validate it."""
    if isinstance(source, dict):
        return build_config(source)
    path = Path(source)
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    return build_config(raw, name=path.stem)


def preset_config(name: str, **overrides: Any) -> ScenarioConfig:
    """A shipped preset as a validated config; keyword overrides replace
    top-level scalar fields (seed, weeks, warmup_weeks, replications)."""
    from .presets import preset_mapping

    mapping = preset_mapping(name)
    for key, value in overrides.items():
        if value is not None:
            mapping[key] = value
    return build_config(mapping, name=name)


def with_staffing(config: ScenarioConfig, staffing: Staffing) -> ScenarioConfig:
    derived = dataclasses.replace(config, staffing=staffing)
    violations = derived.validate()
    if violations:
        raise ConfigError(violations)
    return derived


# ---------------------------------------------------------------------------
# Replications and sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    parameter: str  # "cashiers" or "experts"
    values: tuple[int, ...]
    replications: int
    common_random_numbers: bool = True

    def arm_config(self, value: int) -> ScenarioConfig:
        if self.parameter == "cashiers":
            sellers = TOTAL_STAFF_EXPERIMENT - value
            experts = min(1, sellers)
            staffing = Staffing(
                cashiers=value,
                sellers_normal=sellers - experts,
                sellers_expert=experts,
                managers=0,
            )
        elif self.parameter == "experts":
            fixed = self.base.staffing.cashiers + self.base.staffing.managers
            staffing = Staffing(
                cashiers=self.base.staffing.cashiers,
                sellers_normal=TOTAL_STAFF_EXPERIMENT - fixed - value,
                sellers_expert=value,
                managers=self.base.staffing.managers,
            )
        else:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        return with_staffing(self.base, staffing)


@dataclass
class ArmResult:
    value: int
    reports: list[KpiReport]

    def mean(self, kpi: str) -> float:
        values = [_report_kpi(r, kpi) for r in self.reports]
        return sum(values) / len(values)

    def std(self, kpi: str) -> float:
        values = [_report_kpi(r, kpi) for r in self.reports]
        n = len(values)
        if n < 2:
            return 0.0
        m = sum(values) / n
        return math.sqrt(sum((v - m) ** 2 for v in values) / (n - 1))


@dataclass
class ExperimentResult:
    parameter: str
    arms: list[ArmResult]

    def reports(self) -> Iterable[KpiReport]:
        for arm in self.arms:
            yield from arm.reports

    def arm_means(self, kpi: str) -> list[tuple[int, float]]:
        return [(arm.value, arm.mean(kpi)) for arm in self.arms]

    def argmax_arm(self, kpi: str) -> int:
        return max(self.arms, key=lambda arm: arm.mean(kpi)).value


def _report_kpi(report: KpiReport, kpi: str) -> float:
    from .reporting import report_kpi

    return report_kpi(report, kpi)


def run_replication(config: ScenarioConfig, replication_index: int, audit: bool = False) -> KpiReport:
    """Run one deterministic replication; streams derive from
    (config.seed, replication_index)."""
    from .engine import Replication

    return Replication(config, replication_index, audit=audit).run()


def _run_arm_replication(args: tuple[ScenarioConfig, int, int | None]) -> KpiReport:
    config, rep, arm_value = args
    report = run_replication(config, rep)
    report.arm_value = arm_value
    return report


def default_workers() -> int:
    env = os.environ.get("SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def run_sweep(spec: SweepSpec, workers: int | None = None) -> ExperimentResult:
    """Run every (arm, replication) pair; results are ordered by
    (arm, replication) regardless of execution order."""
    if workers is None:
        workers = default_workers()
    jobs: list[tuple[ScenarioConfig, int, int | None]] = []
    for value in spec.values:
        arm_cfg = spec.arm_config(value)
        for rep in range(spec.replications):
            # With common random numbers each arm's replication r uses the
            # same streams; otherwise arms get disjoint replication indices.
            rep_index = rep if spec.common_random_numbers else rep + 1_000_000 * (value + 1)
            jobs.append((arm_cfg, rep_index, value))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_arm_replication, jobs, chunksize=1))
    else:
        reports = [_run_arm_replication(job) for job in jobs]
    arms = []
    for i, value in enumerate(spec.values):
        arm_reports = reports[i * spec.replications : (i + 1) * spec.replications]
        for rep, report in enumerate(arm_reports):
            report.replication = rep
        arms.append(ArmResult(value=value, reports=arm_reports))
    return ExperimentResult(parameter=spec.parameter, arms=arms)


def run_experiment_tills(
    config: ScenarioConfig, replications: int | None = None, workers: int | None = None
) -> ExperimentResult:
    """Vary the number of tills open (cashiers 1..9, sellers fill to 10)."""
    spec = SweepSpec(
        base=config,
        parameter="cashiers",
        values=TILL_SWEEP_VALUES,
        replications=replications or config.replications,
    )
    return run_sweep(spec, workers=workers)


def run_experiment_experts(
    config: ScenarioConfig, replications: int | None = None, workers: int | None = None
) -> ExperimentResult:
    """Vary expert-seller availability (0..4 experts, normal sellers adjust
    to hold ten staff in total)."""
    spec = SweepSpec(
        base=config,
        parameter="experts",
        values=EXPERT_SWEEP_VALUES,
        replications=replications or config.replications,
    )
    return run_sweep(spec, workers=workers)
