"""Agent-based discrete-event simulator of a retail department floor.

Customers, multi-skill staff, and a service-matching queue system, with an
experiment harness for staffing-mix sweeps and a weighted customer
satisfaction service level index.
"""

from .agents import (
    CustomerAgent,
    CustomerState,
    DepartureOutcome,
    PopulationAttributes,
    RequestKind,
    StaffAgent,
    StaffRole,
    qualified,
)
from .engine import AuditError, Replication
from .kernel import Event, EventKind, EventQueue, SimulationBugError
from .metrics import (
    KpiReport,
    SatisfactionEventKind,
    SatisfactionLedger,
    SatisfactionWeights,
    service_level_index,
)
from .queuing import QueueRule, ServiceSystem, select_staff
from .randomness import Constant, Empirical, Exponential, RngStream, Triangular
from .scenario import (
    ConfigError,
    ExperimentResult,
    ScenarioConfig,
    Staffing,
    SweepSpec,
    build_config,
    load_and_validate,
    preset_config,
    run_experiment_experts,
    run_experiment_tills,
    run_replication,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AuditError",
    "ConfigError",
    "Constant",
    "CustomerAgent",
    "CustomerState",
    "DepartureOutcome",
    "Empirical",
    "Event",
    "EventKind",
    "EventQueue",
    "ExperimentResult",
    "Exponential",
    "KpiReport",
    "PopulationAttributes",
    "QueueRule",
    "Replication",
    "RequestKind",
    "RngStream",
    "SatisfactionEventKind",
    "SatisfactionLedger",
    "SatisfactionWeights",
    "ScenarioConfig",
    "ServiceSystem",
    "SimulationBugError",
    "StaffAgent",
    "StaffRole",
    "Staffing",
    "SweepSpec",
    "Triangular",
    "build_config",
    "load_and_validate",
    "preset_config",
    "qualified",
    "run_experiment_experts",
    "run_experiment_tills",
    "run_replication",
    "run_sweep",
    "select_staff",
    "service_level_index",
    "__version__",
]
