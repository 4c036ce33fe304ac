from __future__ import annotations

import copy
from typing import Any

import pytest

from deptsim import build_config
from deptsim.scenario import ScenarioConfig

# A deliberately small but fully specified scenario; tests override pieces.
BASE_MAPPING: dict[str, Any] = {
    "seed": 7,
    "weeks": 2,
    "warmup_weeks": 0,
    "replications": 2,
    "days_per_week": 2,
    "hours_per_day": 4,
    "queue_rule": "fifo",
    "staffing": {"cashiers": 1, "sellers_normal": 1, "sellers_expert": 1, "managers": 0},
    "arrivals": {"interarrival": {"type": "exponential", "rate": 0.5}},
    "service_times": {
        "till": {"type": "exponential", "rate": 1.0},
        "help_normal": {"type": "exponential", "rate": 0.5},
        "help_expert": {"type": "exponential", "rate": 0.5},
    },
    "customers": {
        "browse_time": {"type": "constant", "value": 1.0},
        "help_need_probability": {"type": "constant", "value": 0.3},
        "expert_help_probability": {"type": "constant", "value": 0.1},
        "purchase_probability": {"type": "constant", "value": 0.6},
        "to_till_after_help_probability": {"type": "constant", "value": 0.7},
        "help_patience": {"type": "constant", "value": 5.0},
        "till_patience": {"type": "constant", "value": 5.0},
    },
    "weights": {
        "served_immediately": 2.0,
        "served_after_wait": 1.0,
        "help_abandoned": -2.0,
        "till_abandoned": -3.0,
        "purchase_completed": 2.0,
        "left_without_purchase": 0.0,
    },
}


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        # Distribution mappings (anything carrying a "type") replace wholesale.
        if isinstance(value, dict) and isinstance(out.get(key), dict) and "type" not in value:
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def make_scenario(**overrides: Any) -> ScenarioConfig:
    """BASE_MAPPING with nested overrides, built and validated."""
    return build_config(deep_merge(BASE_MAPPING, overrides))


@pytest.fixture
def base_mapping() -> dict[str, Any]:
    return copy.deepcopy(BASE_MAPPING)
