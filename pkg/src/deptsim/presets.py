"""Shipped department presets.

Two departments with opposite characters: Audio & TV is low-traffic but
service-heavy (long advice conversations, 10% of help requests need an
expert), WomensWear is high-traffic with quick service (5% expert requests)
and a larger share of straight-to-till purchases. The numeric rates and times
are working calibrations, not measured ground truth; every value can be
overridden from a scenario file.
"""

from __future__ import annotations

import copy
from typing import Any

PRESETS: dict[str, dict[str, Any]] = {
    "atv": {
        "seed": 42,
        "weeks": 10,
        "warmup_weeks": 1,
        "replications": 20,
        "days_per_week": 6,
        "hours_per_day": 9,
        "queue_rule": "fifo",
        "staffing": {"cashiers": 2, "sellers_normal": 5, "sellers_expert": 1, "managers": 2},
        "arrivals": {"interarrival": {"type": "exponential", "rate": 0.25}},
        "service_times": {
            "till": {"type": "triangular", "min": 1.0, "mode": 2.0, "max": 4.0},
            "help_normal": {"type": "triangular", "min": 3.0, "mode": 8.0, "max": 20.0},
            "help_expert": {"type": "triangular", "min": 3.0, "mode": 8.0, "max": 20.0},
        },
        "customers": {
            "browse_time": {"type": "triangular", "min": 2.0, "mode": 6.0, "max": 15.0},
            "help_need_probability": {"type": "constant", "value": 0.6},
            "expert_help_probability": {"type": "constant", "value": 0.10},
            "purchase_probability": {"type": "constant", "value": 0.45},
            "to_till_after_help_probability": {"type": "constant", "value": 0.7},
            "help_patience": {"type": "triangular", "min": 2.0, "mode": 5.0, "max": 15.0},
            "till_patience": {"type": "triangular", "min": 1.0, "mode": 4.0, "max": 10.0},
        },
        "weights": {
            "served_immediately": 2.0,
            "served_after_wait": 1.0,
            "help_abandoned": -2.0,
            "till_abandoned": -3.0,
            "purchase_completed": 2.0,
            "left_without_purchase": 0.0,
        },
    },
    "ww": {
        "seed": 42,
        "weeks": 10,
        "warmup_weeks": 1,
        "replications": 20,
        "days_per_week": 6,
        "hours_per_day": 9,
        "queue_rule": "fifo",
        "staffing": {"cashiers": 3, "sellers_normal": 4, "sellers_expert": 1, "managers": 2},
        "arrivals": {"interarrival": {"type": "exponential", "rate": 0.6666666666666666}},
        "service_times": {
            "till": {"type": "triangular", "min": 0.5, "mode": 1.5, "max": 3.0},
            "help_normal": {"type": "triangular", "min": 1.0, "mode": 3.0, "max": 8.0},
            "help_expert": {"type": "triangular", "min": 1.0, "mode": 3.0, "max": 8.0},
        },
        "customers": {
            "browse_time": {"type": "triangular", "min": 1.0, "mode": 3.0, "max": 8.0},
            "help_need_probability": {"type": "constant", "value": 0.25},
            "expert_help_probability": {"type": "constant", "value": 0.05},
            "purchase_probability": {"type": "constant", "value": 0.7},
            "to_till_after_help_probability": {"type": "constant", "value": 0.7},
            "help_patience": {"type": "triangular", "min": 2.0, "mode": 5.0, "max": 12.0},
            "till_patience": {"type": "triangular", "min": 1.0, "mode": 3.0, "max": 8.0},
        },
        "weights": {
            "served_immediately": 2.0,
            "served_after_wait": 1.0,
            "help_abandoned": -2.0,
            "till_abandoned": -3.0,
            "purchase_completed": 2.0,
            "left_without_purchase": 0.0,
        },
    },
}

PRESET_DISPLAY_NAMES = {"atv": "Audio & TV", "ww": "WomensWear"}


def preset_mapping(name: str) -> dict[str, Any]:
    """Deep copy of a preset's raw mapping, ready for overriding."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
