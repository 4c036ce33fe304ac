import math

import pytest

from deptsim import ConfigError, build_config, load_and_validate, preset_config, run_replication
from deptsim.engine import Replication
from deptsim.randomness import Constant
from deptsim.scenario import (
    EXPERT_SWEEP_VALUES,
    TILL_SWEEP_VALUES,
    SweepSpec,
    run_sweep,
)

from conftest import make_scenario


class TestPresets:
    def test_atv_expert_probability_is_ten_percent(self):
        cfg = preset_config("atv")
        assert cfg.population.expert_help_probability == Constant(0.10)

    def test_ww_expert_probability_is_five_percent(self):
        cfg = preset_config("ww")
        assert cfg.population.expert_help_probability == Constant(0.05)

    def test_presets_encode_department_contrast(self):
        atv, ww = preset_config("atv"), preset_config("ww")
        # WW sees more customers; A&TV spends longer serving each one.
        assert atv.interarrival.mean() > ww.interarrival.mean()
        assert atv.service_times[list(atv.service_times)[0]].mean() > ww.service_times[list(ww.service_times)[0]].mean()
        assert atv.population.help_need_probability.value > ww.population.help_need_probability.value

    def test_presets_field_ten_staff(self):
        for name in ("atv", "ww"):
            assert preset_config(name).staffing.total() == 10

    def test_unknown_preset_is_rejected(self):
        with pytest.raises(ConfigError) as exc:
            build_config({"preset": "menswear"})
        assert "unknown preset" in exc.value.violations[0]


class TestValidation:
    def test_negative_cashiers_names_the_field(self, base_mapping):
        base_mapping["staffing"]["cashiers"] = -1
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("staffing.cashiers" in v for v in exc.value.violations)

    def test_empirical_sum_violation_cites_the_table(self, base_mapping):
        base_mapping["customers"]["browse_time"] = {
            "type": "empirical",
            "table": [[1.0, 0.6], [2.0, 0.3]],
        }
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("customers.browse_time" in v and "sum" in v for v in exc.value.violations)

    def test_all_violations_are_reported_not_just_first(self, base_mapping):
        base_mapping["staffing"]["cashiers"] = -1
        base_mapping["weeks"] = 0
        base_mapping["customers"]["help_need_probability"] = {"type": "constant", "value": 1.5}
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert len(exc.value.violations) >= 3

    def test_unknown_top_level_key_is_an_error(self, base_mapping):
        base_mapping["coffee"] = True
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("unknown keys" in v and "coffee" in v for v in exc.value.violations)

    def test_unknown_nested_key_is_an_error(self, base_mapping):
        base_mapping["staffing"]["baristas"] = 2
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("staffing" in v and "baristas" in v for v in exc.value.violations)

    def test_probability_outside_unit_interval_is_rejected(self, base_mapping):
        base_mapping["customers"]["purchase_probability"] = {"type": "triangular", "min": 0.5, "mode": 0.9, "max": 1.2}
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("purchase_probability" in v for v in exc.value.violations)

    def test_zero_staff_total_is_rejected(self, base_mapping):
        base_mapping["staffing"] = {"cashiers": 0, "sellers_normal": 0, "sellers_expert": 0, "managers": 0}
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("total staff" in v for v in exc.value.violations)

    def test_infinite_wait_without_capable_staff_is_rejected(self, base_mapping):
        base_mapping["staffing"] = {"cashiers": 0, "sellers_normal": 1, "sellers_expert": 0, "managers": 0}
        base_mapping["customers"]["till_patience"] = {"type": "constant", "value": ".inf"}
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("till requests can wait forever" in v for v in exc.value.violations)

    def test_yaml_file_round_trip(self, base_mapping, tmp_path):
        import yaml

        path = tmp_path / "scenario.yaml"
        path.write_text(yaml.safe_dump(base_mapping))
        cfg = load_and_validate(path)
        assert cfg.seed == base_mapping["seed"]
        assert cfg.staffing.cashiers == base_mapping["staffing"]["cashiers"]


class TestReplication:
    def test_same_config_and_index_reproduce_exactly(self):
        cfg = make_scenario()
        assert run_replication(cfg, 1) == run_replication(cfg, 1)

    def test_replay_reproduces_the_transition_trace_bit_for_bit(self):
        cfg = make_scenario()
        a = Replication(cfg, 1, audit=True)
        report_a = a.run()
        b = Replication(cfg, 1, audit=True)
        report_b = b.run()
        assert a.transition_log == b.transition_log
        assert report_a == report_b

    def test_different_replication_indices_differ(self):
        cfg = make_scenario()
        assert run_replication(cfg, 0) != run_replication(cfg, 1)

    def test_different_seeds_differ(self):
        a = make_scenario(seed=1)
        b = make_scenario(seed=2)
        assert run_replication(a, 0) != run_replication(b, 0)

    def test_no_arrival_sentinel_yields_empty_report(self):
        cfg = make_scenario(arrivals={"interarrival": {"type": "constant", "value": ".inf"}})
        report = run_replication(cfg, 0)
        assert report.customers_arrived == 0 and report.transactions == 0

    def test_arrivals_stop_at_closing_time(self):
        cfg = make_scenario(weeks=1, days_per_week=1, hours_per_day=2)
        rep = Replication(cfg, 0)
        rep.run()
        assert all(t <= 120.0 for t in rep.arrival_times)


class TestSweepArms:
    def test_till_arms_hold_ten_staff(self):
        cfg = preset_config("atv")
        spec = SweepSpec(cfg, "cashiers", TILL_SWEEP_VALUES, replications=1)
        for value in spec.values:
            staffing = spec.arm_config(value).staffing
            assert staffing.cashiers == value
            assert staffing.total() == 10
            assert staffing.managers == 0
            assert staffing.sellers_normal + staffing.sellers_expert == 10 - value

    def test_till_arm_extremes(self):
        cfg = preset_config("atv")
        spec = SweepSpec(cfg, "cashiers", TILL_SWEEP_VALUES, replications=1)
        one = spec.arm_config(1).staffing
        nine = spec.arm_config(9).staffing
        assert one.sellers_normal + one.sellers_expert == 9
        assert nine.sellers_normal + nine.sellers_expert == 1
        assert nine.sellers_expert == 1  # lone seller keeps expert coverage

    def test_expert_arms_adjust_normal_sellers(self):
        cfg = preset_config("atv")
        spec = SweepSpec(cfg, "experts", EXPERT_SWEEP_VALUES, replications=1)
        for value in spec.values:
            staffing = spec.arm_config(value).staffing
            assert staffing.sellers_expert == value
            assert staffing.total() == 10
            assert staffing.cashiers == cfg.staffing.cashiers
            assert staffing.managers == cfg.staffing.managers

    def test_unknown_parameter_is_rejected(self):
        cfg = preset_config("atv")
        spec = SweepSpec(cfg, "managers", (1, 2), replications=1)
        with pytest.raises(ValueError):
            spec.arm_config(1)


class TestCommonRandomNumbers:
    def test_customer_attributes_identical_across_arms(self):
        # Same replication index in two different staffing arms: every
        # customer's sampled attribute vector must match exactly.
        cfg = make_scenario(
            weeks=1,
            customers={
                "help_patience": {"type": "triangular", "min": 1.0, "mode": 4.0, "max": 9.0},
                "till_patience": {"type": "triangular", "min": 1.0, "mode": 3.0, "max": 7.0},
            },
        )
        spec = SweepSpec(cfg, "cashiers", (2, 7), replications=1)
        rep_a = Replication(spec.arm_config(2), 0, audit=True)
        rep_a.run()
        rep_b = Replication(spec.arm_config(7), 0, audit=True)
        rep_b.run()
        assert rep_a.spawned_attributes == rep_b.spawned_attributes
        assert rep_a.arrival_times == rep_b.arrival_times

    def test_editing_one_arm_leaves_other_arms_bit_identical(self):
        # An arm's event trace must not depend on which other arms exist.
        cfg = make_scenario(weeks=1)
        spec = SweepSpec(cfg, "cashiers", (3,), replications=2)
        alone = run_sweep(spec)
        wider = run_sweep(SweepSpec(cfg, "cashiers", (1, 3, 8), replications=2))
        arm3_alone = alone.arms[0]
        arm3_wider = next(arm for arm in wider.arms if arm.value == 3)
        for a, b in zip(arm3_alone.reports, arm3_wider.reports):
            a_dict = dict(vars(a))
            b_dict = dict(vars(b))
            a_dict.pop("arm_value"), b_dict.pop("arm_value")
            assert a_dict == b_dict


class TestScalingSanity:
    def test_halving_post_warmup_length_roughly_halves_transactions(self):
        long_cfg = make_scenario(weeks=5, warmup_weeks=1, days_per_week=6, hours_per_day=9,
                                 arrivals={"interarrival": {"type": "exponential", "rate": 1.0}})
        short_cfg = make_scenario(weeks=3, warmup_weeks=1, days_per_week=6, hours_per_day=9,
                                  arrivals={"interarrival": {"type": "exponential", "rate": 1.0}})
        long_tx = sum(run_replication(long_cfg, i).transactions for i in range(3)) / 3
        short_tx = sum(run_replication(short_cfg, i).transactions for i in range(3)) / 3
        assert short_tx * 2 == pytest.approx(long_tx, rel=0.10)


class TestWarmup:
    def test_warmup_arrivals_are_excluded(self):
        with_warmup = make_scenario(weeks=2, warmup_weeks=1)
        without = make_scenario(weeks=2, warmup_weeks=0)
        r_with = run_replication(with_warmup, 0)
        r_without = run_replication(without, 0)
        assert r_with.customers_arrived < r_without.customers_arrived
        assert math.isclose(
            r_without.customers_arrived - r_with.customers_arrived,
            r_without.weekly["arrivals"][0],
        )


class TestStaffSelectionEnumeration:
    def test_default_rule_is_named(self):
        cfg = make_scenario()
        assert cfg.staff_selection == "least_qualified_first"

    def test_unknown_rule_is_rejected(self, base_mapping):
        base_mapping["staff_selection"] = "coin_flip"
        with pytest.raises(ConfigError) as exc:
            build_config(base_mapping)
        assert any("staff_selection" in v for v in exc.value.violations)
