import math

import numpy as np
import pytest
from scipy import stats

from dynup.batch import run_batch
from dynup.oracle import (
    DpTablePolicy,
    dp_optimal_value,
    dp_policy_value,
    enumerate_hindsight_bound,
    offer_value_lipschitz,
)
from dynup.policy import Decision, DecisionKind, DynUp2Policy
from dynup.sim import RngStream
from tests.conftest import make_instance


class RejectEverything:
    name = "reject"

    def decision_at(self, t, c1, c2, arrival):
        return Decision(DecisionKind.REJECT)


class TestOptimalValue:
    def test_single_period_hand_value(self):
        inst = make_instance(1, (1, 1), (0.4, 0.2), curve_a=1.0)
        table = dp_optimal_value(inst, grid_step=0.005)
        expect = 0.4 * (1.0 + math.exp(-1)) + 0.2 * 2.0
        assert table.optimal_value == pytest.approx(expect, abs=1e-12)

    def test_zero_capacity(self):
        inst = make_instance(8, (0, 0), (0.4, 0.2))
        table = dp_optimal_value(inst)
        assert np.all(table.values == 0.0)

    def test_premium_only_matches_binomial(self):
        # With no basic demand the value is r2 * E[min(Binomial, c2)].
        T, c2, lam2 = 30, 4, 0.2
        inst = make_instance(T, (3, c2), (0.0, lam2))
        table = dp_optimal_value(inst)
        k = np.arange(T + 1)
        pmf = stats.binom.pmf(k, T, lam2)
        expect = 2.0 * float(np.sum(pmf * np.minimum(k, c2)))
        assert table.optimal_value == pytest.approx(expect, abs=1e-9)

    def test_monotone_in_stock_and_time(self, small_instance):
        table = dp_optimal_value(small_instance)
        v = table.values[1:]
        assert np.all(np.diff(v, axis=1) >= -1e-9)
        assert np.all(np.diff(v, axis=2) >= -1e-9)
        assert np.all(np.diff(v, axis=0) <= 1e-9)

    def test_state_budget_guard(self):
        inst = make_instance(400, (300, 300), (0.3, 0.2))
        with pytest.raises(ValueError):
            dp_optimal_value(inst)


class TestPolicyValue:
    def test_reject_everything_scores_zero(self, small_instance):
        assert dp_policy_value(small_instance, RejectEverything()) == 0.0

    def test_single_period_dynamic_matches_optimum(self):
        inst = make_instance(1, (1, 1), (0.4, 0.2), curve_a=1.0)
        table = dp_optimal_value(inst, grid_step=0.005)
        val = dp_policy_value(inst, DynUp2Policy(inst))
        assert val == pytest.approx(table.optimal_value, abs=1e-12)

    def test_table_policy_replays_exactly(self, small_instance):
        table = dp_optimal_value(small_instance, grid_step=0.005)
        val = dp_policy_value(small_instance, DpTablePolicy(small_instance, table))
        assert val == pytest.approx(table.optimal_value, abs=1e-9)

    def test_monte_carlo_agreement(self, small_instance):
        exact = dp_policy_value(small_instance, DynUp2Policy(small_instance))
        res = run_batch(small_instance, DynUp2Policy(small_instance), 50000, base_seed=8)
        se = res.revenue.std(ddof=1) / math.sqrt(len(res.revenue))
        assert abs(res.revenue.mean() - exact) <= 3 * se


class TestHindsightBound:
    def test_premium_only_uncapped(self):
        T, lam2 = 20, 0.3
        inst = make_instance(T, (2, 25), (0.0, lam2))
        assert enumerate_hindsight_bound(inst) == pytest.approx(lam2 * T * 2.0, abs=1e-9)

    def test_dominates_optimum(self, small_instance):
        table = dp_optimal_value(small_instance)
        assert enumerate_hindsight_bound(small_instance) >= table.optimal_value - 1e-9

    def test_monte_carlo_self_consistency(self, small_instance):
        from dynup.hybrid import upper_hp_values_vec

        exact = enumerate_hindsight_bound(small_instance)
        res = run_batch(small_instance, DynUp2Policy(small_instance), 50000, base_seed=14)
        vals = upper_hp_values_vec(
            res.counts[:, 0].astype(float),
            res.counts[:, 1].astype(float),
            8, 7, 1.0, 2.0, small_instance.curves[0],
        )
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - exact) <= 3 * se


class TestRandomizedDominance:
    def test_sandwich_on_random_instances(self):
        rng = RngStream(seed=41, stream=0).generator()
        for _ in range(15):
            T = int(rng.integers(5, 40))
            lam1 = rng.uniform(0.1, 0.7)
            lam2 = rng.uniform(0.02, min(0.5, 1 - lam1, 15.0 / T))
            c2 = int(rng.integers(math.floor(lam2 * T) + 1, 16))
            c1 = int(rng.integers(1, 16))
            inst = make_instance(T, (c1, c2), (lam1, lam2),
                                 curve_a=float(rng.uniform(0.6, 3.5)))
            table = dp_optimal_value(inst, grid_step=0.005)
            bound = enumerate_hindsight_bound(inst)
            policy_val = dp_policy_value(inst, DynUp2Policy(inst))
            slack = offer_value_lipschitz(inst) * 0.005 * T / 2
            assert bound >= table.optimal_value - 1e-9
            assert table.optimal_value >= policy_val - slack


def test_table_dump_round_trips(tmp_path, small_instance):
    from dynup.oracle import dump_table_csv

    table = dp_optimal_value(small_instance, grid_step=0.01)
    path = tmp_path / "table.csv"
    dump_table_csv(table, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# schema: dynup.dptable.v1")
    assert lines[1] == "t,c1,c2,value,basic_action,premium_action"
    T, (ca, cb) = small_instance.horizon, small_instance.capacities
    assert len(lines) == 2 + T * (ca + 1) * (cb + 1)
    # The root state's value appears verbatim.
    root = next(l for l in lines if l.startswith(f"1,{ca},{cb},"))
    assert float(root.split(",")[3]) == pytest.approx(table.optimal_value, rel=1e-8)


def test_grid_refinement_within_slack(small_instance):
    coarse = dp_optimal_value(small_instance, grid_step=0.01).optimal_value
    fine = dp_optimal_value(small_instance, grid_step=0.001).optimal_value
    assert fine >= coarse - 1e-9
    slack = offer_value_lipschitz(small_instance) * 0.01 * small_instance.horizon / 2
    assert fine - coarse <= slack
