import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utscale import scaling
from utscale.allocator import (
    AllocationPlan,
    equal_allocate,
    evaluate_allocation,
    greedy_allocate,
    marginal_gain,
    q,
)
from utscale.demo import DemoParams, generate


def test_q_single_attempt():
    assert q(0.5, 1) == 0.5


def test_q_zero_budget():
    for lam in (0.0, 0.3, 1.0):
        assert q(lam, 0) == 0.0


def test_q_worked_example():
    assert q(0.2, 3) == pytest.approx(1 - 0.8 ** 3, abs=1e-12)  # 0.488


def test_q_edges():
    assert q(0.0, 100) == 0.0
    assert q(1.0, 1) == 1.0


def test_q_rejects_bad_lambda():
    with pytest.raises(ValueError):
        q(1.5, 1)
    with pytest.raises(ValueError):
        q(-0.1, 1)


def test_q_stable_for_tiny_lambda():
    # log1p-based: must match the reference expression to full precision
    reference = 1 - math.exp(10 ** 6 * math.log1p(-1e-12))
    assert abs(q(1e-12, 10 ** 6) - reference) < 1e-12
    assert q(1e-12, 10 ** 6) > 0


def test_marginal_gain_is_difference_of_q():
    for lam in (0.1, 0.5, 0.9):
        for b in range(6):
            assert marginal_gain(lam, b) == pytest.approx(q(lam, b + 1) - q(lam, b), abs=1e-12)


def test_marginal_gains_strictly_decreasing():
    for lam in np.linspace(0.05, 0.95, 19):
        gains = [marginal_gain(float(lam), b) for b in range(12)]
        assert all(a > b for a, b in zip(gains, gains[1:]))


def test_greedy_worked_example():
    # brute-force table: (0,3) -> 0.875, (1,2) -> 0.85, (2,1) -> 0.69, (3,0) -> 0.271
    plan = greedy_allocate({"p1": 0.1, "p2": 0.5}, 3)
    assert plan.budgets == {"p1": 0, "p2": 3}
    assert plan.total_reward() == pytest.approx(0.875, abs=1e-12)
    table = {
        (0, 3): q(0.1, 0) + q(0.5, 3),
        (1, 2): q(0.1, 1) + q(0.5, 2),
        (2, 1): q(0.1, 2) + q(0.5, 1),
        (3, 0): q(0.1, 3) + q(0.5, 0),
    }
    assert table[(0, 3)] == pytest.approx(0.875, abs=1e-12)
    assert table[(1, 2)] == pytest.approx(0.85, abs=1e-12)
    assert table[(2, 1)] == pytest.approx(0.69, abs=1e-12)
    assert table[(3, 0)] == pytest.approx(0.271, abs=1e-12)
    assert plan.total_reward() == pytest.approx(max(table.values()), abs=1e-12)


def test_greedy_zero_budget():
    plan = greedy_allocate({"a": 0.4, "b": 0.6}, 0)
    assert plan.budgets == {"a": 0, "b": 0}
    assert plan.total == 0


def test_greedy_identical_lambdas_round_robin():
    plan = greedy_allocate({"a": 0.5, "b": 0.5, "c": 0.5}, 3)
    assert plan.budgets == {"a": 1, "b": 1, "c": 1}


def test_greedy_starves_zero_rate_problems():
    plan = greedy_allocate({"dead": 0.0, "alive": 0.5}, 5)
    assert plan.budgets == {"dead": 0, "alive": 5}


def test_greedy_saturates_certain_problems():
    # lam=1 yields its whole reward with the first unit
    plan = greedy_allocate({"sure": 1.0, "hard": 0.4}, 4)
    assert plan.budgets["sure"] == 1
    assert plan.budgets["hard"] == 3


def test_greedy_rejects_bad_input():
    with pytest.raises(ValueError):
        greedy_allocate({"a": 1.2}, 1)
    with pytest.raises(ValueError):
        greedy_allocate({}, 1)
    with pytest.raises(ValueError):
        greedy_allocate({"a": 0.5}, -1)


def test_equal_allocation_division():
    plan = equal_allocate(["a", "b", "c", "d"], 10)
    assert list(plan.budgets.values()) == [3, 3, 2, 2]


def test_equal_allocation_edges():
    assert list(equal_allocate(["a", "b"], 0).budgets.values()) == [0, 0]
    assert equal_allocate(["only"], 7).budgets == {"only": 7}
    with pytest.raises(ValueError):
        equal_allocate([], 3)


def _enumerate_optimum(lams: list[float], budget: int) -> float:
    best = -1.0
    for split in itertools.product(range(budget + 1), repeat=len(lams)):
        if sum(split) != budget:
            continue
        best = max(best, sum(q(lam, b) for lam, b in zip(lams, split)))
    return best


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=3), st.integers(0, 6))
def test_greedy_matches_enumeration_spot(lam_grid_idx, budget):
    lams = [round(i * 0.05, 2) for i in lam_grid_idx]
    plan = greedy_allocate({f"p{k}": lam for k, lam in enumerate(lams)}, budget)
    assert sum(plan.budgets.values()) == budget
    assert plan.total_reward() == pytest.approx(_enumerate_optimum(lams, budget), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=6),
       st.integers(0, 30))
def test_budgets_always_sum_to_total(lams, budget):
    plan = greedy_allocate({f"p{k}": lam for k, lam in enumerate(lams)}, budget)
    assert sum(plan.budgets.values()) == budget
    assert all(b >= 0 for b in plan.budgets.values())


def test_plan_json_roundtrip(tmp_path):
    plan = greedy_allocate({"a": 0.25, "b": 0.5}, 4, strategy="greedy_gold")
    plan.save(tmp_path / "plan.json")
    import json

    obj = json.loads((tmp_path / "plan.json").read_text())
    assert obj == plan.to_json()
    assert obj["strategy"] == "greedy_gold"
    assert sum(obj["budgets"].values()) == 4


def test_evaluate_allocation_matches_grid_point_when_uniform():
    data = generate(DemoParams(seed=5, n_problems=6, n_solutions=4, n_tests=3))
    m = 3
    plan = AllocationPlan(strategy="equal", total=m * 6,
                          budgets={pid: m for pid in data.matrices},
                          lambdas_used=data.lambdas)
    got = evaluate_allocation(plan, data.matrices, data.gold_labels, seed=3, samples=50, n=4)
    want = scaling.best_of_n_accuracy(data.matrices, data.gold_labels, n=4, m=m,
                                      seed=3, samples=50)
    assert got == want


def test_evaluate_allocation_rejects_missing_budget():
    data = generate(DemoParams(seed=5, n_problems=3, n_solutions=3, n_tests=3))
    plan = AllocationPlan(strategy="equal", total=0, budgets={}, lambdas_used={})
    with pytest.raises(ValueError, match="lacks budgets"):
        evaluate_allocation(plan, data.matrices, data.gold_labels, seed=1)


def test_zero_budget_matches_baseline_tie_rule():
    data = generate(DemoParams(seed=9, n_problems=5, n_solutions=4, n_tests=3))
    plan = AllocationPlan(strategy="equal", total=0,
                          budgets={pid: 0 for pid in data.matrices},
                          lambdas_used={})
    got = evaluate_allocation(plan, data.matrices, data.gold_labels, seed=2, samples=80, n=4)
    want = scaling.best_of_n_accuracy(data.matrices, data.gold_labels, n=4, m=0,
                                      seed=2, samples=80)
    assert got == want
