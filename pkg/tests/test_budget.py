import json

import pytest
from hypothesis import given, settings, strategies as st

from gmixcurve.budget import (
    BudgetError, BudgetPlan, cost, plan_from_dict, sub_budgets, terminal_index, validate_plan,
)


def test_cost_value():
    assert cost(1, 256, 0.5) == pytest.approx(2**-0.5 * 16)


def test_reference_plan():
    plan = sub_budgets(256, 0.5, 3)
    assert plan.m_star == 8
    assert plan.sequence() == [11, 8, 5, 5, 4, 4, 4, 4]
    assert plan.spend() == 45


def test_validator_accepts_generated_plan():
    assert validate_plan(sub_budgets(1024, 0.5, 3)) == (True, "ok")


def test_validator_rejects_increase():
    bad = BudgetPlan(256, 0.5, 3, 8, ((0, 11), (1, 8), (2, 5), (3, 6)))
    ok, why = validate_plan(bad)
    assert not ok and why.startswith("monotonicity")


def test_validator_rejects_overspend():
    # eight entries summing to N + 1
    bad = BudgetPlan(18, 0.5, 1, 8, ((0, 7), (1, 4), (2, 2), (3, 1)))
    assert bad.spend() == 19
    ok, why = validate_plan(bad)
    assert not ok and why == "overspend"


def test_too_small_budget():
    with pytest.raises(BudgetError):
        sub_budgets(10, 0.5, 3)
    with pytest.raises(BudgetError):
        sub_budgets(256, 1.0, 3)
    with pytest.raises(BudgetError):
        cost(0, 256, 0.5)


def test_round_trip():
    plan = sub_budgets(4096, 0.5, 3)
    assert plan_from_dict(json.loads(plan.to_json())) == plan


@settings(deadline=None)
@given(st.integers(18, 10**7), st.floats(0.2, 0.8), st.integers(1, 6))
def test_plan_invariants(N, beta, n0):
    try:
        plan = sub_budgets(N, beta, n0)
    except BudgetError:
        assert (1 - beta) * N / n0 ** (1 / beta) < 1
        return
    ok, why = validate_plan(plan)
    assert ok, why
    m = plan.m_star
    assert m & (m - 1) == 0 and 2 * m > (1 - beta) * N / n0 ** (1 / beta)
    assert terminal_index(N, beta, n0) == m


@settings(deadline=None)
@given(st.integers(64, 10**6))
def test_doubling_budget_never_shrinks(N):
    a, b = sub_budgets(N), sub_budgets(2 * N)
    assert b.m_star >= a.m_star
    assert all(y >= x for x, y in zip(a.sequence(), b.sequence()))
