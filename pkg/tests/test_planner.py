from fractions import Fraction

import pytest

from infraperiod.errors import ConfigError, PreconditionError
from infraperiod.experiments import infra_1d, infra_2d, planner_input_for, suite_formulas
from infraperiod.planner import (
    C_FLOOR,
    COMPETITOR_TABLE,
    SUCCESS_TABLE,
    PlannedParameters,
    PlannerInput,
    c_constant_lower,
    c_for,
    competitor_bound,
    iteration_tables,
    joint_probability_audit,
    plan,
    plan_table,
    product_tables,
    recheck,
    success_lower_bound,
)

F = Fraction


def test_input_validation():
    with pytest.raises(ConfigError):
        PlannerInput(1, 1, 2, 1, 1, 1, 1)
    with pytest.raises(ConfigError):
        PlannerInput(0, 1, 1, 1, 1, 1, 1)
    with pytest.raises(ConfigError):
        PlannerInput(1, 1, 1, 1, 1, 0, 1)
    inp = PlannerInput(2, 3, F(1, 2), 1, 10, 100, 1)
    assert PlannerInput.from_json(inp.to_json()) == inp


def test_desk_plans():
    p1 = plan(planner_input_for(infra_1d()), "desk", N_min=32, q_min=160)
    assert (p1.N, p1.q, p1.L, p1.kappa) == (32, 160, 708, F(1, 9))
    assert p1.all_required_ok()
    p2 = plan(planner_input_for(infra_2d()), "desk", N_min=4, q_min=32)
    assert (p2.N, p2.q, p2.L, p2.kappa) == (4, 32, 16200, F(1, 18))
    assert p2.all_required_ok() and "(II)" in p2.failing()
    assert "kappa=1/18" in plan_table(p2)


def test_desk_kappa_respects_v():
    # with qN small, 1/(9n) breaks (V) and a smaller unit fraction is taken
    p = plan(PlannerInput(2, 1, 1, 1, 10, 100, 1, nu=1), "desk", N_min=1, q_min=5)
    assert p.kappa < F(1, 16) - F(1, 8 * p.q * p.N)


def test_theorem_plan_one_dim():
    p = plan(PlannerInput(1, 1, 1, 1, 40, 40, 1))
    assert (p.N, p.q, p.kappa) == (32, 631087408, F(1, 9))
    assert p.all_required_ok()
    assert all(recheck(PlannerInput(1, 1, 1, 1, 40, 40, 1), p).values())


def test_theorem_plan_gamma_ten():
    inp = planner_input_for(infra_1d(), 10)
    p = plan(inp)
    assert (p.q, p.L) == (63108741, 252435032)
    assert all(recheck(inp, p).values())


def test_theorem_plan_two_dim():
    inp = PlannerInput(2, 1, 1, 1, 10, 100, 1)
    p = plan(inp)
    assert p.kappa == F(1, 18) and p.N0 == 8 * 4 * 3 * p.N
    assert p.all_required_ok() and all(recheck(inp, p).values())


def test_recheck_catches_undersized_q():
    inp = PlannerInput(1, 1, 1, 1, 40, 40, 1)
    p = plan(inp)
    bad = PlannedParameters(p.n, p.N, p.N0, p.q // 2, p.L, p.kappa, p.mode, p.ledger, p.required)
    assert not recheck(inp, bad)["q_rec"]


def test_unknown_mode():
    with pytest.raises(ConfigError):
        plan(PlannerInput(1, 1, 1, 1, 40, 40, 1), "fast")


def test_tables():
    assert [r["ours"] for r in iteration_tables(10)] == list(SUCCESS_TABLE)
    assert [r["competitor"] for r in iteration_tables(10)] == list(COMPETITOR_TABLE)
    assert all(r["simplified_ok"] for r in iteration_tables(10))
    rows = product_tables(3)
    assert [round(r["span_product"], 3) for r in rows] == [1.0, 0.5, 0.375]


def test_improvement_over_competitor():
    for n in range(2, 6):
        cb = competitor_bound(n)
        assert cb.ratio >= cb.improvement_floor


def test_cosine_constant():
    c = c_constant_lower()
    assert C_FLOOR <= c < F(7464, 10**6)
    assert c_for(32, 32, 1, F(1, 9)) >= c
    with pytest.raises(PreconditionError):
        c_for(32, 32, 1, F(1, 8))


def test_success_bound_one_dim():
    sb = success_lower_bound(1)
    assert sb.exact >= sb.simplified == F(7163, 10**12)
    with pytest.raises(PreconditionError):
        success_lower_bound(0)


def test_formula_suite_passes():
    assert all(c.passed for c in suite_formulas())


def test_audit_factors():
    p = plan(planner_input_for(infra_1d(), 10))
    audit = joint_probability_audit(p, {"shift": (9, 10), "anchor": (5, 10), "generation": (1, 2)}, F(40))
    by = {a.name: a for a in audit}
    assert by["shift"].ok and not by["anchor"].ok and by["generation"].ok
    assert by["anchor"].bound == F(7, 8)
    with pytest.raises(PreconditionError):
        joint_probability_audit(plan(PlannerInput(2, 1, 1, 1, 10, 100, 1)), {"hit": (1, 1)}, F(100))
