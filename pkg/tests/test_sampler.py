import cmath
from fractions import Fraction

import numpy as np
import pytest

from infraperiod.errors import BudgetError, PreconditionError
from infraperiod.experiments import anchor_outside_hbound, instance_1d, instance_2d
from infraperiod.infrastructure import GridSpec, ScaledGrid, interval_infrastructure
from infraperiod.rng import make_rng
from infraperiod.sampler import (
    box_bound,
    build_collision_set,
    build_collision_set_scan,
    certified_ge,
    exact_distribution,
    f_table,
    in_window_targets,
    m_lower,
    nearest_bound_1d,
    prob_of_target,
    rounding_set,
    run_sampling_experiment,
    sample_w,
    sample_w_rejection,
    verify_collision_properties,
)

F = Fraction


@pytest.fixture(scope="module")
def inst1():
    return instance_1d()


@pytest.fixture(scope="module")
def inst2():
    return instance_2d()


@pytest.fixture(scope="module")
def toy():
    infra = interval_infrastructure(40, [0, 13, 27])
    grid = GridSpec.from_shift_index(1, 4, 20, 40, F(1, 20), (7,))
    return infra, grid


def naive_prob(members, w, K, W):
    z = sum(cmath.exp(2j * cmath.pi * sum(a * b for a, b in zip(v, w)) / K) for v in members)
    return abs(z) ** 2 / (len(members) * W)


def test_distribution_against_naive_sum(toy):
    infra, g = toy
    coll = build_collision_set(infra, g, (33,))
    dist = exact_distribution(coll)
    for w in range(0, g.side_w, 7):
        assert dist.prob((w,)) == pytest.approx(naive_prob(coll.members.tolist(), (w,), g.side_w, g.W), abs=1e-12)
    assert abs(dist.total() - 1) < 1e-9


def test_direct_and_factored_agree(inst2):
    g = inst2.grid
    coll = build_collision_set(inst2.infra, g, anchor_outside_hbound(inst2, make_rng(0, "t", 0)))
    a = exact_distribution(coll, "direct")
    b = exact_distribution(coll, "factored")
    assert np.max(np.abs(a.probs - b.probs)) < 1e-12
    assert abs(a.total() - 1) < 2**-30


def test_single_member_is_uniform(toy):
    infra, g = toy
    coll = build_collision_set(infra, g, (1,))
    coll.members = coll.members[:1]
    dist = exact_distribution(coll)
    assert np.allclose(dist.probs, 1 / g.W)


def test_budget_guard(toy):
    infra, g = toy
    coll = build_collision_set(infra, g, (33,))
    with pytest.raises(BudgetError):
        exact_distribution(coll, budget=10)


def test_direct_builder_equals_scan(inst1):
    g, infra = inst1.grid, inst1.infra
    sg = ScaledGrid(infra, g)
    table = f_table(sg)
    for v in range(0, g.side_v, 97):
        a = build_collision_set(infra, g, (v,), sg)
        b = build_collision_set_scan(infra, g, (v,), sg, table)
        assert np.array_equal(a.members, b.members) and a.value == b.value


def test_collision_properties_and_m_lower(inst1):
    g, infra = inst1.grid, inst1.infra
    ml = m_lower(g, F(40), F(20))
    assert ml == F(160, 40) * (1 - F(3, 160 * 32) - F(40, 160))
    coll = build_collision_set(infra, g, anchor_outside_hbound(inst1, make_rng(1, "t", 0)))
    res = verify_collision_properties(infra, g, coll, F(20))
    assert res["i"] and res["ii"] and res["iii"] and res["M"] >= ml


def test_anchor_in_hbound_flagged(inst1):
    g = inst1.grid
    # the grid point just below the corner at 13 lies in Hbound
    v = next(v for v in range(g.side_v) if F(13) - F(1, 32) < g.point((v,))[0] <= 13)
    assert build_collision_set(inst1.infra, g, (v,)).anchor_in_hbound


def test_zero_target_and_first_dual_vector(inst1):
    g, infra = inst1.grid, inst1.infra
    coll = build_collision_set(infra, g, anchor_outside_hbound(inst1, make_rng(2, "t", 0)))
    ml = m_lower(g, F(40), F(20))
    bound = box_bound(g, ml)
    zero = rounding_set([0], g)
    assert zero.R == ((0,), (1,))
    assert certified_ge(prob_of_target(coll, zero), bound)
    first = rounding_set([F(1, 40)], g)
    assert certified_ge(prob_of_target(coll, first), bound)
    near = rounding_set([F(1, 40)], g, "nearest")
    assert certified_ge(prob_of_target(coll, near), nearest_bound_1d(g, ml))


def test_interval_probability_encloses_float(toy):
    infra, g = toy
    coll = build_collision_set(infra, g, (33,))
    dist = exact_distribution(coll)
    t = rounding_set([F(1, 40)], g)
    p = prob_of_target(coll, t, require_window=False)
    val = sum(dist.prob(w) for w in t.R)
    assert float(p.a) - dist.error_bound * 2 <= val <= float(p.b) + dist.error_bound * 2


def test_out_of_window_target_rejected(inst1):
    g = inst1.grid
    coll = build_collision_set(inst1.infra, g, (5,))
    with pytest.raises(PreconditionError):
        prob_of_target(coll, rounding_set([F(1000, 40)], g))


def test_in_window_targets_count(inst1):
    # λ* = j/40 with 0 <= 320 j/40 <= 320·(32/9): j = 0..142
    assert len(in_window_targets(inst1.infra.lattice.dual(), inst1.grid)) == 143


def test_rejection_sampler_matches_distribution(toy):
    infra, g = toy
    coll = build_collision_set(infra, g, (33,))
    dist = exact_distribution(coll)
    rng = make_rng(3, "rej", 0)
    draws = 20000
    counts = np.zeros(g.side_w)
    for _ in range(draws):
        counts[sample_w_rejection(coll, rng, batch=512)[0]] += 1
    # mass on the targets of the first few dual vectors, within 4σ
    targets = {w for j in range(4) for w in rounding_set([F(j, 40)], g).R}
    p = sum(dist.prob(w) for w in targets)
    obs = sum(counts[w[0]] for w in targets) / draws
    assert abs(obs - p) < 4 * np.sqrt(p * (1 - p) / draws)


def test_point_mass_sampling():
    from infraperiod.sampler import FourierDistribution

    g = GridSpec.from_shift_index(1, 1, 2, 1, F(1, 20), (0,))
    probs = np.zeros(g.side_w)
    probs[3] = 1.0
    d = FourierDistribution(g, 1, probs, 0.0)
    rng = make_rng(0, "pm", 0)
    assert {sample_w(d, rng) for _ in range(20)} == {(3,)}


def test_sampling_is_deterministic(inst1):
    a = run_sampling_experiment(inst1.infra, inst1.grid, 3, seed=5)
    b = run_sampling_experiment(inst1.infra, inst1.grid, 3, seed=5)
    assert [r.w for r in a] == [r.w for r in b]
    assert len(a) == 3


def test_schedule_with_n0(inst2):
    g = inst2.grid
    g0 = GridSpec(g.n, g.N, g.q, g.L, g.kappa, g.s, N0=2 * g.N)
    recs = run_sampling_experiment(inst2.infra, g0, 1, seed=1)
    assert len(recs) == 5
    assert [r.grid.N for r in recs] == [g.N] * 2 + [2 * g.N] * 3
