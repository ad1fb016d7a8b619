from fractions import Fraction

import mpmath
import numpy as np
import pytest

from infraperiod.generation import (
    ZETA_HAT_LOWER,
    WindowSample,
    abelian_groups_up_to,
    exact_generation_probability,
    full_generation_trial,
    generates_group,
    generates_lattice,
    generates_lattice_hnf,
    generation_window_ok,
    group_generation_trial,
    group_rank,
    one_dim_generation_trial,
    quotient_uniformity_distance,
    span_fraction,
    span_probability_trial,
    span_product,
    span_window_factor,
    wilson_interval,
    zeta_lower,
    zeta_product_bound,
    zeta_product_lower,
    zeta_product_upper,
    zeta_upper,
)
from infraperiod.lattice import Lattice
from infraperiod.rng import make_rng
from oracles import gen_prob_brute

F = Fraction


def test_span_products():
    assert span_product(1) == 1
    assert span_product(2) == F(1, 2)
    assert span_product(3) == F(3, 8)
    assert round(float(span_product(4)), 3) == 0.328


def test_zeta_brackets_against_mpmath():
    for s in range(2, 8):
        lo, hi = zeta_lower(s), zeta_upper(s)
        with mpmath.workdps(60):
            z = mpmath.zeta(s)
            assert mpmath.mpf(lo.numerator) / lo.denominator < z < mpmath.mpf(hi.numerator) / hi.denominator
        assert zeta_upper(s) - zeta_lower(s) < F(1, 10**6)


@pytest.mark.parametrize("n,table", [(2, 0.505), (3, 0.467), (4, 0.450)])
def test_zeta_products(n, table):
    lo, hi = zeta_product_lower(n), zeta_product_upper(n)
    ref = float(np.prod([1 / float(mpmath.zeta(i)) for i in range(2, n + 2)]))
    assert float(lo) <= ref <= float(hi)
    # the printed values are truncated to three decimals
    assert int(ref * 1000) / 1000 == table


def test_euler_route_agrees_with_dirichlet_route():
    for n in (1, 2, 3):
        e = zeta_product_bound(n, prime_limit=10**5)
        assert e <= zeta_product_upper(n)
        assert zeta_product_upper(n) - e < F(1, 10**4)
    assert zeta_product_lower(12) >= ZETA_HAT_LOWER


def test_window_factor():
    assert span_window_factor(1) == 6
    assert span_window_factor(2) == 14
    assert span_window_factor(4) == 8 * 32 - 2


@pytest.mark.parametrize("divs,count", [((2,), 2), ((3,), 2), ((2, 2), 3), ((4,), 2), ((2, 4), 3), ((6,), 2)])
def test_exact_generation_vs_brute(divs, count):
    assert exact_generation_probability(divs, count) == gen_prob_brute(divs, count)


def test_generation_hand_cases():
    assert exact_generation_probability((2,), 2) == F(3, 4)
    assert exact_generation_probability((), 3) == 1
    p = exact_generation_probability((2, 2), 3)
    assert p == F(21, 32) and p >= zeta_product_upper(2)


def test_generates_group_snf():
    assert generates_group((2, 2), [[1, 0], [0, 1]])
    assert not generates_group((2, 2), [[1, 1], [1, 1]])
    assert generates_group((6,), [[2], [3]])
    assert not generates_group((4,), [[2], [2]])
    rng = make_rng(0, "grp", 0)
    hits = sum(group_generation_trial((2, 2), 3, rng) for _ in range(4000))
    lo, hi = wilson_interval(hits, 4000, 4)
    assert lo <= 21 / 32 <= hi


def test_abelian_group_listing():
    groups = abelian_groups_up_to(16)
    assert groups.count((2, 8)) == 1 and (2, 2, 2, 2) in groups and (4, 4) in groups
    assert sum(1 for g in groups if np.prod(g or (1,)) == 16) == 5
    assert group_rank((1, 2, 4)) == 2


def test_quotient_examples():
    Z = Lattice.scaled_identity(1, 1)
    tv, bound = quotient_uniformity_distance(Z, Z, 5)
    assert tv == 0 and bound >= 0
    tv, bound = quotient_uniformity_distance(Z, Lattice.scaled_identity(1, 2), 101)
    assert tv == F(1, 202) and tv <= bound
    Z2 = Lattice.scaled_identity(2, 1)
    sub = Lattice.from_columns([[2, 0], [1, 2]])
    tv, bound = quotient_uniformity_distance(Z2, sub, 13)
    assert tv <= bound


def test_span_trials():
    ws = WindowSample.build(Lattice.scaled_identity(3, 1), 22)
    rng = make_rng(0, "span", 3)
    frac = span_fraction(ws, 10_000, rng)
    assert frac >= float(span_product(3)) - 3 * np.sqrt(0.375 * 0.625 / 10_000)
    assert isinstance(span_probability_trial(ws, rng), bool)
    # a window holding only the origin never spans
    tiny = WindowSample.build(Lattice.scaled_identity(2, 1), 1)
    assert not span_probability_trial(tiny, rng)


def test_lattice_generation_two_routes():
    lat = Lattice.from_columns([[2, 1], [0, 3]])
    ws = WindowSample.build(lat, 20)
    rng = make_rng(4, "gen", 0)
    for _ in range(200):
        vecs = ws.draw(rng, 3)
        assert generates_lattice(lat, ws.scale, vecs) == generates_lattice_hnf(lat, ws.scale, vecs)
    zero = np.zeros((3, 2), dtype=np.int64)
    assert not generates_lattice(lat, ws.scale, zero)


def test_full_generation_joint_bound():
    lat = Lattice.scaled_identity(2, 1)
    b = 14
    b0 = 8 * 4 * 3 * b
    assert generation_window_ok(2, b, b0)
    small, big = WindowSample.build(lat, b), WindowSample.build(lat, b0)
    rng = make_rng(0, "full", 0)
    trials = 3000
    gen = sum(full_generation_trial(small, big, rng)[1] for _ in range(trials))
    joint = float((zeta_product_lower(2) - F(1, 4)) * span_product(2))
    assert gen / trials >= joint - 3 * np.sqrt(joint * (1 - joint) / trials)


def test_one_dim_two_sample():
    rng = make_rng(0, "1d", 0)
    hits = sum(one_dim_generation_trial(1, 31, rng) for _ in range(10_000))
    assert hits / 10_000 >= 1 / 3
