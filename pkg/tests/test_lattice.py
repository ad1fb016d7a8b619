from fractions import Fraction

import numpy as np
import pytest

from infraperiod.errors import RankDeficiencyError
from infraperiod.lattice import (
    Lattice,
    count_window_points,
    covering_radius_bound,
    dual_lattice,
    elementary_divisors,
    gram_schmidt,
    gs_coefficients,
    hnf,
    int_det,
    kz_reduce,
    lll_reduce,
    lll_reduce_reference,
    snf,
    successive_minima_sq,
    svp_enumerate,
)
from infraperiod.rational import matmul, norm2, transpose
from oracles import brute_min_norm2, brute_minima, combo, count_box_1d_2d, frac_det

F = Fraction


def test_gram_schmidt_identity():
    bstar, mu, bn = gram_schmidt([[1, 0], [0, 1]])
    assert bstar == [[1, 0], [0, 1]]
    assert mu == [[1, 0], [0, 1]]


def test_gram_schmidt_hand_case():
    bstar, mu, bn = gram_schmidt([[1, 0], [1, 1]])
    assert bstar[1] == [0, 1]
    assert mu[1][0] == 1


def test_gram_schmidt_dependent_raises():
    with pytest.raises(RankDeficiencyError):
        gram_schmidt([[1, 2], [2, 4]])


def test_integer_route_matches_direct_gs():
    rng = np.random.default_rng(11)
    for _ in range(30):
        cols = [[F(int(x), int(rng.integers(1, 4))) for x in rng.integers(-5, 6, 3)] for _ in range(3)]
        try:
            _, mu, bn = gram_schmidt(cols)
        except RankDeficiencyError:
            continue
        mu2, bn2 = gs_coefficients(cols)
        assert bn == bn2
        assert all(mu[i][j] == mu2[i][j] for i in range(3) for j in range(i))


def test_lll_reduced_input_is_fixed():
    rep = lll_reduce([[1, 0], [0, 1]])
    assert rep.transform == [[1, 0], [0, 1]]


def test_lll_short_vector():
    rep = lll_reduce([[1, 0], [10, 1]])
    assert min(norm2(c) for c in rep.reduced_basis) == 1


def test_lll_matches_reference_transform():
    rng = np.random.default_rng(2)
    for _ in range(40):
        k = int(rng.integers(2, 5))
        cols = [[int(x) for x in rng.integers(-20, 21, k)] for _ in range(k)]
        if frac_det(transpose(cols)) == 0:
            continue
        assert lll_reduce(cols).transform == lll_reduce_reference(cols).transform


def test_reduction_rejects_dependent_columns():
    with pytest.raises(RankDeficiencyError):
        lll_reduce([[2, 0], [0, 3], [2, 3]])


def test_kz_one_dimensional():
    rep = kz_reduce([[F(-7, 3)]])
    assert rep.reduced_basis == [[F(-7, 3)]] or rep.reduced_basis == [[F(7, 3)]]
    assert rep.quality_factor_sq == 1


def test_kz_first_vector_is_shortest():
    rng = np.random.default_rng(5)
    for _ in range(15):
        cols = [[int(x) for x in rng.integers(-9, 10, 2)] for _ in range(2)]
        if frac_det(transpose(cols)) == 0:
            continue
        rep = kz_reduce(cols)
        assert norm2(rep.reduced_basis[0]) == brute_min_norm2(cols, 12)


def test_svp_examples():
    assert svp_enumerate(Lattice.scaled_identity(2, 1))[1] == 1
    assert svp_enumerate(Lattice.from_columns([[2, 0], [1, 2]]))[1] == 4
    assert svp_enumerate(Lattice.scaled_identity(2, 10))[1] == 100
    with pytest.raises(LookupError):
        svp_enumerate(Lattice.scaled_identity(2, 10), radius2=F(99))


def test_successive_minima_against_scan():
    rng = np.random.default_rng(9)
    for _ in range(10):
        cols = [[int(x) for x in rng.integers(-4, 5, 3)] for _ in range(3)]
        if frac_det(transpose(cols)) == 0:
            continue
        assert successive_minima_sq(Lattice.from_columns(cols)) == brute_minima(cols, 9)


def test_hnf_examples():
    assert hnf([[1, 0], [0, 1]]) == [[1, 0], [0, 1]]
    a = Lattice.from_columns([[2, 0], [1, 1]])
    b = Lattice.from_columns([[1, 1], [1, -1]])
    # both have index 2 in Z^2 and contain (1,1) and (2,0): they are the same lattice
    assert a.same_lattice(b)
    c = Lattice.from_columns([[2, 0], [0, 1]])
    assert not a.same_lattice(c)
    assert Lattice.from_columns([[1, 1], [2, 0]]).same_lattice(a)


def test_snf_examples():
    assert elementary_divisors([[1, 0], [0, 1]]) == [1, 1]
    assert elementary_divisors([[2, 0], [0, 4]]) == [2, 4]
    assert elementary_divisors([[2, 0], [1, 2]]) == [1, 4]
    D, S, T = snf([[2, 0], [1, 2]])
    assert matmul(matmul(S, [[2, 0], [1, 2]]), T) == D
    assert abs(int_det(S)) == 1 and abs(int_det(T)) == 1


def test_dual_examples():
    assert dual_lattice(Lattice.scaled_identity(3, 1)).same_lattice(Lattice.scaled_identity(3, 1))
    assert dual_lattice(Lattice.scaled_identity(2, 10)).same_lattice(Lattice.scaled_identity(2, F(1, 10)))
    lat = Lattice.from_columns([[3, 1], [-2, 5]])
    for u in lat.columns:
        for v in dual_lattice(lat).columns:
            assert sum(a * b for a, b in zip(u, v)).denominator == 1


def test_covering_radius_bounds():
    assert covering_radius_bound(Lattice.scaled_identity(1, 7)) == F(7, 2)
    r = covering_radius_bound(Lattice.scaled_identity(2, 1))
    assert r * r >= F(1, 2)
    r10 = covering_radius_bound(Lattice.scaled_identity(2, 10))
    assert r10 * r10 >= 50
    assert abs(r10 - 10 * r) < F(1, 10**30)


def test_window_counts():
    assert count_window_points(Lattice.scaled_identity(1, 1), 5).count == 5
    wc = count_window_points(Lattice.scaled_identity(2, 10), 35)
    assert wc.count == 16 == count_box_1d_2d([[10, 0], [0, 10]], 35, 5)
    assert wc.asserted and wc.lower <= 16 <= wc.upper
    small = count_window_points(Lattice.scaled_identity(2, 10), 10)
    assert not small.asserted and small.count == 1


def test_window_count_skewed():
    cols = [[F(3, 2), F(1, 2)], [F(-1), F(5, 2)]]
    lat = Lattice.from_columns(cols)
    wc = count_window_points(lat, 9)
    assert wc.count == count_box_1d_2d(cols, 9, 30)


def test_json_roundtrip():
    lat = Lattice.from_columns([[F(1, 3), 2], [0, 5]])
    assert Lattice.from_json(lat.to_json()) == lat
