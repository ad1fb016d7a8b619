"""Invariants over random small lattices."""

from fractions import Fraction

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from infraperiod.lattice import (
    Lattice,
    count_window_points,
    dual_lattice,
    hnf,
    int_det,
    kz_reduce,
    lll_reduce,
    successive_minima_sq,
)
from infraperiod.rational import ceil_frac, decode, encode, matmul, norm2, sqrt_ceil, sqrt_floor, transpose
from oracles import frac_det

small = st.integers(-6, 6)


@st.composite
def bases(draw, max_n=3):
    n = draw(st.integers(1, max_n))
    den = draw(st.integers(1, 3))
    cols = [[Fraction(draw(small), den) for _ in range(n)] for _ in range(n)]
    assume(frac_det(transpose(cols)) != 0)
    return cols


@settings(max_examples=60, deadline=None)
@given(bases())
def test_reduction_transform_is_unimodular_and_consistent(cols):
    for red in (lll_reduce(cols), kz_reduce(cols)):
        assert abs(int_det(red.transform)) == 1
        assert transpose(matmul(transpose(cols), red.transform)) == red.reduced_basis
        assert Lattice.from_columns(red.reduced_basis).same_lattice(Lattice.from_columns(cols))


@settings(max_examples=40, deadline=None)
@given(bases())
def test_reduction_quality_against_minima(cols):
    mins = successive_minima_sq(Lattice.from_columns(cols))
    for red in (lll_reduce(cols), kz_reduce(cols)):
        for c, m in zip(red.reduced_basis, mins):
            assert norm2(c) <= red.quality_factor_sq * m
    assert norm2(kz_reduce(cols).reduced_basis[0]) == mins[0]


@settings(max_examples=60, deadline=None)
@given(bases())
def test_dual_is_an_involution(cols):
    lat = Lattice.from_columns(cols)
    d = dual_lattice(lat)
    assert dual_lattice(d).same_lattice(lat)
    assert d.det * lat.det == 1


@settings(max_examples=40, deadline=None)
@given(bases(max_n=2), st.integers(1, 6))
def test_window_count_sandwich(cols, extra):
    lat = Lattice.from_columns(cols)
    b = ceil_frac(2 * lat.nu_upper) + extra
    wc = count_window_points(lat, b)
    assert wc.asserted
    assert wc.lower <= wc.count <= wc.upper


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=2, max_size=2), min_size=2, max_size=2), st.permutations([0, 1]))
def test_hnf_ignores_column_order(rows, perm):
    assume(frac_det(rows) != 0)
    permuted = [[r[p] for p in perm] for r in rows]
    assert hnf(rows) == hnf(permuted)


@given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**6))
def test_sqrt_brackets(x):
    lo, hi = sqrt_floor(x), sqrt_ceil(x)
    assert lo * lo <= x <= hi * hi
    assert hi - lo <= Fraction(1, 10**20) or x == 0


@given(st.fractions(max_denominator=10**9))
def test_rational_codec(x):
    assert decode(encode(x)) == x
