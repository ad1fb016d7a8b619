from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest

from infraperiod.errors import ConfigError
from infraperiod.infrastructure import (
    BoxInfrastructure,
    GridSpec,
    ScaledGrid,
    count_outside_hbound,
    count_outside_hbound_pointwise,
    eval_f,
    eval_f_approx,
    in_h,
    in_hbound,
    interval_infrastructure,
    shift_is_good,
    shift_is_good_pointwise,
    synth_box_infrastructure,
)
from infraperiod.lattice import Lattice

F = Fraction


@pytest.fixture(scope="module")
def one_d():
    return interval_infrastructure(40, [0, 13, 27])


@pytest.fixture(scope="module")
def two_d():
    return synth_box_infrastructure(2, Lattice.scaled_identity(2, 10), 4, np.random.default_rng(3))


def _lookup(u):
    u = u % 40
    return 0 if u < 13 else (1 if u < 27 else 2)


def test_single_cell_is_fundamental_box():
    infra = interval_infrastructure(40, [0])
    assert infra.cells[0].boxes == ((F(40),),)
    sq = synth_box_infrastructure(2, Lattice.scaled_identity(2, 10), 1, np.random.default_rng(0))
    assert len(sq.cells) == 1 and sq.cells[0].boxes == ((F(10), F(10)),)


def test_three_interval_cells(one_d):
    assert [(c.corner[0], c.boxes[0][0]) for c in one_d.cells] == [(0, 13), (13, 14), (27, 13)]
    assert one_d.A == 14


def test_two_d_tiling(two_d):
    two_d.verify_tiling(100)
    assert two_d.is_cornered() and len(two_d.cells) == 4


def test_bad_corners_rejected():
    with pytest.raises(ConfigError):
        interval_infrastructure(40, [1, 13])


def test_reduce_point_matches_lookup(one_d):
    rng = np.random.default_rng(1)
    for _ in range(300):
        u = F(int(rng.integers(-4000, 4000)), int(rng.integers(1, 50)))
        rep = one_d.reduce_point([u])
        assert rep.x == _lookup(u)
        assert one_d.phi(rep) == (u,)


def test_reduce_point_periodic_and_corners(two_d):
    for c in two_d.cells:
        rep = two_d.reduce_point(c.corner)
        assert rep.x == c.id and all(t == 0 for t in rep.t)
    u = (F(37, 7), F(-11, 3))
    a = two_d.reduce_point(u)
    b = two_d.reduce_point((u[0] + 10, u[1] - 30))
    assert (a.x, a.t) == (b.x, b.t)


def test_eval_f_periodic(one_d):
    g = GridSpec.from_shift_index(1, 32, 160, 708, F(1, 9), (5,))
    for v in (0, 17, 311):
        assert eval_f(one_d, g, (v,)) == eval_f(one_d, g, (v + 32 * 40,))


def test_f_collision_classes_by_brute_grouping(one_d):
    g = GridSpec.from_shift_index(1, 4, 40, 50, F(1, 9), (3,))
    groups = defaultdict(list)
    for v in range(g.side_v):
        groups[eval_f(one_d, g, (v,))].append(v)
    sg = ScaledGrid(one_d, g)
    cell, T = sg.f_values(sg.all_v())
    by_arr = defaultdict(list)
    for v, c, t in zip(range(g.side_v), cell.tolist(), T.tolist()):
        by_arr[(c, tuple(t))].append(v)
    assert sorted(groups.values()) == sorted(by_arr.values())


def test_hbound_membership(one_d):
    assert in_h(one_d, [F(13)])
    assert in_hbound(one_d, [F(13)], 32)
    assert in_hbound(one_d, [F(13) - F(1, 64)], 32)
    assert not in_hbound(one_d, [F(13) - F(1, 16)], 32)
    assert not in_hbound(one_d, [F(5)], 32)


def test_shift_good_vs_pointwise(one_d, two_d):
    for infra, N, q, L in ((one_d, 4, 20, 40), (two_d, 2, 8, 12)):
        for a in range(0, L, 3):
            g = GridSpec.from_shift_index(infra.n, N, q, L, F(1, 20), (a,) * infra.n)
            assert shift_is_good(infra, g) == shift_is_good_pointwise(infra, g)
            assert count_outside_hbound(infra, g) == count_outside_hbound_pointwise(infra, g)


def test_zero_shift_hits_a_corner(one_d):
    g = GridSpec.from_shift_index(1, 4, 20, 40, F(1, 20), (0,))
    assert not shift_is_good(one_d, g)


def test_approximate_oracle(one_d):
    g = GridSpec.from_shift_index(1, 32, 160, 708, F(1, 9), (101,))
    assert shift_is_good(one_d, g)
    for v in (0, 77, 2048, 5000):
        val, bad = eval_f_approx(one_d, g, (v,), 40)
        assert not bad and val == eval_f(one_d, g, (v,))
    # a grid point exactly on a corner can be pushed into the neighbouring cell
    g0 = GridSpec.from_shift_index(1, 32, 160, 708, F(1, 9), (0,))
    val, bad = eval_f_approx(one_d, g0, (13 * 32,), 20, policy="adversarial")
    assert bad and val != eval_f(one_d, g0, (13 * 32,))


def test_json_roundtrip(two_d):
    again = BoxInfrastructure.from_json(two_d.to_json())
    assert again.cells == two_d.cells and again.lattice == two_d.lattice
    g = GridSpec.from_shift_index(2, 4, 32, 16200, F(1, 18), (3, 4))
    assert GridSpec.from_json(g.to_json()) == g
