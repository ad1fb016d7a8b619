from fractions import Fraction

import pytest

from infraperiod.errors import PreconditionError, RankDeficiencyError
from infraperiod.experiments import run_recovery_trial
from infraperiod.lattice import Lattice
from infraperiod.recovery import (
    ApproxGeneratingSet,
    approximation_lattice,
    choose_scaling,
    dual_basis_from_approx,
    is_relation,
    matrix_norm1,
    quality_bound,
    recover_basis,
    verify_recovery,
)
from infraperiod.rng import make_rng

F = Fraction


def test_is_relation_cases():
    gs = ApproxGeneratingSet([[1, 0], [0, 1], [1, 1]], 0, 1, 2, 1, 2)
    assert is_relation(gs, [1, 1, -1]) is True
    assert is_relation(gs, [1, 0, 0]) is False
    noisy = ApproxGeneratingSet([[1, 0], [0, 1], [1, 1]], F(1, 10), 1, 2, 1, 2)
    # 2ε||z||_1 = 0.6 < 1 still decides; ||z||_1 = 5 does not
    assert is_relation(noisy, [1, 1, -1]) is True
    assert is_relation(noisy, [2, 2, -1]) is None
    with pytest.raises(PreconditionError):
        is_relation(gs, [0, 0, 0])


def test_scaling_midpoint():
    assert choose_scaling(1, 3, 1) == 9
    assert choose_scaling(F(1, 2), 2, 4) == F(3, 4)


def test_quality_bounds():
    assert quality_bound("kz", 13) == 2
    q = quality_bound("kz", 5)
    assert 2 <= q * q < 2 + F(1, 10**30)
    assert quality_bound("lll", 3) == 2
    with pytest.raises(PreconditionError):
        quality_bound("bkz", 3)


def test_approximation_lattice_shape():
    gs = ApproxGeneratingSet([[1, 0], [0, 1], [1, 1]], 0, 1, 2, 1, 2)
    cols = approximation_lattice(gs, 3)
    assert cols[2] == [0, 0, 1, 3, 3]


def test_exact_generators_of_z2():
    ex = [[1, 0], [0, 1], [1, 1]]
    gs = ApproxGeneratingSet(ex, 0, 1, 2, 1, 2)
    for mode in ("lll", "kz"):
        res = recover_basis(gs, mode)
        chk = verify_recovery(res, ex, Lattice.scaled_identity(2, 1), gs)
        assert chk["relations_exact"] and chk["hnf_equal"] and chk["max_error2"] == 0
        assert all(res.checks.values())


def test_kz_bound_is_tighter():
    gs = ApproxGeneratingSet([[3, 0], [0, 5], [3, 5], [6, 5], [3, 10]], F(1, 10**9), 3, 12, 15, 2)
    kz, lll = recover_basis(gs, "kz"), recover_basis(gs, "lll")
    assert kz.delta < lll.delta


def test_eps_too_large_rejected():
    gs = ApproxGeneratingSet([[1, 0], [0, 1], [1, 1]], F(1, 10), 1, 2, 1, 2)
    with pytest.raises(PreconditionError):
        recover_basis(gs, "lll")


def test_too_few_vectors():
    with pytest.raises(PreconditionError):
        ApproxGeneratingSet([[1, 0]], 0, 1, 1, 1, 2)


def test_dual_of_perturbed_diagonal():
    exact = [[10, 0], [0, 10]]
    eps = F(1, 10**4)
    approx = [[10 + eps, 0], [0, 10 - eps]]
    dr = dual_basis_from_approx(approx, 2, 10, 100, eps, exact)
    assert dr.checks["cond_half"] and dr.checks["norm1_ok"] and dr.checks["rows_ok"]
    assert abs(dr.basis[0][0] - F(1, 10)) <= dr.gamma


def test_dual_singular_and_limits():
    with pytest.raises(RankDeficiencyError):
        dual_basis_from_approx([[1, 2], [2, 4]], 1, 3, 1, 0)
    with pytest.raises(PreconditionError):
        dual_basis_from_approx([[10, 0], [0, 10]], 2, 10, 100, 50)


def test_matrix_norm1():
    assert matrix_norm1([[1, -2], [-3, 4]]) == 6


def test_generators_of_sublattice_fail_verification():
    # these generate 2Z x Z, so the recovered basis cannot match Z^2
    ex = [[2, 0], [0, 1], [2, 1]]
    gs = ApproxGeneratingSet(ex, 0, 1, 3, 2, 2)
    chk = verify_recovery(recover_basis(gs, "kz"), ex, Lattice.scaled_identity(2, 1), gs)
    assert chk["relations_exact"] and not chk["hnf_equal"]


@pytest.mark.parametrize("n,mode", [(1, "kz"), (2, "lll"), (3, "kz")])
def test_random_trial(n, mode):
    r = run_recovery_trial(make_rng(17, "rt", n), n, mode)
    assert all(r[k] for k in ("hnf_equal", "relations_exact", "delta_ok", "norm_ok", "cond_half", "gamma_ok"))
    assert r["error_ratio"] <= 1
