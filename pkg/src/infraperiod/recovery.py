"""Recovering an approximate basis from approximate generators, and inverting it to an approximate
dual basis, with the certified error radii."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import CheckFailure, PreconditionError, RankDeficiencyError
from .lattice import Lattice, lattice_hnf, reduce_basis
from .rational import (
    as_fraction,
    inverse,
    norm2,
    pow_half_ceil,
    pow_half_floor,
    sqrt_ceil,
    sqrt_floor,
    transpose,
)

Vec = list[Fraction]


def quality_bound(mode: str, k: int) -> Fraction:
    """Rational upper bound on the reduction quality factor f."""
    if mode == "lll":
        return pow_half_ceil(Fraction(2), k - 1)
    if mode == "kz":
        return sqrt_ceil(Fraction(k + 3, 4))
    raise PreconditionError(f"unknown reduction mode {mode!r}")


@dataclass
class ApproxGeneratingSet:
    vectors: list[Vec]  # a'_1..a'_k
    eps: Fraction  # per-vector Euclidean error bound
    mu: Fraction  # lower bound on λ1(L)
    alpha: Fraction  # upper bound on max ||a_j||
    det: Fraction  # det(L), or a lower bound on it
    rank: int

    def __post_init__(self):
        self.vectors = [[as_fraction(x) for x in v] for v in self.vectors]
        self.eps, self.mu, self.alpha, self.det = map(as_fraction, (self.eps, self.mu, self.alpha, self.det))
        if min(self.mu, self.alpha, self.det) <= 0 or self.eps < 0:
            raise PreconditionError("ε must be >= 0 and μ, α, det positive")
        if self.k < self.rank:
            raise PreconditionError("need at least r vectors")

    @property
    def k(self) -> int:
        return len(self.vectors)

    @property
    def n(self) -> int:
        return len(self.vectors[0])

    def lam(self) -> Fraction:
        """Upper bound on λ = 3√k α^r / det(L)."""
        return 3 * sqrt_ceil(Fraction(self.k)) * self.alpha**self.rank / self.det

    def eps_max(self, f: Fraction) -> Fraction:
        """Largest admissible ε, μ/(2 f λ √k), computed with upper bounds in the denominator."""
        return self.mu / (2 * f * self.lam() * sqrt_ceil(Fraction(self.k)))


def combination(vectors: Sequence[Sequence[Fraction]], z: Sequence[int]) -> Vec:
    n = len(vectors[0])
    return [sum((int(zj) * v[i] for zj, v in zip(z, vectors)), Fraction(0)) for i in range(n)]


def is_relation(gs: ApproxGeneratingSet, z: Sequence[int]) -> bool | None:
    """Decide whether z is a relation of the exact generators from the approximations.

    Returns None when 2ε||z||_1 >= μ, where the test is not conclusive.
    """
    if not any(z):
        raise PreconditionError("relations must be nonzero")
    l1 = sum(abs(int(x)) for x in z)
    if 2 * gs.eps * l1 >= gs.mu:
        return None
    return norm2(combination(gs.vectors, z)) <= (gs.eps * l1) ** 2


def choose_scaling(f: Fraction, lam: Fraction, mu: Fraction) -> Fraction:
    """Midpoint 3fλ/μ of the admissible interval (2fλ/μ, 4fλ/μ]."""
    f, lam, mu = map(as_fraction, (f, lam, mu))
    s = 3 * f * lam / mu
    if not (2 * f * lam / mu < s <= 4 * f * lam / mu):
        raise PreconditionError("empty scaling interval")
    return s


def approximation_lattice(gs: ApproxGeneratingSet, s: Fraction) -> list[Vec]:
    """Columns e_j ⊕ s·a'_j."""
    k = gs.k
    return [[Fraction(int(i == j)) for i in range(k)] + [s * x for x in a] for j, a in enumerate(gs.vectors)]


@dataclass
class RecoveryResult:
    basis: list[Vec]  # b'_1..b'_r
    transform: list[list[int]]
    relations: list[list[int]]
    s: Fraction
    lam: Fraction
    f: Fraction
    alpha_tilde: Fraction
    g: Fraction
    delta: Fraction
    reduced_norms2: list[Fraction]
    checks: dict = field(default_factory=dict)

    def exact_basis(self, exact_vectors: Sequence[Sequence[Fraction]]) -> list[Vec]:
        k = len(self.transform)
        r = len(self.basis)
        return [combination(exact_vectors, [self.transform[i][k - r + j] for i in range(k)]) for j in range(r)]


def recover_basis(gs: ApproxGeneratingSet, mode: str = "lll", f_bound: Fraction | None = None) -> RecoveryResult:
    """Recover a basis: reduce the approximation lattice, read off the transform.

    ``f_bound`` may override the generic quality factor when a sharper guarantee is known
    (for k = 2, a Korkine-Zolotarev basis attains both minima, so f = 1).
    """
    k, r = gs.k, gs.rank
    f = quality_bound(mode, k) if f_bound is None else as_fraction(f_bound)
    lam = gs.lam()
    eps_max = gs.eps_max(f)
    if gs.eps > eps_max:
        raise PreconditionError(f"ε = {float(gs.eps):.3e} exceeds the admissible {float(eps_max):.3e}")
    s = choose_scaling(f, lam, gs.mu)
    rep = reduce_basis(approximation_lattice(gs, s), mode)
    M = rep.transform
    relations = [[M[i][j] for i in range(k)] for j in range(k - r)]
    basis = [combination(gs.vectors, [M[i][k - r + j] for i in range(k)]) for j in range(r)]
    alpha_tilde = sqrt_ceil(s * s * (gs.alpha + gs.eps) ** 2 + 1)
    g = f * sqrt_ceil(Fraction(k)) * alpha_tilde
    delta = g * gs.eps
    checks = {
        "relations_verified": all(is_relation(gs, z) is not False for z in relations) if gs.eps >= 0 else True,
        "short_relation_vectors": all(
            norm2(rep.reduced_basis[j]) <= (f * lam) ** 2 for j in range(k - r)
        ),
        "alpha_tilde_le_6.5": alpha_tilde <= Fraction(13, 2) * f * lam * gs.alpha / gs.mu,
    }
    return RecoveryResult(basis, M, relations, s, lam, f, alpha_tilde, g, delta,
                          [norm2(c) for c in rep.reduced_basis], checks)


def verify_recovery(res: RecoveryResult, exact_vectors, lattice: Lattice, gs: ApproxGeneratingSet) -> dict:
    """Test-mode checks against the known exact generators and lattice."""
    ex = [[as_fraction(x) for x in v] for v in exact_vectors]
    relations_exact = all(not any(combination(ex, z)) for z in res.relations)
    B = res.exact_basis(ex)
    try:
        same = Lattice.from_columns(B).same_lattice(lattice)
    except RankDeficiencyError:
        same = False
    d2 = max(norm2([a - b for a, b in zip(bp, bb)]) for bp, bb in zip(res.basis, B))
    nb = max(norm2(b) for b in B)
    return {
        "relations_exact": relations_exact,
        "hnf_equal": same,
        "delta_ok": d2 <= res.delta**2,
        "norm_ok": nb <= (res.g * gs.alpha) ** 2,
        "max_error2": d2,
    }


# --- dual inversion ------------------------------------------------------------------


def matrix_norm1(m: Sequence[Sequence[Fraction]]) -> Fraction:
    """Maximum absolute column sum."""
    return max(sum(abs(row[j]) for row in m) for j in range(len(m[0])))


@dataclass
class DualResult:
    basis: list[Vec]  # approximate dual basis vectors (rows of B'^{-1})
    gamma: Fraction
    eps_max: Fraction
    checks: dict = field(default_factory=dict)


def gamma_bound(n: int, g: Fraction, alpha: Fraction, det: Fraction, eps: Fraction) -> Fraction:
    """2 n^{5/2} g^{2n-1} α^{2(n-1)} ε / det(L)^2."""
    return 2 * pow_half_ceil(Fraction(n), 5) * g ** (2 * n - 1) * alpha ** (2 * (n - 1)) * eps / det**2


def dual_eps_max(n: int, g: Fraction, alpha: Fraction, det: Fraction) -> Fraction:
    """det(L) / (2 n^{3/2} g^n α^{n-1})."""
    return det / (2 * pow_half_ceil(Fraction(n), 3) * g**n * alpha ** (n - 1))


def dual_basis_from_approx(
    basis: Sequence[Sequence[Fraction]], g, alpha, det, eps, exact_basis: Sequence[Sequence[Fraction]] | None = None
) -> DualResult:
    """Invert the approximate basis. The dual basis vectors are the rows of B'^{-1}.

    The perturbation bound is proved with a norm dominated by the spectral norm, which controls
    both rows and columns, so the same radius covers the dual basis vectors.
    """
    g, alpha, det, eps = map(as_fraction, (g, alpha, det, eps))
    cols = [[as_fraction(x) for x in c] for c in basis]
    n = len(cols)
    if n != len(cols[0]):
        raise PreconditionError("square basis required")
    emax = dual_eps_max(n, g, alpha, det)
    if eps > emax:
        raise PreconditionError(f"ε = {float(eps):.3e} exceeds the inversion limit {float(emax):.3e}")
    Bp = transpose(cols)
    try:
        inv = inverse(Bp)
    except ZeroDivisionError as exc:
        raise RankDeficiencyError("approximate basis is singular") from exc
    gamma = gamma_bound(n, g, alpha, det, eps)
    checks: dict = {}
    if exact_basis is not None:
        B = transpose([[as_fraction(x) for x in c] for c in exact_basis])
        Binv = inverse(B)
        E = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(Bp, B)]
        D = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(inv, Binv)]
        checks["cond_half"] = matrix_norm1(Binv) * matrix_norm1(E) <= Fraction(1, 2)
        checks["norm1_ok"] = matrix_norm1(D) <= gamma
        checks["rows_ok"] = all(norm2(row) <= gamma**2 for row in D)
        checks["max_row_error2"] = max(norm2(row) for row in D)
    return DualResult([list(r) for r in inv], gamma, emax, checks)
