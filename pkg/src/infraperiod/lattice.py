"""Exact rational lattices: Gram-Schmidt, LLL, Korkine-Zolotarev, enumeration, normal forms."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterator, Sequence

import numpy as np
from sympy import Matrix as SMatrix
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from .errors import BudgetError, CapabilityError, PreconditionError, RankDeficiencyError
from .rational import (
    as_fraction,
    ceil_frac,
    common_denominator,
    decode,
    determinant,
    dot,
    encode,
    floor_frac,
    inverse,
    norm2,
    pow_half_ceil,
    round_half_up,
    sqrt_ceil,
    sqrt_floor,
    transpose,
)

Column = tuple[Fraction, ...]
IntMatrix = list[list[int]]

KZ_MAX_RANK = 12
LLL_DELTA = Fraction(3, 4)


def _cols(basis) -> list[list[Fraction]]:
    if isinstance(basis, Lattice):
        return [list(c) for c in basis.columns]
    return [[as_fraction(x) for x in c] for c in basis]


@dataclass(frozen=True)
class Lattice:
    """Lattice spanned by the given columns (each a vector in Q^n)."""

    columns: tuple[Column, ...]

    def __post_init__(self):
        cols = tuple(tuple(as_fraction(x) for x in c) for c in self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise RankDeficiencyError("empty basis")
        if len({len(c) for c in cols}) != 1:
            raise PreconditionError("columns of unequal length")
        if determinant(self.gram) == 0:
            raise RankDeficiencyError("basis columns are linearly dependent")

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "Lattice":
        return cls(tuple(tuple(c) for c in cols))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Lattice":
        """Rows of a matrix whose columns are the basis vectors."""
        return cls(tuple(tuple(c) for c in transpose(rows)))

    @classmethod
    def scaled_identity(cls, n: int, scale=1) -> "Lattice":
        s = as_fraction(scale)
        return cls(tuple(tuple(s if i == j else Fraction(0) for i in range(n)) for j in range(n)))

    @property
    def n(self) -> int:
        return len(self.columns[0])

    @property
    def rank(self) -> int:
        return len(self.columns)

    @property
    def full_rank(self) -> bool:
        return self.rank == self.n

    @cached_property
    def gram(self) -> list[list[Fraction]]:
        return [[dot(a, b) for b in self.columns] for a in self.columns]

    @cached_property
    def det2(self) -> Fraction:
        """Squared covolume (Gram determinant)."""
        return determinant(self.gram)

    @cached_property
    def det(self) -> Fraction:
        """Covolume; exact when rational, otherwise a certified upper bound."""
        if self.full_rank:
            return abs(determinant(transpose(self.columns)))
        return sqrt_ceil(self.det2)

    @cached_property
    def min_norm2(self) -> Fraction:
        """Exact squared first minimum."""
        return svp_enumerate(self)[1]

    @cached_property
    def lambda1_lower(self) -> Fraction:
        return sqrt_floor(self.min_norm2)

    @cached_property
    def lambda1_upper(self) -> Fraction:
        return sqrt_ceil(self.min_norm2)

    @cached_property
    def nu_upper(self) -> Fraction:
        return covering_radius_bound(self)

    def matrix_rows(self) -> list[list[Fraction]]:
        return transpose(self.columns)

    def dual(self) -> "Lattice":
        return dual_lattice(self)

    def hnf_key(self) -> tuple:
        return lattice_hnf(self)

    def same_lattice(self, other: "Lattice") -> bool:
        return self.hnf_key() == other.hnf_key()

    def contains(self, v: Sequence) -> bool:
        """Exact membership for full-rank lattices."""
        c = solve_coefficients(self, v)
        return all(x.denominator == 1 for x in c)

    def to_json(self) -> dict:
        return {"n": self.n, "basis": [encode(x) for c in self.columns for x in c]}

    @classmethod
    def from_json(cls, obj: dict) -> "Lattice":
        n = int(obj["n"])
        flat = [decode(x) for x in obj["basis"]]
        if len(flat) % n:
            raise PreconditionError("basis length is not a multiple of n")
        return cls(tuple(tuple(flat[i : i + n]) for i in range(0, len(flat), n)))


@dataclass(frozen=True)
class ReductionReport:
    reduced_basis: list[list[Fraction]]  # columns
    transform: IntMatrix  # k x k, reduced = input * transform
    quality_factor: Fraction  # certified upper bound on f
    quality_factor_sq: Fraction  # exact f^2
    mode: str


def gram_schmidt(basis) -> tuple[list[list[Fraction]], list[list[Fraction]], list[Fraction]]:
    """Return (b*, mu, |b*|^2). mu[i][j] for j < i, mu[i][i] = 1."""
    cols = _cols(basis)
    k = len(cols)
    bstar: list[list[Fraction]] = []
    bn: list[Fraction] = []
    mu = [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    for i, b in enumerate(cols):
        v = list(b)
        for j in range(i):
            m = dot(b, bstar[j]) / bn[j]
            mu[i][j] = m
            v = [x - m * y for x, y in zip(v, bstar[j])]
        nn = norm2(v)
        if nn == 0:
            raise RankDeficiencyError("dependent columns in Gram-Schmidt")
        bstar.append(v)
        bn.append(nn)
    return bstar, mu, bn


def gs_coefficients(basis) -> tuple[list[list[Fraction]], list[Fraction]]:
    """(mu, |b*|^2) through integer Gram determinants, without forming b*."""
    cols = _cols(basis)
    k = len(cols)
    den = 1
    for c in cols:
        for x in c:
            den = den * x.denominator // gcd(den, x.denominator)
    b = [[int(x * den) for x in c] for c in cols]
    d = [1] + [0] * k
    lam = [[0] * k for _ in range(k)]
    for kk in range(k):
        for j in range(kk + 1):
            u = sum(x * y for x, y in zip(b[kk], b[j]))
            for i in range(j):
                u = (d[i + 1] * u - lam[kk][i] * lam[j][i]) // d[i]
            if j < kk:
                lam[kk][j] = u
            elif u == 0:
                raise RankDeficiencyError("dependent columns in Gram-Schmidt")
            else:
                d[kk + 1] = u
    mu = [[Fraction(lam[i][j], d[j + 1]) if j < i else Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    bn = [Fraction(d[i + 1], d[i] * den * den) for i in range(k)]
    return mu, bn


def _apply_transform(cols: list[list[Fraction]], u: IntMatrix) -> list[list[Fraction]]:
    k = len(cols)
    n = len(cols[0])
    return [[sum((cols[i][r] * u[i][j] for i in range(k)), Fraction(0)) for r in range(n)] for j in range(k)]


def _int_identity(k: int) -> IntMatrix:
    return [[int(i == j) for j in range(k)] for i in range(k)]


def _integral_lll(vecs: list[list[int]], delta: Fraction) -> IntMatrix:
    """Integral LLL on integer vectors; returns the transform (columns = new vectors).

    All quantities are the integers d_i (Gram determinants) and λ_ij = d_j μ_ij, so no
    rational arithmetic is needed.
    """
    k = len(vecs)
    b = [list(v) for v in vecs]
    h = [[int(i == j) for j in range(k)] for i in range(k)]  # h[i]: coefficients of b_i
    lam = [[0] * k for _ in range(k)]
    d = [1] + [0] * k  # d[i + 1] belongs to vector i
    p, qd = delta.numerator, delta.denominator

    def idot(x, y):
        return sum(a * c for a, c in zip(x, y))

    def red(kk: int, l: int) -> None:
        if 2 * abs(lam[kk][l]) > d[l + 1]:
            r = (2 * lam[kk][l] + d[l + 1]) // (2 * d[l + 1])
            b[kk] = [x - r * y for x, y in zip(b[kk], b[l])]
            h[kk] = [x - r * y for x, y in zip(h[kk], h[l])]
            lam[kk][l] -= r * d[l + 1]
            for i in range(l):
                lam[kk][i] -= r * lam[l][i]

    def swap(kk: int, kmax: int) -> None:
        b[kk], b[kk - 1] = b[kk - 1], b[kk]
        h[kk], h[kk - 1] = h[kk - 1], h[kk]
        for j in range(kk - 1):
            lam[kk][j], lam[kk - 1][j] = lam[kk - 1][j], lam[kk][j]
        lm = lam[kk][kk - 1]
        B = (d[kk - 1] * d[kk + 1] + lm * lm) // d[kk]
        for i in range(kk + 1, kmax + 1):
            t = lam[i][kk]
            lam[i][kk] = (d[kk + 1] * lam[i][kk - 1] - lm * t) // d[kk]
            lam[i][kk - 1] = (B * t + lm * lam[i][kk]) // d[kk + 1]
        d[kk] = B

    d[1] = idot(b[0], b[0])
    if d[1] == 0:
        raise RankDeficiencyError("zero vector in LLL input")
    kk, kmax = 1, 0
    while kk < k:
        if kk > kmax:
            kmax = kk
            for j in range(kk + 1):
                u = idot(b[kk], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[kk][i] * lam[j][i]) // d[i]
                if j < kk:
                    lam[kk][j] = u
                else:
                    if u == 0:
                        raise RankDeficiencyError("dependent vectors in LLL input")
                    d[kk + 1] = u
        red(kk, kk - 1)
        if qd * d[kk + 1] * d[kk - 1] < p * d[kk] ** 2 - qd * lam[kk][kk - 1] ** 2:
            swap(kk, kmax)
            kk = max(1, kk - 1)
        else:
            for l in range(kk - 2, -1, -1):
                red(kk, l)
            kk += 1
    return [[h[j][i] for j in range(k)] for i in range(k)]


def _scaled_integer(cols: list[list[Fraction]]) -> list[list[int]]:
    den = 1
    for c in cols:
        for x in c:
            den = den * x.denominator // gcd(den, x.denominator)
    return [[int(x * den) for x in c] for c in cols]


def lll_reduce(basis, delta: Fraction = LLL_DELTA) -> ReductionReport:
    """Exact LLL reduction with the Lovasz parameter delta (default 3/4).

    Rational input is scaled to integers first; the transform does not depend on the scale.
    """
    b = _cols(basis)
    k = len(b)
    u = _integral_lll(_scaled_integer(b), Fraction(delta))
    red = _apply_transform(b, u)
    return ReductionReport(red, u, pow_half_ceil(Fraction(2), k - 1), Fraction(2) ** (k - 1), "lll")


def lll_reduce_reference(basis, delta: Fraction = LLL_DELTA) -> ReductionReport:
    """Textbook rational LLL, recomputing Gram-Schmidt after each swap (oracle for tests)."""
    b = _cols(basis)
    k = len(b)
    u = _int_identity(k)

    def size_reduce(i: int, j: int, mu) -> None:
        r = round_half_up(mu[i][j])
        if r == 0:
            return
        b[i] = [x - r * y for x, y in zip(b[i], b[j])]
        for row in u:
            row[i] -= r * row[j]
        for l in range(j + 1):
            mu[i][l] -= r * mu[j][l]

    _, mu, bn = gram_schmidt(b)
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            if abs(mu[i][j]) > Fraction(1, 2):
                size_reduce(i, j, mu)
        if bn[i] >= (delta - mu[i][i - 1] ** 2) * bn[i - 1]:
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            for row in u:
                row[i], row[i - 1] = row[i - 1], row[i]
            _, mu, bn = gram_schmidt(b)
            i = max(i - 1, 1)
    return ReductionReport(b, u, pow_half_ceil(Fraction(2), k - 1), Fraction(2) ** (k - 1), "lll")


def _fp_enumerate(cols, radius2: Fraction, budget: int = 5_000_000, start: int = 0,
                  coeffs=None) -> Iterator[tuple[list[int], Fraction]]:
    """Coefficient vectors x with |π_start(Σ x_j b_j)|^2 <= radius2 over b_start.. (Fincke-Pohst).

    With start = 0 this enumerates the lattice itself; larger start enumerates a projected lattice.
    """
    mu, bn = coeffs if coeffs is not None else gs_coefficients(cols)
    k = len(bn)
    x = [0] * k
    visited = [0]

    def rec(j: int, partial: Fraction):
        if j < start:
            yield list(x[start:]), partial
            return
        c = -sum((x[l] * mu[l][j] for l in range(j + 1, k)), Fraction(0))
        rem = radius2 - partial
        if rem < 0:
            return
        sq = sqrt_ceil(rem / bn[j], 12)
        for xi in range(ceil_frac(c - sq), floor_frac(c + sq) + 1):
            dd = (xi - c) ** 2 * bn[j]
            if dd <= rem:
                visited[0] += 1
                if visited[0] > budget:
                    raise BudgetError("enumeration budget exceeded")
                x[j] = xi
                yield from rec(j - 1, partial + dd)
        x[j] = 0

    yield from rec(k - 1, Fraction(0))


def short_vectors(basis, radius2: Fraction, budget: int = 5_000_000) -> list[tuple[Fraction, list[int]]]:
    """All nonzero lattice vectors of squared norm <= radius2, as (norm2, coefficients)."""
    out = [(nn, xs) for xs, nn in _fp_enumerate(_cols(basis), Fraction(radius2), budget) if any(xs)]
    out.sort(key=lambda t: t[0])
    return out


def svp_enumerate(lattice, radius2: Fraction | None = None) -> tuple[list[Fraction], Fraction]:
    """Shortest nonzero vector and its exact squared norm.

    Raises LookupError when ``radius2`` is given and no nonzero vector lies within it.
    """
    cols = _cols(lattice)
    red = lll_reduce(cols).reduced_basis
    best = min(norm2(c) for c in red)
    r2 = best if radius2 is None else Fraction(radius2)
    found = short_vectors(red, r2)
    if not found:
        raise LookupError("no nonzero vector within radius")
    nn, xs = found[0]
    v = [sum((xs[j] * red[j][r] for j in range(len(red))), Fraction(0)) for r in range(len(red[0]))]
    return v, nn


def successive_minima_sq(lattice) -> list[Fraction]:
    """Exact squared successive minima by enumeration (desk-scale ranks only)."""
    cols = lll_reduce(_cols(lattice)).reduced_basis
    k = len(cols)
    r2 = max(norm2(c) for c in cols)
    chosen: list[list[int]] = []
    minima: list[Fraction] = []
    for nn, xs in short_vectors(cols, r2):
        trial = chosen + [xs]
        if _int_rank(trial) == len(trial):
            chosen = trial
            minima.append(nn)
            if len(minima) == k:
                break
    return minima


def _int_rank(rows: list[list[int]]) -> int:
    from .rational import rank

    return rank(rows)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, s, t = _egcd(b, a % b)
    return g, t, s - (a // b) * t


def extend_to_unimodular(c: Sequence[int]) -> IntMatrix:
    """Unimodular integer matrix whose first column is the primitive vector c."""
    c = [int(x) for x in c]
    k = len(c)
    g0 = 0
    for x in c:
        g0 = gcd(g0, x)
    if g0 != 1:
        raise PreconditionError("vector is not primitive")
    u = _int_identity(k)
    cur = list(c)
    for j in range(1, k):
        x, y = cur[0], cur[j]
        if y == 0:
            continue
        g, s, t = _egcd(x, y)
        # E = [[s, t], [-y/g, x/g]] maps (x, y) to (g, 0); accumulate U <- U E^{-1}
        a, b2, c2, d = x // g, -t, y // g, s
        for row in u:
            r0, rj = row[0], row[j]
            row[0], row[j] = r0 * a + rj * c2, r0 * b2 + rj * d
        cur[0], cur[j] = g, 0
    if cur[0] == -1:
        for row in u:
            row[0] = -row[0]
    return u


def _size_reduce_all(b: list[list[Fraction]], u: IntMatrix) -> None:
    k = len(b)
    mu, _ = gs_coefficients(b)
    for i in range(1, k):
        for j in range(i - 1, -1, -1):
            r = round_half_up(mu[i][j])
            if r:
                b[i] = [x - r * y for x, y in zip(b[i], b[j])]
                for row in u:
                    row[i] -= r * row[j]
                for l in range(j + 1):
                    mu[i][l] -= r * mu[j][l]


def kz_reduce(basis) -> ReductionReport:
    """Korkine-Zolotarev reduction: at each level put a shortest vector of the projected
    lattice first (enumerated from the Gram-Schmidt tail), then size-reduce."""
    b = _cols(basis)
    k = len(b)
    if k > KZ_MAX_RANK:
        raise CapabilityError(f"KZ reduction limited to rank {KZ_MAX_RANK}")
    first = lll_reduce(b)
    b, u = first.reduced_basis, [row[:] for row in first.transform]
    for i in range(k - 1):
        mu, bn = gs_coefficients(b)
        # |π_i(b_j)|^2 for j >= i bounds the projected minimum
        r2 = min(sum((mu[j][l] ** 2 * bn[l] for l in range(i, j + 1)), Fraction(0)) for j in range(i, k))
        found = [(nn, xs) for xs, nn in _fp_enumerate(b, r2, start=i, coeffs=(mu, bn)) if any(xs)]
        nn, xs = min(found, key=lambda t: t[0])
        g = 0
        for x in xs:
            g = gcd(g, x)
        xs = [x // g for x in xs]
        ext = extend_to_unimodular(xs)
        m = k - i
        block = _int_identity(k)
        for r in range(m):
            for c in range(m):
                block[i + r][i + c] = ext[r][c]
        b = _apply_transform(b, block)
        u = _int_matmul(u, block)
    _size_reduce_all(b, u)
    f2 = Fraction(k + 3, 4)
    return ReductionReport(b, u, sqrt_ceil(f2), f2, "kz")


def _int_matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def reduce_basis(basis, mode: str = "lll") -> ReductionReport:
    if mode == "lll":
        return lll_reduce(basis)
    if mode == "kz":
        return kz_reduce(basis)
    raise PreconditionError(f"unknown reduction mode {mode!r}")


def int_det(m: IntMatrix) -> int:
    return int(determinant(m))


# --- normal forms --------------------------------------------------------------------


def hnf(matrix: Sequence[Sequence[int]]) -> IntMatrix:
    """Column-style Hermite normal form (upper triangular); zero columns dropped."""
    h = hermite_normal_form(SMatrix([[int(x) for x in row] for row in matrix]))
    return [[int(h[i, j]) for j in range(h.cols)] for i in range(h.rows)]


def snf(matrix: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (D, S, T) with D = S * A * T, S and T unimodular, D diagonal with d_i | d_{i+1}."""
    d, s, t = smith_normal_decomp(SMatrix([[int(x) for x in row] for row in matrix]))

    def conv(m):
        return [[int(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]

    return conv(d), conv(s), conv(t)


def elementary_divisors(matrix: Sequence[Sequence[int]]) -> list[int]:
    d, _, _ = snf(matrix)
    return [abs(d[i][i]) for i in range(min(len(d), len(d[0])))]


def lattice_hnf(lattice) -> tuple:
    """Canonical key: (denominator, HNF of the integer-scaled basis rows)."""
    cols = _cols(lattice)
    den = common_denominator(x for c in cols for x in c)
    rows = transpose([[int(x * den) for x in c] for c in cols])
    h = hnf(rows)
    return (den, tuple(tuple(r) for r in h)) if den == 1 else _normalize_key(den, h)


def _normalize_key(den: int, h: IntMatrix) -> tuple:
    g = 0
    for row in h:
        for x in row:
            g = gcd(g, x)
    g = gcd(g, den)
    return (den // g, tuple(tuple(x // g for x in row) for row in h))


def triangular_basis(lattice) -> list[list[Fraction]]:
    """Upper-triangular basis (as columns) of a full-rank lattice, positive diagonal."""
    den, h = lattice_hnf(lattice)
    rows = [[Fraction(x, den) for x in row] for row in h]
    return transpose(rows)


def solve_coefficients(lattice, v: Sequence) -> list[Fraction]:
    cols = _cols(lattice)
    if len(cols) != len(cols[0]):
        raise PreconditionError("coefficient solve needs a full-rank lattice")
    inv = inverse(transpose(cols))
    vv = [as_fraction(x) for x in v]
    return [dot(row, vv) for row in inv]


def dual_lattice(lattice) -> Lattice:
    """Basis given by the inverse transpose of the basis matrix."""
    cols = _cols(lattice)
    if len(cols) != len(cols[0]):
        raise PreconditionError("dual lattice implemented for full rank only")
    inv = inverse(transpose(cols))  # rows of B^{-1} are the dual basis vectors
    return Lattice.from_columns(inv)


# --- enumeration in boxes ------------------------------------------------------------


def box_points(
    tri_cols: Sequence[Sequence[Fraction]],
    lo: Sequence[Fraction],
    hi: Sequence[Fraction],
    hi_closed: bool = False,
    lo_closed: bool = True,
    budget: int = 10_000_000,
) -> Iterator[tuple[Fraction, ...]]:
    """Lattice points x with lo <= x < hi (closure flags adjustable), for an upper-triangular basis."""
    n = len(tri_cols)
    count = [0]
    pt = [Fraction(0)] * n

    def ok_lo(x, l):
        return x >= l if lo_closed else x > l

    def ok_hi(x, h):
        return x <= h if hi_closed else x < h

    def rec(i: int, partial: list[Fraction]):
        if i < 0:
            count[0] += 1
            if count[0] > budget:
                raise BudgetError("box enumeration budget exceeded")
            yield tuple(partial)
            return
        d = tri_cols[i][i]
        base = partial[i]
        cmin = ceil_frac((lo[i] - base) / d)
        cmax = floor_frac((hi[i] - base) / d)
        for c in range(cmin, cmax + 1):
            x = base + c * d
            if not (ok_lo(x, lo[i]) and ok_hi(x, hi[i])):
                continue
            nxt = [partial[r] + c * tri_cols[i][r] for r in range(n)]
            yield from rec(i - 1, nxt)

    yield from rec(n - 1, list(pt))


@dataclass(frozen=True)
class WindowCount:
    count: int
    lower: Fraction | None
    upper: Fraction | None
    asserted: bool


def window_points(lattice: Lattice, b, budget: int = 10_000_000) -> list[tuple[Fraction, ...]]:
    b = as_fraction(b)
    tri = triangular_basis(lattice)
    n = lattice.n
    return list(box_points(tri, [Fraction(0)] * n, [b] * n, budget=budget))


def count_window_points(lattice: Lattice, b, nu_upper: Fraction | None = None, budget: int = 10_000_000) -> WindowCount:
    """Exact |L ∩ [0,b)^n| with the sandwich bounds when b > 2ν."""
    b = as_fraction(b)
    n = lattice.n
    cnt = len(window_points(lattice, b, budget))
    nu = lattice.nu_upper if nu_upper is None else nu_upper
    if b <= 2 * nu:
        return WindowCount(cnt, None, None, False)
    lower = (b - 2 * nu) ** n / lattice.det
    upper = (b + 2 * nu) ** n / lattice.det
    return WindowCount(cnt, lower, upper, True)


def covering_radius_bound(lattice: Lattice) -> Fraction:
    """Certified rational upper bound on the covering radius."""
    if not lattice.full_rank:
        raise PreconditionError("covering radius bound needs full rank")
    n = lattice.n
    det = lattice.det
    l1_lo = lattice.lambda1_lower
    if n == 1:
        return det / 2
    second = Fraction(1, 2) * pow_half_ceil(Fraction(n), n + 1) * det / l1_lo ** (n - 1)
    if n <= 4:
        ln2 = successive_minima_sq(lattice)[-1]
        first = sqrt_ceil(Fraction(n) * ln2) / 2
        return min(first, second)
    return second


def hyperplane_count_bound(n: int, k: int, b, nu_upper, det) -> Fraction:
    """Upper bound n^{k/2}(b+2ν)^k(2ν)^{n-k}/det on lattice points in a k-dim affine slice of [0,b)^n."""
    b, nu, det = as_fraction(b), as_fraction(nu_upper), as_fraction(det)
    return pow_half_ceil(Fraction(n), k) * (b + 2 * nu) ** k * (2 * nu) ** (n - k) / det


def window_points_np(lattice: Lattice, b, budget: int = 20_000_000) -> tuple[int, np.ndarray]:
    """(scale, P) with P/scale the points of L ∩ [0,b)^n as an integer array."""
    b = as_fraction(b)
    tri = triangular_basis(lattice)
    n = lattice.n
    scale = common_denominator([b] + [x for c in tri for x in c])
    T = [np.array([int(x * scale) for x in col], dtype=np.int64) for col in tri]
    B = int(b * scale)
    part = np.zeros((1, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        d = int(T[i][i])
        base = part[:, i]
        cmin = -((-(0 - base)) // d)
        cmax = (B - 1 - base) // d
        counts = np.maximum(cmax - cmin + 1, 0)
        total = int(counts.sum())
        if total > budget:
            raise BudgetError("window enumeration budget exceeded")
        rep = np.repeat(np.arange(len(part)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        c = cmin[rep] + (np.arange(total) - starts)
        part = part[rep] + c[:, None] * T[i][None, :]
    return scale, part
