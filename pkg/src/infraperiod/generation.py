"""Probability that random window points span or generate a lattice, and the finite abelian
group machinery behind it."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, prod
from typing import Sequence

import mpmath
import numpy as np

from .errors import PreconditionError
from .lattice import Lattice, elementary_divisors, hnf, lattice_hnf, snf, solve_coefficients, window_points_np
from .rational import as_fraction, pow_half_ceil

# --- closed-form constants ---------------------------------------------------------


def span_product(n: int) -> Fraction:
    """Π_{i=1}^{n-1} (1 - 2^{-i})."""
    return prod((1 - Fraction(1, 2**i) for i in range(1, n)), start=Fraction(1))


def span_window_factor(n: int) -> Fraction:
    """max{8n - 2, n^{(n-1)/2} 2^{n+1} - 2}, rounded up to a rational."""
    return max(Fraction(8 * n - 2), pow_half_ceil(Fraction(n), n - 1) * 2 ** (n + 1) - 2)


def _prime_sieve(limit: int) -> np.ndarray:
    is_p = np.ones(limit, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.nonzero(is_p)[0]


@lru_cache(maxsize=None)
def zeta_product_bound(n: int, prime_limit: int = 10**6) -> Fraction:
    """Rational lower bound on Π_{i=2}^{n+1} ζ(i)^{-1} from a truncated Euler product.

    The omitted primes p >= P contribute a factor at least 1 - Σ_{p>=P} 1/(p(p-1)) >= 1 - 1/(P-1).
    """
    if n < 1:
        raise PreconditionError("n >= 1 required")
    primes = _prime_sieve(prime_limit)
    with mpmath.workprec(100):
        acc = mpmath.mpf(1)
        for p in primes.tolist():
            x = mpmath.mpf(p)
            for i in range(2, n + 2):
                acc *= 1 - x ** (-i)
        acc *= 1 - mpmath.mpf(1) / (prime_limit - 1)
        lower = Fraction(int(mpmath.floor(acc * 10**15)), 10**15) - Fraction(1, 10**14)
    return lower


def zeta_upper(s: int, terms: int = 4000, scale: int = 10**40) -> Fraction:
    """Rational upper bound on ζ(s): rounded-up partial sum plus the integral tail K^{1-s}/(s-1)."""
    if s < 2:
        raise PreconditionError("s >= 2 required")
    acc = sum(-(-scale // k**s) for k in range(1, terms + 1))
    return Fraction(acc, scale) + Fraction(1, (s - 1) * terms ** (s - 1))


@lru_cache(maxsize=None)
def zeta_product_lower(n: int) -> Fraction:
    """Π_{i=2}^{n+1} ζ(i)^{-1} from below via Dirichlet-series upper bounds (fast route)."""
    return prod((1 / zeta_upper(i) for i in range(2, n + 2)), start=Fraction(1))


def zeta_lower(s: int, terms: int = 4000, scale: int = 10**40) -> Fraction:
    """Rational lower bound on ζ(s): rounded-down partial sum plus the tail (K+1)^{1-s}/(s-1)."""
    if s < 2:
        raise PreconditionError("s >= 2 required")
    acc = sum(scale // k**s for k in range(1, terms + 1))
    return Fraction(acc, scale) + Fraction(1, (s - 1) * (terms + 1) ** (s - 1))


@lru_cache(maxsize=None)
def zeta_product_upper(n: int) -> Fraction:
    """Π_{i=2}^{n+1} ζ(i)^{-1} from above."""
    return prod((1 / zeta_lower(i) for i in range(2, n + 2)), start=Fraction(1))


def zeta_product_reference(n: int) -> float:
    """Π ζ(i)^{-1} straight from mpmath's ζ, for comparison."""
    return float(prod(1 / mpmath.zeta(i) for i in range(2, n + 2)))


ZETA_HAT_LOWER = Fraction(434, 1000)


# --- window sampling -----------------------------------------------------------------


@dataclass
class WindowSample:
    lattice: Lattice
    b: Fraction
    scale: int
    points: np.ndarray  # scaled integer coordinates

    @classmethod
    def build(cls, lattice: Lattice, b) -> "WindowSample":
        b = as_fraction(b)
        scale, pts = window_points_np(lattice, b)
        if len(pts) == 0:
            raise PreconditionError("empty window")
        return cls(lattice, b, scale, pts)

    def draw(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return self.points[rng.integers(0, len(self.points), size=k)]


def _int_det(rows: np.ndarray) -> int:
    m = [[int(x) for x in r] for r in rows]
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return sum((-1) ** j * m[0][j] * _int_det(np.array([r[:j] + r[j + 1 :] for r in m[1:]], dtype=object))
               for j in range(n))


def span_probability_trial(ws: WindowSample, rng: np.random.Generator) -> bool:
    """Do n uniform window points span R^n?"""
    n = ws.lattice.n
    return _int_det(ws.draw(rng, n)) != 0


def span_fraction(ws: WindowSample, trials: int, rng: np.random.Generator) -> float:
    n = ws.lattice.n
    draws = ws.points[rng.integers(0, len(ws.points), size=(trials, n))].astype(object)
    if n == 1:
        det = draws[:, 0, 0]
    elif n == 2:
        det = draws[:, 0, 0] * draws[:, 1, 1] - draws[:, 0, 1] * draws[:, 1, 0]
    elif n == 3:
        a = draws
        det = (a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1])
               - a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0])
               + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0]))
    else:
        det = np.array([_int_det(d) for d in draws], dtype=object)
    return float(np.mean(det != 0))


# --- finite abelian groups -----------------------------------------------------------


def generates_group(divisors: Sequence[int], elements: Sequence[Sequence[int]]) -> bool:
    """Do the elements generate Z/d_1 x ... x Z/d_r? SNF of the stacked relation matrix."""
    r = len(divisors)
    if r == 0 or all(d == 1 for d in divisors):
        return True
    cols = [list(e) for e in elements] + [[d if i == j else 0 for i in range(r)] for j, d in enumerate(divisors)]
    rows = [[c[i] for c in cols] for i in range(r)]
    ed = elementary_divisors(rows)
    return len(ed) == r and all(x == 1 for x in ed)


def group_generation_trial(divisors: Sequence[int], count: int, rng: np.random.Generator) -> bool:
    els = [[int(rng.integers(0, d)) for d in divisors] for _ in range(count)]
    return generates_group(divisors, els)


def _subgroup_closure(divisors: tuple[int, ...], gens: frozenset) -> frozenset:
    seen = {tuple(0 for _ in divisors)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % d for a, b, d in zip(x, g, divisors))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def exact_generation_probability(divisors: Sequence[int], count: int) -> Fraction:
    """Exact Pr(count uniform elements generate G), summing over every tuple.

    The sum is organized as a recursion on the subgroup generated so far, so tuples sharing a
    prefix subgroup are counted together; no formula for the answer is used.
    """
    divs = tuple(int(d) for d in divisors if d != 1)
    order = prod(divs, start=1)
    elements = list(itertools.product(*[range(d) for d in divs]))
    whole = frozenset(elements)
    join_cache: dict = {}

    def join(h: frozenset, g) -> frozenset:
        key = (h, g)
        if key not in join_cache:
            join_cache[key] = h if g in h else _subgroup_closure(divs, frozenset(h) | {g})
        return join_cache[key]

    @lru_cache(maxsize=None)
    def ways(h: frozenset, remaining: int) -> int:
        if len(h) == order:
            return order**remaining
        if remaining == 0:
            return 0
        return sum(ways(join(h, g), remaining - 1) for g in elements)

    trivial = frozenset({tuple(0 for _ in divs)})
    return Fraction(ways(trivial, count), order**count)


def abelian_groups_up_to(order_max: int) -> list[tuple[int, ...]]:
    """Invariant factor lists (d_1 | d_2 | ...) of all abelian groups of order <= order_max."""
    from sympy import factorint
    from sympy.utilities.iterables import partitions

    out = []
    for m in range(1, order_max + 1):
        fac = factorint(m)
        per_prime = []
        for p, e in fac.items():
            opts = []
            for part in partitions(e):
                exps = sorted([k for k, c in part.items() for _ in range(c)], reverse=True)
                opts.append(exps)
            per_prime.append([(p, ex) for ex in opts])
        for combo in itertools.product(*per_prime) if per_prime else [()]:
            r = max((len(ex) for _, ex in combo), default=0)
            inv = []
            for i in range(r):
                d = 1
                for p, ex in combo:
                    if i < len(ex):
                        d *= p ** ex[i]
                inv.append(d)
            out.append(tuple(sorted(inv)))
    return out


def group_rank(divisors: Sequence[int]) -> int:
    return sum(1 for d in divisors if d != 1)


# --- quotients -----------------------------------------------------------------------


@dataclass
class QuotientGroup:
    lattice: Lattice
    sub: Lattice
    divisors: list[int]
    left: list[list[int]]  # S with S T V = diag(d)

    @classmethod
    def build(cls, lattice: Lattice, sub: Lattice) -> "QuotientGroup":
        T = [[solve_coefficients(lattice, col)[i] for col in sub.columns] for i in range(lattice.n)]
        if any(x.denominator != 1 for row in T for x in row):
            raise PreconditionError("sub is not a sublattice")
        Ti = [[int(x) for x in row] for row in T]
        d, s, _ = snf(Ti)
        divs = [abs(d[i][i]) for i in range(len(d))]
        return cls(lattice, sub, divs, s)

    @property
    def index(self) -> int:
        return prod(self.divisors, start=1)

    def classify(self, coeffs: np.ndarray) -> np.ndarray:
        """Coset labels for rows of lattice coefficient vectors."""
        S = np.array(self.left, dtype=object)
        img = coeffs.astype(object) @ S.T
        d = np.array(self.divisors, dtype=object)
        return img % d[None, :]


def quotient_tv_bound(nu_sub_upper: Fraction, nu_upper: Fraction, b0, n: int) -> Fraction:
    b0 = as_fraction(b0)
    if b0 <= 2 * nu_sub_upper:
        raise PreconditionError("b0 must exceed 2ν(L0)")
    return 1 - (b0 - 2 * nu_sub_upper) ** n / (b0 + 2 * nu_upper) ** n


def quotient_uniformity_distance(lattice: Lattice, sub: Lattice, b0) -> tuple[Fraction, Fraction]:
    """(exact total-variation distance, bound) for the coset of a uniform window point."""
    b0 = as_fraction(b0)
    bound = quotient_tv_bound(sub.nu_upper, lattice.nu_upper, b0, lattice.n)
    qg = QuotientGroup.build(lattice, sub)
    scale, pts = window_points_np(lattice, b0)
    inv = [[x for x in row] for row in _inverse_scaled(lattice, scale)]
    coeffs = np.array([[sum(Fraction(int(p)) * c for p, c in zip(pt, row)) for row in inv] for pt in pts.tolist()],
                      dtype=object)
    if any(x.denominator != 1 for x in coeffs.ravel()):
        raise PreconditionError("internal: non-integral coefficients")
    coeffs = np.vectorize(int, otypes=[object])(coeffs)
    labels = qg.classify(coeffs)
    counts: dict = {}
    for lab in map(tuple, labels.tolist()):
        counts[lab] = counts.get(lab, 0) + 1
    total = len(pts)
    m = qg.index
    tv = Fraction(0)
    for lab in itertools.product(*[range(d) for d in qg.divisors]):
        tv += abs(Fraction(counts.get(lab, 0), total) - Fraction(1, m))
    return tv / 2, bound


def _inverse_scaled(lattice: Lattice, scale: int):
    from .rational import inverse, transpose

    inv = inverse(transpose(lattice.columns))
    return [[x / scale for x in row] for row in inv]


# --- generating the whole lattice ---------------------------------------------------


def generates_lattice(lattice: Lattice, scale: int, vectors: np.ndarray) -> bool:
    """Exact test that the scaled integer vectors generate the lattice (gcd of maximal minors)."""
    n = lattice.n
    coeffs = _coefficients(lattice, scale, vectors)
    g = 0
    for rows in itertools.combinations(range(len(coeffs)), n):
        g = gcd(g, _int_det(np.array([coeffs[r] for r in rows], dtype=object)))
        if g == 1:
            return True
    return False


def generates_lattice_hnf(lattice: Lattice, scale: int, vectors: np.ndarray) -> bool:
    """Same question answered by comparing Hermite normal forms."""
    cols = [[Fraction(int(x), scale) for x in v] for v in vectors.tolist()]
    from .rational import common_denominator, transpose

    den = common_denominator([x for c in cols for x in c] + [x for c in lattice.columns for x in c])
    rows = transpose([[int(x * den) for x in c] for c in cols])
    h = hnf(rows)
    if len(h[0]) < lattice.n:
        return False
    ref = transpose([[int(x * den) for x in c] for c in lattice.columns])
    return h == hnf(ref)


def _coefficients(lattice: Lattice, scale: int, vectors: np.ndarray) -> list[list[int]]:
    inv = _inverse_scaled(lattice, scale)
    out = []
    for v in vectors.tolist():
        c = [sum(Fraction(int(x)) * y for x, y in zip(v, row)) for row in inv]
        out.append([int(x) for x in c])
    return out


def full_generation_trial(small: WindowSample, big: WindowSample, rng: np.random.Generator) -> tuple[bool, bool]:
    """(first n span, all 2n+1 generate) for n draws from the small window and n+1 from the big one."""
    n = small.lattice.n
    if small.scale != big.scale:
        raise PreconditionError("windows must share a scale")
    a = small.draw(rng, n)
    spans = _int_det(a) != 0
    b = big.draw(rng, n + 1)
    return spans, generates_lattice(small.lattice, small.scale, np.vstack([a, b]))


def generation_window_ok(n: int, b, b0) -> bool:
    """b0 >= 8n^2(n+1) b."""
    return as_fraction(b0) >= 8 * n * n * (n + 1) * as_fraction(b)


def one_dim_generation_trial(v, b, rng: np.random.Generator) -> bool:
    """Two uniform points of vZ ∩ [0,b) generate vZ."""
    v, b = as_fraction(v), as_fraction(b)
    count = int(-(-b // v)) if (b / v).denominator != 1 else int(b / v)
    k1, k2 = (int(x) for x in rng.integers(0, count, size=2))
    return gcd(k1, k2) == 1



def one_dim_generation_bound() -> float:
    """3^3/(π^2 2^3)."""
    return float(mpmath.mpf(27) / (8 * mpmath.pi**2))


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    den = 1 + z * z / trials
    c = (p + z * z / (2 * trials)) / den
    h = z * (p * (1 - p) / trials + z * z / (4 * trials * trials)) ** 0.5 / den
    return c - h, c + h
