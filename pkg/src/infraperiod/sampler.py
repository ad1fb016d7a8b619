"""Classical simulation of the period-finding measurement: collision sets, Fourier outcome
distributions over the output window, rounding targets and the dual-vector probability bounds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import iv

from .errors import BudgetError, CheckFailure, PreconditionError
from .infrastructure import BoxInfrastructure, GridSpec, ScaledGrid, in_hbound, shift_is_good
from .lattice import Lattice, box_points, triangular_basis
from .rational import as_fraction, ceil_frac, floor_frac, round_half_up

TERM_BUDGET = 10**9
IV_PREC = 120


@dataclass
class CollisionSet:
    grid: GridSpec
    anchor: tuple[int, ...]
    value: tuple[int, tuple[int, ...]]
    members: np.ndarray  # (M, n) integer grid indices, lexicographically sorted
    anchor_in_hbound: bool = False

    @property
    def M(self) -> int:
        return len(self.members)

    def progression(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(start, step) if the members form an arithmetic progression, else None."""
        m = self.members
        if len(m) == 1:
            return m[0], np.zeros_like(m[0])
        d = m[1] - m[0]
        expect = m[0][None, :] + np.arange(len(m))[:, None] * d[None, :]
        if np.array_equal(expect, m):
            return m[0], d
        return None


def _sorted_rows(a: np.ndarray) -> np.ndarray:
    if len(a) == 0:
        return a
    order = np.lexsort(a.T[::-1])
    return a[order]


def f_table(sg: ScaledGrid) -> tuple[np.ndarray, np.ndarray]:
    """f over the whole of 𝒱: (cell index, floor(N t)) for each v in row-major order."""
    return sg.f_values(sg.all_v())


def build_collision_set_scan(
    infra: BoxInfrastructure, grid: GridSpec, anchor: Sequence[int], sg: ScaledGrid | None = None, table=None
) -> CollisionSet:
    """ℳ by evaluating f at every grid point."""
    sg = sg or ScaledGrid(infra, grid)
    if grid.V * grid.n > 5 * 10**8:
        raise BudgetError("grid too large for a full scan")
    allv = sg.all_v()
    cell, fl = table if table is not None else sg.f_values(allv)
    idx = int(np.ravel_multi_index(tuple(anchor), (grid.side_v,) * grid.n))
    same = (cell == cell[idx]) & np.all(fl == fl[idx][None, :], axis=1)
    members = _sorted_rows(np.asarray(allv[same], dtype=np.int64))
    value = (infra.cells[int(cell[idx])].id, tuple(int(x) for x in fl[idx]))
    return CollisionSet(grid, tuple(int(x) for x in anchor), value, members,
                        in_hbound(infra, grid.point(anchor), grid.N))


def build_collision_set(
    infra: BoxInfrastructure, grid: GridSpec, anchor: Sequence[int], sg: ScaledGrid | None = None
) -> CollisionSet:
    """ℳ without scanning 𝒱: one candidate per lattice translate of the anchor's cell."""
    sg = sg or ScaledGrid(infra, grid)
    n, S, step = grid.n, sg.S, sg.step
    v = np.array([anchor], dtype=sg.dtype)
    cell, fl = sg.f_values(v)
    ci, k = int(cell[0]), fl[0]
    from .infrastructure import _window_translates

    X = _window_translates(sg, ci)
    # v' is the unique integer point of N(x̂ + λ - s) + k + [0, 1)^n
    base = X - sg.shift[None, :] + (k[None, :] * step)
    cand = -((-base) // step)
    vmax = grid.side_v - 1
    ok = np.all((cand >= 0) & (cand <= vmax), axis=1)
    cand = cand[ok]
    Xc = X[ok]
    T = sg.shift[None, :] + cand * step - Xc
    inside = np.zeros(len(cand), dtype=bool)
    for a in sg.sizes[ci]:
        inside |= np.all((T >= 0) & (T < a[None, :]), axis=1)
    cand, T = cand[inside], T[inside]
    same = np.all((T * grid.N) // S == k[None, :], axis=1)
    members = _sorted_rows(np.asarray(cand[same], dtype=np.int64))
    value = (infra.cells[ci].id, tuple(int(x) for x in k))
    return CollisionSet(grid, tuple(int(x) for x in anchor), value, members,
                        in_hbound(infra, grid.point(anchor), grid.N))


def measure_anchor(grid: GridSpec, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform v in 𝒱; its value f(v) is then distributed exactly like the measurement outcome."""
    return tuple(int(x) for x in rng.integers(0, grid.side_v, size=grid.n))


def m_lower(grid: GridSpec, det_lambda: Fraction, nu_upper: Fraction) -> Fraction:
    """M_ℓ = (q^n/det Λ)(1 - 3n/(qN) - 2nν/q) with ν replaced by an upper bound."""
    n, q, N = grid.n, grid.q, grid.N
    return Fraction(q**n) / det_lambda * (1 - Fraction(3 * n, q * N) - 2 * n * nu_upper / q)


# --- collision characterization -------------------------------------------------------


def _lattice_vectors_near(tri, center: Sequence[Fraction], radius: Fraction, scale: int) -> list:
    """λ with ||scale*λ - center||_inf < radius."""
    lo = [(c - radius) / scale for c in center]
    hi = [(c + radius) / scale for c in center]
    return list(box_points(tri, lo, hi, lo_closed=False, hi_closed=False))


def verify_collision_properties(
    infra: BoxInfrastructure, grid: GridSpec, coll: CollisionSet, nu_upper: Fraction | None = None
) -> dict:
    """Exhaustive check of the three collision statements for one anchor.

    (i) every member v' has exactly one λ with ||(v - v') - Nλ|| < 1 - 1/L;
    (ii) every λ with v + Nλ in [1, qN-2]^n has exactly one member near v + Nλ;
    (iii) M >= M_ℓ.
    """
    tri = infra.tri
    n, N = grid.n, grid.N
    r = 1 - Fraction(1, grid.L)
    v = [Fraction(x) for x in coll.anchor]
    ok_i = True
    for vp in coll.members.tolist():
        d = [a - b for a, b in zip(v, vp)]
        if len(_lattice_vectors_near(tri, d, r, N)) != 1:
            ok_i = False
            break
    ok_ii = True
    lo = [(1 - x) / N for x in v]
    hi = [(grid.side_v - 2 - x) / N for x in v]
    mem = coll.members
    for lam in box_points(tri, lo, hi, hi_closed=True):
        target = np.array([float(x + N * l) for x, l in zip(v, lam)])
        near = np.all(np.abs(mem - target[None, :]) < 1, axis=1)  # prefilter, then exact
        cnt = 0
        for vp in mem[near].tolist():
            if all(abs(Fraction(b) - a - N * l) < r for a, b, l in zip(v, vp, lam)):
                cnt += 1
        if cnt != 1:
            ok_ii = False
            break
    nu = infra.lattice.nu_upper if nu_upper is None else nu_upper
    ml = m_lower(grid, infra.lattice.det, nu)
    return {"i": ok_i, "ii": ok_ii, "iii": coll.M >= ml, "M": coll.M, "M_lower": ml}


# --- Fourier distribution --------------------------------------------------------------


@dataclass
class FourierDistribution:
    grid: GridSpec
    M: int
    probs: np.ndarray  # shape (side_w,)*n
    error_bound: float  # certified bound on |computed - exact| per entry

    def total(self) -> float:
        return float(self.probs.sum(dtype=np.float64))

    def prob(self, w: Sequence[int]) -> float:
        return float(self.probs[tuple(int(x) for x in w)])


def _amplitude_error(M: int) -> float:
    # table values within 2 ulp of cos/sin; summation of M unit terms adds at most M^2 u
    u = 2.0**-53
    return 2.0 * M * u * 2 + M * M * u


def exact_distribution(
    coll: CollisionSet, method: str = "direct", budget: int = TERM_BUDGET
) -> FourierDistribution:
    """Pr(w) = |Σ_{v'∈ℳ} e(v'·w/K)|² / (M W) for every w in 𝒲, K = 2nqN.

    ``direct`` accumulates the phase index (v'·w mod K); ``factored`` multiplies per-axis phases.
    """
    grid = coll.grid
    n, K, M = grid.n, grid.side_w, coll.M
    if M * grid.W > budget:
        raise BudgetError(
            f"{M * grid.W} terms exceed the budget; use targets-only probabilities on rounding sets"
        )
    ang = 2 * np.pi * np.arange(K) / K
    ctab, stab = np.cos(ang), np.sin(ang)
    shape = (K,) * n
    re = np.zeros(shape)
    im = np.zeros(shape)
    w1 = np.arange(K, dtype=np.int64)
    for vp in coll.members:
        if method == "direct":
            idx = np.zeros(shape, dtype=np.int64)
            for ax in range(n):
                sh = [1] * n
                sh[ax] = K
                idx = idx + ((int(vp[ax]) * w1) % K).reshape(sh)
            idx %= K
            re += ctab[idx]
            im += stab[idx]
        elif method == "factored":
            fr = np.ones(shape)
            fi = np.zeros(shape)
            for ax in range(n):
                sh = [1] * n
                sh[ax] = K
                k = (int(vp[ax]) * w1) % K
                cr, ci = ctab[k].reshape(sh), stab[k].reshape(sh)
                fr, fi = fr * cr - fi * ci, fr * ci + fi * cr
            re += fr
            im += fi
        else:
            raise PreconditionError(f"unknown method {method!r}")
    probs = (re * re + im * im) / (M * grid.W)
    ea = _amplitude_error(M) * (n + 1)
    err = (2 * M * ea + ea * ea) / (M * grid.W)
    return FourierDistribution(grid, M, probs, err)


def sample_w(dist: FourierDistribution, rng: np.random.Generator) -> tuple[int, ...]:
    p = dist.probs.ravel()
    p = np.clip(p, 0, None)
    idx = int(rng.choice(p.size, p=p / p.sum()))
    return tuple(int(x) for x in np.unravel_index(idx, dist.probs.shape))


def sample_w_rejection(coll: CollisionSet, rng: np.random.Generator, batch: int = 1 << 16) -> tuple[int, ...]:
    """Draw w without tabulating the distribution.

    Propose w uniformly and accept with probability |Σ e(v'·w/K)|²/M², which is at most 1.
    The acceptance rate is exactly 1/M. Arithmetic progressions use the closed-form kernel.
    """
    grid = coll.grid
    n, K, M = grid.n, grid.side_w, coll.M
    ap = coll.progression()
    mem = coll.members
    while True:
        w = rng.integers(0, K, size=(batch, n))
        if ap is not None:
            d = np.array([int(x) % K for x in ap[1]], dtype=np.int64)
            if int(d.max(initial=0)) * K * n >= 2**62 or M * K >= 2**62:
                raise BudgetError("progression kernel would overflow 64-bit phase arithmetic")
            a = (w * d[None, :]).sum(axis=1) % K
            b = (a * M) % K
            sa = np.sin(np.pi * a / K)
            sb = np.sin(np.pi * b / K)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(a == 0, 1.0, (sb * sb) / (sa * sa) / (M * M))
        else:
            sub = max(1, min(batch, 10**7 // max(M, 1)))
            w = w[:sub]
            ph = np.zeros((len(w), M), dtype=np.int64)
            for ax in range(n):
                ph = (ph + np.outer(w[:, ax], mem[:, ax]) % K) % K
            ang = 2 * np.pi * ph / K
            re, im = np.cos(ang).sum(axis=1), np.sin(ang).sum(axis=1)
            ratio = (re * re + im * im) / (M * M)
        u = rng.random(len(ratio))
        hit = np.nonzero(u < ratio)[0]
        if len(hit):
            return tuple(int(x) for x in w[hit[0]])


# --- rounding targets ----------------------------------------------------------------


@dataclass(frozen=True)
class DualApproxTarget:
    lam_star: tuple[Fraction, ...]
    R: tuple[tuple[int, ...], ...]
    mode: str  # "box" (floor and floor+1 per axis) or "nearest"


def rounding_set(lam_star: Sequence, grid: GridSpec, mode: str = "box") -> DualApproxTarget:
    ls = tuple(as_fraction(x) for x in lam_star)
    n, q = grid.n, grid.q
    if mode == "box":
        base = [floor_frac(2 * n * q * x) for x in ls]
        R = tuple(itertools.product(*[(b, b + 1) for b in base]))
    elif mode == "nearest":
        R = (tuple(round_half_up(2 * n * q * x) for x in ls),)
    else:
        raise PreconditionError(f"unknown rounding mode {mode!r}")
    return DualApproxTarget(ls, R, mode)


def target_in_window(target: DualApproxTarget, grid: GridSpec) -> bool:
    """R ⊂ [0, 2nqκN]^n."""
    top = 2 * grid.n * grid.q * grid.kappa * grid.N
    return all(0 <= w and w <= top for r in target.R for w in r)


def in_window_targets(dual: Lattice, grid: GridSpec, mode: str = "box") -> list[DualApproxTarget]:
    n, q = grid.n, grid.q
    tri = triangular_basis(dual)
    lo = [Fraction(-1, 2 * n * q)] * n
    hi = [grid.kappa * grid.N + Fraction(1, 2 * n * q)] * n
    out = []
    for lam in box_points(tri, lo, hi, hi_closed=True):
        t = rounding_set(lam, grid, mode)
        if target_in_window(t, grid):
            out.append(t)
    out.sort(key=lambda t: t.lam_star)
    return out


def approximation_error_ok(target: DualApproxTarget, grid: GridSpec) -> bool:
    """Each w in R satisfies the stated approximation radius."""
    n, q = grid.n, grid.q
    for w in target.R:
        err2 = sum((Fraction(wi, 2 * n * q) - l) ** 2 for wi, l in zip(w, target.lam_star))
        if target.mode == "nearest":
            if err2 > Fraction(1, 4 * q) ** 2 * n:
                return False
        elif err2 * 4 * n * q * q > 1:
            return False
    return True


# --- certified probabilities and bounds -----------------------------------------------


def _iv_prob(coll: CollisionSet, ws: Sequence[Sequence[int]]):
    grid = coll.grid
    K = grid.side_w
    iv.prec = IV_PREC
    twopi_over_k = 2 * iv.pi / K
    cache: dict[int, tuple] = {}
    total = iv.mpf(0)
    mem = coll.members.tolist()
    for w in ws:
        re = iv.mpf(0)
        im = iv.mpf(0)
        for vp in mem:
            k = sum(int(a) * int(b) for a, b in zip(vp, w)) % K
            if k not in cache:
                x = twopi_over_k * k
                cache[k] = (iv.cos(x), iv.sin(x))
            c, s = cache[k]
            re += c
            im += s
        total += re * re + im * im
    return total / (coll.M * grid.W)


def prob_of_target(coll: CollisionSet, target: DualApproxTarget, require_window: bool = True):
    """Certified enclosure (mpmath interval) of Pr(R) for the fixed collision set."""
    if require_window and not target_in_window(target, coll.grid):
        raise PreconditionError("rounding set leaves the sampling window")
    return _iv_prob(coll, target.R)


def cos_constant(grid: GridSpec, form: str = "half"):
    """Interval enclosure of cos²(π(1/4 + δ + 2κn)), δ = 1/(2qN) ("half") or 1/(4qN) ("quarter")."""
    iv.prec = IV_PREC
    n, q, N = grid.n, grid.q, grid.N
    delta = Fraction(1, 2 * q * N) if form == "half" else Fraction(1, 4 * q * N)
    arg = Fraction(1, 4) + delta + 2 * grid.kappa * n
    c = iv.cos(iv.pi * iv.mpf(arg.numerator) / arg.denominator)
    return c * c


def box_bound(grid: GridSpec, m_low: Fraction, form: str = "half"):
    """2^{n-1} M_ℓ c / W as an interval."""
    iv.prec = IV_PREC
    ml = iv.mpf(m_low.numerator) / m_low.denominator
    return 2 ** (grid.n - 1) * ml * cos_constant(grid, form) / grid.W


def nearest_bound_1d(grid: GridSpec, M: int | Fraction):
    """(M/W) cos²(π(1/4 + 1/(4qN) + 2κ)) for the one-dimensional nearest rounding."""
    iv.prec = IV_PREC
    Mf = as_fraction(M)
    return iv.mpf(Mf.numerator) / Mf.denominator * cos_constant(grid, "quarter") / grid.W


def kappa_ok_1d_nearest(grid: GridSpec) -> bool:
    return grid.kappa < Fraction(1, 8) - Fraction(1, 8 * grid.q * grid.N)


def certified_ge(lhs, rhs) -> bool:
    """lhs >= rhs for every point of both intervals."""
    return lhs.a >= rhs.b


# --- repeated sampling -----------------------------------------------------------------


@dataclass
class SampleRecord:
    w: tuple[int, ...]
    grid: GridSpec
    anchor: tuple[int, ...]
    M: int
    good_shift: bool
    anchor_in_hbound: bool

    def to_json(self) -> dict:
        return {"w": list(self.w), "grid": self.grid.to_json(), "anchor": list(self.anchor), "M": self.M,
                "good_shift": self.good_shift, "anchor_in_hbound": self.anchor_in_hbound}


def draw_sample(
    infra: BoxInfrastructure, grid: GridSpec, rng: np.random.Generator, mode: str = "targets-only",
    budget: int = TERM_BUDGET, good: bool | None = None,
) -> SampleRecord:
    """One run of steps 1-4 on a fixed grid: anchor, collision set, outcome w."""
    good = shift_is_good(infra, grid) if good is None else good
    anchor = measure_anchor(grid, rng)
    coll = build_collision_set(infra, grid, anchor)
    if mode == "exact-dist":
        w = sample_w(exact_distribution(coll, budget=budget), rng)
    elif mode == "targets-only":
        w = sample_w_rejection(coll, rng)
    else:
        raise PreconditionError(f"unknown sampling mode {mode!r}")
    return SampleRecord(w, grid, anchor, coll.M, good, coll.anchor_in_hbound)


def run_sampling_experiment(
    infra: BoxInfrastructure, grid: GridSpec, repetitions: int, seed: int, mode: str = "targets-only",
    budget: int = TERM_BUDGET,
) -> list[SampleRecord]:
    """n samples at N and n+1 at N0 per repetition when N0 is set (n >= 2), otherwise ``repetitions`` at N."""
    from .rng import make_rng

    n = grid.n
    if grid.N0 is not None and n >= 2:
        g0 = GridSpec(n, grid.N0, grid.q, grid.L, grid.kappa,
                      tuple(Fraction(int(x * grid.N * grid.L), grid.N0 * grid.L) for x in grid.s), grid.N0)
        schedule = [grid] * n + [g0] * (n + 1)
    else:
        schedule = [grid]
    out = []
    i = 0
    for _ in range(repetitions):
        for g in schedule:
            rng = make_rng(seed, "sampler", i)
            i += 1
            out.append(draw_sample(infra, g, rng, mode, budget))
    return out
