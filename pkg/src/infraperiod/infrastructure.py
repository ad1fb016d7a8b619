"""Synthetic cornered infrastructures built from box tilings, the hiding function f, and boundary sets.

Every cell is a finite union of half-open boxes [c, c + a_j) sharing the corner c, and the cells tile
the fundamental box of an upper-triangular basis of the period lattice. All membership tests are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Sequence

import numpy as np

from .errors import BudgetError, ConfigError, PreconditionError
from .lattice import Lattice, box_points, triangular_basis
from .rational import as_fraction, ceil_frac, decode, encode, floor_frac, round_half_up

Vec = tuple[Fraction, ...]

INT64_SAFE = 2**62


@dataclass(frozen=True)
class Cell:
    id: int
    corner: Vec
    boxes: tuple[Vec, ...]  # sizes of the anchored boxes

    def contains_offset(self, t: Sequence[Fraction]) -> bool:
        """t relative to the corner lies in the half-open region."""
        return any(all(0 <= ti < ai for ti, ai in zip(t, a)) for a in self.boxes)


@dataclass(frozen=True)
class FRep:
    x: int
    t: Vec
    translate: Vec  # the lattice vector λ with u = corner + λ + t

    @property
    def corner_translate(self) -> Vec:
        return self.translate


@dataclass(frozen=True)
class BoxInfrastructure:
    lattice: Lattice
    cells: tuple[Cell, ...]
    C: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "C", as_fraction(self.C))
        if not self.lattice.full_rank:
            raise ConfigError("period lattice must have full rank")
        tri = self.tri
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if tri[j][i] != 0:
                    raise ConfigError("internal: basis not triangular")
        for cell in self.cells:
            if len(cell.corner) != self.n or any(len(a) != self.n for a in cell.boxes):
                raise ConfigError(f"cell {cell.id} has wrong dimension")
            for a in cell.boxes:
                for i in range(self.n):
                    if a[i] <= 0:
                        raise ConfigError(f"cell {cell.id} has an empty box")
                    if cell.corner[i] < 0 or cell.corner[i] + a[i] > self.fund[i]:
                        raise ConfigError(f"cell {cell.id} leaves the fundamental box")

    @property
    def n(self) -> int:
        return self.lattice.n

    @cached_property
    def tri(self) -> list[list[Fraction]]:
        """Upper-triangular basis columns of the period lattice."""
        return triangular_basis(self.lattice)

    @cached_property
    def fund(self) -> Vec:
        """Side lengths of the fundamental box [0, d_1) x ... x [0, d_n)."""
        return tuple(self.tri[i][i] for i in range(self.n))

    @cached_property
    def A(self) -> Fraction:
        return max(x for c in self.cells for a in c.boxes for x in a)

    @cached_property
    def D(self) -> int:
        return max_corners_in_box(self, self.C)

    @cached_property
    def cell_by_id(self) -> dict[int, Cell]:
        return {c.id: c for c in self.cells}

    def dist(self, x: int) -> Vec:
        return self.cell_by_id[x].corner

    def reduce_to_fundamental(self, u: Sequence) -> tuple[Vec, Vec]:
        """Return (u0, λ) with u = u0 + λ and u0 in the fundamental box."""
        x = [as_fraction(c) for c in u]
        lam = [Fraction(0)] * self.n
        for i in range(self.n - 1, -1, -1):
            k = floor_frac(x[i] / self.tri[i][i])
            if k:
                for r in range(i + 1):
                    x[r] -= k * self.tri[i][r]
                    lam[r] += k * self.tri[i][r]
        return tuple(x), tuple(lam)

    def reduce_point(self, u: Sequence) -> FRep:
        u0, lam = self.reduce_to_fundamental(u)
        for cell in self.cells:
            t = tuple(a - b for a, b in zip(u0, cell.corner))
            if cell.contains_offset(t):
                return FRep(cell.id, t, lam)
        raise ConfigError("cells do not cover the fundamental box")

    def phi(self, rep: FRep) -> Vec:
        c = self.cell_by_id[rep.x].corner
        return tuple(a + b + l for a, b, l in zip(c, rep.t, rep.translate))

    def translates_near(self, cell: Cell, lo: Sequence[Fraction], hi: Sequence[Fraction], budget: int = 10_000_000):
        """Lattice vectors λ with corner + λ in the closed box [lo, hi]."""
        lo2 = [a - c for a, c in zip(lo, cell.corner)]
        hi2 = [a - c for a, c in zip(hi, cell.corner)]
        return box_points(self.tri, lo2, hi2, hi_closed=True, budget=budget)

    def cells_meeting_open_box(self, center: Sequence, radius) -> list[tuple[int, Vec]]:
        """All (cell id, translated corner) whose region meets center + (-radius, radius)^n."""
        r = as_fraction(radius)
        c = [as_fraction(x) for x in center]
        out = []
        for cell in self.cells:
            lo = [ci - r - self.A for ci in c]
            hi = [ci + r for ci in c]
            for lam in self.translates_near(cell, lo, hi):
                corner = tuple(a + b for a, b in zip(cell.corner, lam))
                if any(
                    all(corner[i] < c[i] + r and corner[i] + a[i] > c[i] - r for i in range(self.n))
                    for a in cell.boxes
                ):
                    out.append((cell.id, corner))
        return out

    def verify_tiling(self, probes_per_axis: int = 100) -> None:
        """Each probe point of a rational grid on the fundamental box lies in exactly one cell."""
        axes = [[Fraction(k, probes_per_axis) * d for k in range(probes_per_axis)] for d in self.fund]
        for p in itertools.product(*axes):
            hits = sum(1 for c in self.cells if c.contains_offset([a - b for a, b in zip(p, c.corner)]))
            if hits != 1:
                raise ConfigError(f"probe {p} covered {hits} times")

    def is_cornered(self) -> bool:
        return all(all(x > 0 for a in c.boxes for x in a) for c in self.cells)

    def to_json(self) -> dict:
        return {
            "lambda": self.lattice.to_json(),
            "cells": [
                {
                    "id": c.id,
                    "corner": [encode(x) for x in c.corner],
                    "boxes": [{"offset": [encode(0)] * self.n, "size": [encode(x) for x in a]} for a in c.boxes],
                }
                for c in self.cells
            ],
            "A": encode(self.A),
            "C": encode(self.C),
            "D": self.D,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BoxInfrastructure":
        lat = Lattice.from_json(obj["lambda"])
        cells = []
        for c in obj["cells"]:
            boxes = []
            for b in c["boxes"]:
                if any(decode(x) != 0 for x in b.get("offset", [])):
                    raise ConfigError("box offsets must be zero: boxes are anchored at the corner")
                boxes.append(tuple(decode(x) for x in b["size"]))
            cells.append(Cell(int(c["id"]), tuple(decode(x) for x in c["corner"]), tuple(boxes)))
        infra = cls(lat, tuple(cells), decode(obj.get("C", 1)))
        if "A" in obj and decode(obj["A"]) < infra.A:
            raise ConfigError("declared A is smaller than the largest box extent")
        return infra


def max_corners_in_box(infra: BoxInfrastructure, C: Fraction) -> int:
    """Exact maximum number of translated corners in any box r + [0, C]^n."""
    n = infra.n
    span = [C + d for d in infra.fund]
    pts = []
    for cell in infra.cells:
        lo = [-s for s in span]
        hi = [d + s for d, s in zip(infra.fund, span)]
        for lam in infra.translates_near(cell, lo, hi):
            pts.append(tuple(a + b for a, b in zip(cell.corner, lam)))
    best = 0
    # an optimal box can be moved into the fundamental box and then slid up until each lower face
    # touches a corner, so lower-face coordinates can be taken from corner coordinates
    cand = [sorted({p[i] for p in pts if 0 <= p[i] <= infra.fund[i] + C}) for i in range(n)]
    for r in itertools.product(*cand):
        cnt = sum(1 for p in pts if all(r[i] <= p[i] <= r[i] + C for i in range(n)))
        best = max(best, cnt)
    return best


# --- construction --------------------------------------------------------------------


def interval_infrastructure(period, corners: Sequence, C=1) -> BoxInfrastructure:
    """One-dimensional infrastructure with cells [c_i, c_{i+1}) on R / period Z."""
    period = as_fraction(period)
    cs = sorted(as_fraction(c) for c in corners)
    if cs[0] != 0 or cs[-1] >= period:
        raise ConfigError("corners must start at 0 and lie below the period")
    ends = cs[1:] + [period]
    cells = tuple(Cell(i, (c,), ((e - c,),)) for i, (c, e) in enumerate(zip(cs, ends)))
    return BoxInfrastructure(Lattice.from_columns([[period]]), cells, as_fraction(C))


def synth_box_infrastructure(
    n: int, lattice: Lattice, cell_count: int, rng: np.random.Generator, grain: int = 4, C=1
) -> BoxInfrastructure:
    """Random guillotine and staircase subdivision of the fundamental box.

    Cut points are multiples of d_i / grain so all coordinates stay small rationals.
    """
    if lattice.n != n or not lattice.full_rank:
        raise ConfigError("lattice must be full rank in dimension n")
    if cell_count < 1:
        raise ConfigError("need at least one cell")
    tri = triangular_basis(lattice)
    fund = tuple(tri[i][i] for i in range(n))
    # pieces: (corner, boxes, splittable)
    pieces: list[tuple[Vec, tuple[Vec, ...], bool]] = [(tuple(Fraction(0) for _ in range(n)), (fund,), True)]
    attempts = 0
    while len(pieces) < cell_count:
        attempts += 1
        if attempts > 1000 * cell_count:
            raise ConfigError("could not subdivide; use a finer grain or fewer cells")
        splittable = [i for i, p in enumerate(pieces) if p[2]]
        idx = splittable[int(rng.integers(len(splittable)))]
        corner, boxes, _ = pieces[idx]
        size = boxes[0]
        unit = [fund[i] / grain for i in range(n)]
        steps = [int(size[i] / unit[i]) for i in range(n)]
        if n > 1 and rng.random() < 0.5 and all(s >= 2 for s in steps):
            m = tuple(corner[i] + unit[i] * int(rng.integers(1, steps[i])) for i in range(n))
            upper = (m, (tuple(corner[i] + size[i] - m[i] for i in range(n)),), True)
            stair_boxes = tuple(
                tuple(size[k] if k != i else m[i] - corner[i] for k in range(n)) for i in range(n)
            )
            pieces[idx] = (corner, stair_boxes, False)
            pieces.append(upper)
        else:
            axes = [i for i in range(n) if steps[i] >= 2]
            if not axes:
                continue
            ax = axes[int(rng.integers(len(axes)))]
            cut = unit[ax] * int(rng.integers(1, steps[ax]))
            low = tuple(size[k] if k != ax else cut for k in range(n))
            high_corner = tuple(corner[k] + (cut if k == ax else 0) for k in range(n))
            high = tuple(size[k] if k != ax else size[k] - cut for k in range(n))
            pieces[idx] = (corner, (low,), True)
            pieces.append((high_corner, (high,), True))
    pieces.sort(key=lambda p: p[0][::-1])
    cells = tuple(Cell(i, p[0], p[1]) for i, p in enumerate(pieces))
    return BoxInfrastructure(Lattice.from_columns(tri), cells, as_fraction(C))


# --- grids ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    n: int
    N: int
    q: int
    L: int
    kappa: Fraction
    s: Vec
    N0: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kappa", as_fraction(self.kappa))
        object.__setattr__(self, "s", tuple(as_fraction(x) for x in self.s))
        if min(self.N, self.q, self.L) < 1:
            raise ConfigError("N, q, L must be positive")
        if len(self.s) != self.n:
            raise ConfigError("shift has wrong dimension")
        for x in self.s:
            y = x * self.N * self.L
            if y.denominator != 1 or not 0 <= y < self.L:
                raise ConfigError("shift must lie in (1/(NL)){0..L-1}^n")

    @classmethod
    def from_shift_index(cls, n, N, q, L, kappa, idx: Sequence[int], N0=None) -> "GridSpec":
        return cls(n, N, q, L, kappa, tuple(Fraction(int(i), N * L) for i in idx), N0)

    @property
    def side_v(self) -> int:
        return self.q * self.N

    @property
    def side_w(self) -> int:
        return 2 * self.n * self.q * self.N

    @property
    def V(self) -> int:
        return self.side_v**self.n

    @property
    def W(self) -> int:
        return self.side_w**self.n

    @property
    def eps(self) -> Fraction:
        return Fraction(1, 2 * self.N * self.L)

    def kappa_ok(self) -> bool:
        """Assumption (V)."""
        n, q, N = self.n, self.q, self.N
        return self.kappa < Fraction(1, 8 * n) - Fraction(1, 4 * n * q * N)

    def point(self, v: Sequence[int]) -> Vec:
        return tuple(si + Fraction(int(vi), self.N) for si, vi in zip(self.s, v))

    def with_shift(self, s: Sequence) -> "GridSpec":
        return GridSpec(self.n, self.N, self.q, self.L, self.kappa, tuple(s), self.N0)

    def to_json(self) -> dict:
        d = {"n": self.n, "N": self.N, "q": self.q, "L": self.L, "kappa": encode(self.kappa),
             "s": [encode(x) for x in self.s]}
        if self.N0 is not None:
            d["N0"] = self.N0
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "GridSpec":
        return cls(int(obj["n"]), int(obj["N"]), int(obj["q"]), int(obj["L"]), decode(obj["kappa"]),
                   tuple(decode(x) for x in obj["s"]), obj.get("N0"))


# --- exact point-level tests --------------------------------------------------------


def eval_f(infra: BoxInfrastructure, grid: GridSpec, v: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    rep = infra.reduce_point(grid.point(v))
    return rep.x, tuple(floor_frac(grid.N * ti) for ti in rep.t)


def _interior_box(cell: Cell, t: Sequence[Fraction], lo_pad, hi_pad, hi_strict=True) -> bool:
    """Is [t - lo_pad, t + hi_pad] inside an open component box (0, a_j)?"""
    for a in cell.boxes:
        ok = True
        for ti, ai in zip(t, a):
            if not ti - lo_pad > 0:
                ok = False
                break
            if hi_strict and not ti + hi_pad < ai:
                ok = False
                break
            if not hi_strict and not ti + hi_pad <= ai:
                ok = False
                break
        if ok:
            return True
    return False


def in_h(infra: BoxInfrastructure, u: Sequence) -> bool:
    """Membership in the boundary set H (union of all cell boundaries)."""
    return in_h_eps(infra, u, Fraction(0))


def in_h_eps(infra: BoxInfrastructure, u: Sequence, eps) -> bool:
    rep = infra.reduce_point(u)
    e = as_fraction(eps)
    return not _interior_box(infra.cell_by_id[rep.x], rep.t, e, e)


def in_hgrid(infra: BoxInfrastructure, u: Sequence, N: int, eps) -> bool:
    """Membership in Hgrid(ε): the ε-thickened comb of grid-offset boundary copies."""
    rep = infra.reduce_point(u)
    e = as_fraction(eps)
    if not _interior_box(infra.cell_by_id[rep.x], rep.t, e, e):
        return True
    for ti in rep.t:
        if floor_frac(N * (ti + e)) >= ceil_frac(N * (ti - e)):
            return True
    return False


def in_hbound(infra: BoxInfrastructure, u: Sequence, N: int) -> bool:
    """Membership in Hbound = (-1/N, 0]^n + H."""
    rep = infra.reduce_point(u)
    return not _interior_box(infra.cell_by_id[rep.x], rep.t, Fraction(0), Fraction(1, N), hi_strict=False)


point_in_hbound = in_hbound


def eval_f_approx(
    infra: BoxInfrastructure, grid: GridSpec, v: Sequence[int], k_bits: int, policy: str = "nearest"
) -> tuple[tuple[int, tuple[int, ...]], bool]:
    """Model of the 2^-k precision oracle.

    Returns (value, corruptible). ``corruptible`` says whether some answer permitted by the oracle
    contract differs from the exact value; with policy ``adversarial`` such an answer is returned.
    """
    delta = Fraction(1, 2**k_bits)
    p = grid.point(v)
    ustar = tuple(Fraction(round_half_up(x / delta)) * delta for x in p)
    exact = eval_f(infra, grid, v)
    options = []
    for cid, corner in infra.cells_meeting_open_box(ustar, delta):
        per_axis = []
        for i in range(infra.n):
            lo = ceil_frac((ustar[i] - corner[i] - delta) / delta)
            hi = floor_frac((ustar[i] - corner[i] + delta) / delta)
            per_axis.append(sorted({floor_frac(grid.N * k * delta) for k in range(lo, hi + 1)}))
        for combo in itertools.product(*per_axis):
            options.append((cid, tuple(combo)))
    wrong = [o for o in options if o != exact]
    corruptible = bool(wrong)
    if policy == "nearest":
        rep = infra.reduce_point(ustar)
        t = tuple(Fraction(round_half_up(ti / delta)) * delta for ti in rep.t)
        return (rep.x, tuple(floor_frac(grid.N * ti) for ti in t)), corruptible
    if policy == "adversarial":
        return (wrong[0] if wrong else exact), corruptible
    raise PreconditionError(f"unknown rounding policy {policy!r}")


# --- scaled integer arithmetic for whole grids ---------------------------------------


class ScaledGrid:
    """Integer-scaled copy of an infrastructure and grid for vectorized exact evaluation."""

    def __init__(self, infra: BoxInfrastructure, grid: GridSpec):
        if grid.n != infra.n:
            raise ConfigError("grid and infrastructure dimensions differ")
        self.infra, self.grid = infra, grid
        dens = [x.denominator for col in infra.tri for x in col]
        dens += [x.denominator for c in infra.cells for x in c.corner]
        dens += [x.denominator for c in infra.cells for a in c.boxes for x in a]
        dens += [x.denominator for x in grid.s]
        S = lcm(*dens, 2 * grid.N * grid.L)
        self.S = S
        self.step = S // grid.N
        self.E = S // (2 * grid.N * grid.L)
        n = infra.n
        # largest magnitudes: window coordinates (q + fund + A) S, and offsets times N in f_values
        big = max((abs(max(grid.s, default=0)) + grid.q + 2 * max(infra.fund) + infra.A + 2) * S * 4,
                  (infra.A + 2) * S * grid.N * 4)
        self.dtype = np.int64 if big < INT64_SAFE else object
        self.tri = [np.array([int(x * S) for x in col], dtype=self.dtype) for col in infra.tri]
        self.diag = [int(infra.tri[i][i] * S) for i in range(n)]
        self.shift = np.array([int(x * S) for x in grid.s], dtype=self.dtype)
        self.corners = [np.array([int(x * S) for x in c.corner], dtype=self.dtype) for c in infra.cells]
        self.sizes = [[np.array([int(x * S) for x in a], dtype=self.dtype) for a in c.boxes] for c in infra.cells]
        self.ids = np.array([c.id for c in infra.cells])

    def points(self, v: np.ndarray) -> np.ndarray:
        return self.shift[None, :] + np.asarray(v, dtype=self.dtype) * self.step

    def locate(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Cell index (into infra.cells) and scaled offset t for each row of scaled points P."""
        X = np.array(P, dtype=self.dtype, copy=True)
        n = self.infra.n
        for i in range(n - 1, -1, -1):
            k = X[:, i] // self.diag[i]
            X -= k[:, None] * self.tri[i][None, :]
        cell = np.full(len(X), -1)
        T = np.zeros_like(X)
        for ci, corner in enumerate(self.corners):
            Tc = X - corner[None, :]
            inside = np.zeros(len(X), dtype=bool)
            for a in self.sizes[ci]:
                inside |= np.all((Tc >= 0) & (Tc < a[None, :]), axis=1)
            sel = inside & (cell < 0)
            cell[sel] = ci
            T[sel] = Tc[sel]
        if (cell < 0).any():
            raise ConfigError("cells do not cover the fundamental box")
        return cell, T

    def f_values(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        cell, T = self.locate(self.points(v))
        return cell, (T * self.grid.N) // self.S

    def _interior(self, cell, T, lo_pad, hi_pad, strict_hi=True) -> np.ndarray:
        ok = np.zeros(len(T), dtype=bool)
        for ci in range(len(self.corners)):
            sel = cell == ci
            if not sel.any():
                continue
            Tc = T[sel]
            inner = np.zeros(len(Tc), dtype=bool)
            for a in self.sizes[ci]:
                up = (Tc + hi_pad < a[None, :]) if strict_hi else (Tc + hi_pad <= a[None, :])
                inner |= np.all((Tc - lo_pad > 0) & up, axis=1)
            ok[sel] = inner
        return ok

    def outside_hgrid(self, cell, T) -> np.ndarray:
        E = self.E
        ok = self._interior(cell, T, E, E)
        N, S = self.grid.N, self.S
        hi = ((T + E) * N) // S
        lo = -((-(T - E) * N) // S)
        ok &= np.all(hi < lo, axis=1)
        return ok

    def outside_hbound(self, cell, T) -> np.ndarray:
        return self._interior(cell, T, 0, self.step, strict_hi=False)

    def all_v(self, chunk: int | None = None) -> np.ndarray:
        side, n = self.grid.side_v, self.grid.n
        idx = np.indices((side,) * n).reshape(n, -1).T
        return idx


def lattice_points_box_np(sg: ScaledGrid, lo: Sequence[int], hi: Sequence[int], budget: int = 50_000_000) -> np.ndarray:
    """Scaled lattice vectors in the closed box [lo, hi] (scaled integer coordinates)."""
    n = sg.infra.n
    part = np.zeros((1, n), dtype=sg.dtype)
    for i in range(n - 1, -1, -1):
        d = sg.diag[i]
        base = part[:, i]
        cmin = -((-(lo[i] - base)) // d)
        cmax = (hi[i] - base) // d
        counts = np.maximum(np.asarray(cmax - cmin + 1, dtype=np.int64), 0)
        total = int(counts.sum())
        if total > budget:
            raise BudgetError("translate enumeration budget exceeded")
        if total == 0:
            return np.zeros((0, n), dtype=sg.dtype)
        rep = np.repeat(np.arange(len(part)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        c = np.asarray(cmin, dtype=sg.dtype)[rep] + (np.arange(total) - starts).astype(sg.dtype)
        part = part[rep] + c[:, None] * sg.tri[i][None, :]
    return part


def _window_translates(sg: ScaledGrid, ci: int) -> np.ndarray:
    """Translated corners of cell ci whose ε-enlarged closure can meet the grid window."""
    S, E = sg.S, sg.E
    A = int(sg.infra.A * S)
    span = (sg.grid.side_v - 1) * sg.step
    lo = [int(sg.shift[i]) - A - E - int(sg.corners[ci][i]) for i in range(sg.infra.n)]
    hi = [int(sg.shift[i]) + span + E - int(sg.corners[ci][i]) for i in range(sg.infra.n)]
    return lattice_points_box_np(sg, lo, hi) + sg.corners[ci][None, :]


def shift_is_good(infra: BoxInfrastructure, grid: GridSpec, sg: ScaledGrid | None = None) -> bool:
    """Exact test that no grid point s + v/N lies in Hgrid(ε), ε = 1/(2NL), by slab arithmetic."""
    sg = sg or ScaledGrid(infra, grid)
    n, step, E = infra.n, sg.step, sg.E
    vmax = grid.side_v - 1
    Ss = sg.shift
    for ci in range(len(sg.corners)):
        X = _window_translates(sg, ci)
        if len(X) == 0:
            continue
        for a in sg.sizes[ci]:
            lo_v, hi_v = [], []
            for l in range(n):
                lo_l = -((-(X[:, l] - E - Ss[l])) // step)
                hi_l = (X[:, l] + a[l] + E - Ss[l]) // step
                lo_v.append(np.maximum(lo_l, 0))
                hi_v.append(np.minimum(hi_l, vmax))
            for k in range(n):
                g = Ss[k] - X[:, k]
                j0min = -((-(-E - g)) // step)
                j0max = (E - g) // step
                mmax = int(a[k]) // step
                kl = np.maximum(j0min, 0)
                kh = np.minimum(j0max + mmax, vmax)
                bad = (j0min <= j0max) & (kl <= kh)
                for l in range(n):
                    if l != k:
                        bad &= lo_v[l] <= hi_v[l]
                if bad.any():
                    return False
    return True


def shift_is_good_pointwise(infra: BoxInfrastructure, grid: GridSpec, sg: ScaledGrid | None = None) -> bool:
    """Same test by scanning every grid point (small grids only)."""
    sg = sg or ScaledGrid(infra, grid)
    cell, T = sg.locate(sg.points(sg.all_v()))
    return bool(sg.outside_hgrid(cell, T).all())


def count_outside_hbound(infra: BoxInfrastructure, grid: GridSpec, sg: ScaledGrid | None = None) -> int:
    """Exact number of grid points outside Hbound, by inclusion-exclusion over each cell's boxes."""
    sg = sg or ScaledGrid(infra, grid)
    n, step = infra.n, sg.step
    vmax = grid.side_v - 1
    Ss = sg.shift
    total = 0
    for ci in range(len(sg.corners)):
        X = _window_translates(sg, ci)
        if len(X) == 0:
            continue
        lo = [np.maximum((X[:, l] - Ss[l]) // step + 1, 0) for l in range(n)]
        boxes = sg.sizes[ci]
        for r in range(1, len(boxes) + 1):
            for sub in itertools.combinations(range(len(boxes)), r):
                a = [min(int(boxes[j][l]) for j in sub) for l in range(n)]
                prod = np.ones(len(X), dtype=object)
                for l in range(n):
                    hi = np.minimum((X[:, l] + a[l] - Ss[l]) // step - 1, vmax)
                    prod = prod * np.maximum(hi - lo[l] + 1, 0).astype(object)
                total += (-1) ** (r + 1) * int(prod.sum())
    return total


def count_outside_hbound_pointwise(infra: BoxInfrastructure, grid: GridSpec, sg: ScaledGrid | None = None) -> int:
    sg = sg or ScaledGrid(infra, grid)
    cell, T = sg.locate(sg.points(sg.all_v()))
    return int(sg.outside_hbound(cell, T).sum())
