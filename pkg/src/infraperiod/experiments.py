"""Reference instances and verification suites. Every suite returns a list of Check records
with both sides of each inequality materialized."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from mpmath import iv

from .errors import InfraError, RankDeficiencyError
from .generation import (
    WindowSample,
    abelian_groups_up_to,
    exact_generation_probability,
    group_rank,
    one_dim_generation_trial,
    quotient_uniformity_distance,
    span_fraction,
    span_product,
    span_window_factor,
    zeta_product_upper,
)
from .infrastructure import (
    BoxInfrastructure,
    GridSpec,
    ScaledGrid,
    count_outside_hbound,
    in_hbound,
    interval_infrastructure,
    shift_is_good,
    synth_box_infrastructure,
)
from .lattice import (
    Lattice,
    count_window_points,
    elementary_divisors,
    int_det,
    kz_reduce,
    lll_reduce,
    successive_minima_sq,
)
from .pipeline import end_to_end
from .planner import (
    C_FLOOR,
    COMPETITOR_TABLE,
    SUCCESS_TABLE,
    PlannedParameters,
    PlannerInput,
    c_constant_lower,
    competitor_bound,
    plan,
    recheck,
    success_lower_bound,
)
from .rational import as_fraction, ceil_frac, encode, iv_endpoints, matmul, norm2, sqrt_ceil, transpose
from .recovery import (
    ApproxGeneratingSet,
    choose_scaling,
    dual_basis_from_approx,
    dual_eps_max,
    quality_bound,
    recover_basis,
    verify_recovery,
)
from .rng import make_rng
from .sampler import (
    box_bound,
    build_collision_set,
    build_collision_set_scan,
    certified_ge,
    f_table,
    in_window_targets,
    m_lower,
    prob_of_target,
    verify_collision_properties,
)


def _num(x):
    if isinstance(x, Fraction):
        return encode(x)
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, float, str)):
        return x
    if hasattr(x, "_mpi_"):
        lo, hi = iv_endpoints(x)
        return [encode(lo), encode(hi)]
    return str(x)


def _approx(x) -> float | bool | None:
    if isinstance(x, bool) or x is None:
        return x
    if hasattr(x, "_mpi_"):
        lo, _ = iv_endpoints(x)
        return float(lo)
    try:
        return float(x)
    except (TypeError, ValueError):
        return None


@dataclass(frozen=True)
class Check:
    name: str
    observed: object
    relation: str
    bound: object
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "observed": _num(self.observed), "relation": self.relation,
                "bound": _num(self.bound), "observed_approx": _approx(self.observed),
                "bound_approx": _approx(self.bound), "pass": self.passed}

    def row(self) -> list:
        return [self.name, _approx(self.observed), self.relation, _approx(self.bound), self.passed]


def check(name: str, observed, relation: str, bound, passed: bool | None = None) -> Check:
    if passed is None:
        ops: dict[str, Callable] = {">=": lambda a, b: a >= b, "<=": lambda a, b: a <= b,
                                    "==": lambda a, b: a == b, ">": lambda a, b: a > b, "<": lambda a, b: a < b}
        passed = bool(ops[relation](observed, bound))
    return Check(name, observed, relation, bound, bool(passed))


# --- reference instances --------------------------------------------------------------


@dataclass
class Instance:
    infra: BoxInfrastructure
    inp: PlannerInput
    planned: PlannedParameters
    grid: GridSpec
    nu_upper: Fraction


def infra_1d() -> BoxInfrastructure:
    return interval_infrastructure(40, [0, 13, 27])


def infra_2d() -> BoxInfrastructure:
    return synth_box_infrastructure(2, Lattice.scaled_identity(2, 10), 4, np.random.default_rng(3))


def planner_input_for(infra: BoxInfrastructure, gamma=1) -> PlannerInput:
    lat = infra.lattice
    return PlannerInput(infra.n, infra.A, infra.C, infra.D, lat.lambda1_lower, lat.det, gamma, nu=lat.nu_upper)


def first_good_shift(infra: BoxInfrastructure, planned: PlannedParameters, limit: int = 10_000) -> GridSpec:
    n = infra.n
    for a in range(limit):
        g = GridSpec.from_shift_index(n, planned.N, planned.q, planned.L, planned.kappa, (a,) * n)
        if shift_is_good(infra, g):
            return g
    raise InfraError("no good shift found on the diagonal")


def instance_1d() -> Instance:
    infra = infra_1d()
    inp = planner_input_for(infra)
    p = plan(inp, "desk", N_min=32, q_min=160)
    return Instance(infra, inp, p, first_good_shift(infra, p), infra.lattice.nu_upper)


def instance_2d() -> Instance:
    infra = infra_2d()
    inp = planner_input_for(infra)
    p = plan(inp, "desk", N_min=4, q_min=32)
    return Instance(infra, inp, p, first_good_shift(infra, p), infra.lattice.nu_upper)


def anchor_outside_hbound(inst: Instance, rng: np.random.Generator) -> tuple[int, ...]:
    g = inst.grid
    while True:
        v = tuple(int(x) for x in rng.integers(0, g.side_v, size=g.n))
        if not in_hbound(inst.infra, g.point(v), g.N):
            return v


# --- criteria 1-3: sampler ----------------------------------------------------------------


def suite_fourier(inst: Instance, seed: int = 0) -> list[Check]:
    """Certified Pr(R) >= 2^{n-1} M_l c / W for every in-window dual vector."""
    g, infra = inst.grid, inst.infra
    n = g.n
    out = [check("plan (III)-(V)", inst.planned.all_required_ok(), "==", True),
           check("good shift", shift_is_good(infra, g), "==", True)]
    anchor = anchor_outside_hbound(inst, make_rng(seed, "fourier", 0))
    coll = build_collision_set(infra, g, anchor)
    out.append(check("anchor outside Hbound", not coll.anchor_in_hbound, "==", True))
    ml = m_lower(g, infra.lattice.det, inst.nu_upper)
    bound = box_bound(g, ml, "half")
    targets = in_window_targets(infra.lattice.dual(), g, "box")
    out.append(check("in-window targets", len(targets), ">=", 1))
    worst = None
    for t in targets:
        p = prob_of_target(coll, t)
        ok = certified_ge(p, bound)
        if worst is None or p.a < worst[1].a:
            worst = (t, p)
        if not ok:
            out.append(check(f"Pr(R) at {[str(x) for x in t.lam_star]}", p, ">=", bound, False))
    if worst is not None:
        out.append(check(f"min Pr(R) over {len(targets)} targets (n={n})", worst[1], ">=", bound,
                         all(certified_ge(prob_of_target(coll, t), bound) for t in targets)))
    return out


def suite_collisions(inst: Instance, anchors: int | None = None, seed: int = 0) -> list[Check]:
    """Collision statements (i)-(iii) for every anchor outside Hbound (or a random subset)."""
    g, infra = inst.grid, inst.infra
    sg = ScaledGrid(infra, g)
    table = f_table(sg)
    allv = sg.all_v()
    if anchors is None:
        cand = allv
    else:
        rng = make_rng(seed, "collisions", 0)
        cand = allv[rng.choice(len(allv), size=min(anchors, len(allv)), replace=False)]
    ok = {"i": True, "ii": True, "iii": True, "direct=scan": True}
    tested = 0
    min_m = None
    ml = None
    for v in cand.tolist():
        if in_hbound(infra, g.point(v), g.N):
            continue
        tested += 1
        c = build_collision_set(infra, g, v, sg)
        c2 = build_collision_set_scan(infra, g, v, sg, table)
        if not np.array_equal(c.members, c2.members):
            ok["direct=scan"] = False
        res = verify_collision_properties(infra, g, c, inst.nu_upper)
        for key in ("i", "ii", "iii"):
            ok[key] &= res[key]
        ml = res["M_lower"]
        min_m = c.M if min_m is None else min(min_m, c.M)
    return [
        check(f"anchors tested (n={g.n})", tested, ">=", 1),
        check("(i) unique λ per collision", ok["i"], "==", True),
        check("(ii) one collision per in-range λ", ok["ii"], "==", True),
        check("(iii) min M >= M_l", Fraction(min_m or 0), ">=", ml if ml is not None else Fraction(0)),
        check("direct collision set equals scan", ok["direct=scan"], "==", True),
    ]


# --- criterion 4: shifts --------------------------------------------------------------------


def shift_instance(n: int) -> tuple[BoxInfrastructure, PlannedParameters]:
    """Parameters meeting (I) and (II) for the shift statements."""
    infra = infra_1d() if n == 1 else infra_2d()
    inp = planner_input_for(infra)
    A, C, D = infra.A, infra.C, infra.D
    N = ceil_frac(max(4 / A, Fraction(8 * (n + 1) * n * 2**n) * D * A ** (n - 1) / (3 * C**n)))
    q = ceil_frac(9 * max(Fraction(1), A))
    if n == 1:
        N, q = max(N, 32), max(q, 160)
    L = ceil_frac(4 * n * D * (q + A + C + 2) ** n / C**n)
    from .planner import assumption_ledger

    kappa = Fraction(1, 9 * n)
    led = assumption_ledger(inp, N, q, L, kappa, None)
    return infra, PlannedParameters(n, N, None, q, L, kappa, "shift", led, ("(I)", "(II)"))


def suite_shift(n: int, samples: int = 10_000, seed: int = 0) -> list[Check]:
    infra, p = shift_instance(n)
    total = p.L**n
    if total <= samples:
        idxs = [tuple(int(x) for x in np.unravel_index(i, (p.L,) * n)) for i in range(total)]
    else:
        rng = make_rng(seed, "shift", n)
        idxs = [tuple(int(x) for x in rng.integers(0, p.L, size=n)) for _ in range(samples)]
    good = 0
    worst = None
    for idx in idxs:
        g = GridSpec.from_shift_index(n, p.N, p.q, p.L, p.kappa, idx)
        sg = ScaledGrid(infra, g)
        good += shift_is_good(infra, g, sg)
        frac = Fraction(count_outside_hbound(infra, g, sg), g.V)
        worst = frac if worst is None else min(worst, frac)
    return [
        check(f"(I),(II) hold (n={n}, N={p.N}, q={p.q}, L={p.L})", p.all_required_ok(), "==", True),
        check(f"good-shift fraction over {len(idxs)} shifts", Fraction(good, len(idxs)), ">=", Fraction(1, 2)),
        check("min fraction of grid outside Hbound", worst, ">=", 1 - Fraction(1, 4 * (n + 1))),
    ]


# --- criteria 5-6: generation -------------------------------------------------------------


def _random_lattice(n: int, rng: np.random.Generator, lo: int = -6, hi: int = 7, den: int = 1) -> Lattice:
    while True:
        cols = [[Fraction(int(x), int(rng.integers(1, den + 1))) for x in rng.integers(lo, hi, n)] for _ in range(n)]
        try:
            lat = Lattice.from_columns(cols)
        except RankDeficiencyError:
            continue
        if lat.full_rank:
            return lat


def suite_span(n: int, trials: int = 10_000, seed: int = 0, lattices: int = 3) -> list[Check]:
    out = []
    target = span_product(n)
    sigma = math.sqrt(float(target) * (1 - float(target)) / trials)
    for j in range(lattices):
        rng = make_rng(seed, "span", 100 * n + j)
        lat = Lattice.scaled_identity(n, 1) if j == 0 else _random_lattice(n, rng, -3, 4)
        b = ceil_frac(span_window_factor(n) * lat.nu_upper)
        ws = WindowSample.build(lat, b)
        frac = span_fraction(ws, trials, rng)
        out.append(check(f"span fraction n={n} lattice {j} (b={b})", frac, ">=", float(target) - 3 * sigma))
    return out


def suite_groups(n: int, order_max: int = 64) -> list[Check]:
    bound = zeta_product_upper(n)
    worst = None
    count = 0
    for G in abelian_groups_up_to(order_max):
        if group_rank(G) > n:
            continue
        count += 1
        p = exact_generation_probability(G, n + 1)
        if worst is None or p < worst[1]:
            worst = (G, p)
    return [check(f"min exact generation prob, {count} groups of order <= {order_max}, {n + 1} draws (worst {worst[0]})",
                  worst[1], ">=", bound)]


def suite_one_dim_generation(trials: int = 10_000, seed: int = 0) -> list[Check]:
    rng = make_rng(seed, "gen1d", 0)
    v, b = Fraction(1, 40), Fraction(32, 9)
    hits = sum(one_dim_generation_trial(v, b, rng) for _ in range(trials))
    iv.prec = 100
    _, upper = iv_endpoints(iv.mpf(27) / (8 * iv.pi**2))
    return [check("two-sample generation in 1-D", Fraction(hits, trials), ">=", upper)]


def quotient_instances(count: int = 50, seed: int = 0) -> list[tuple[Lattice, Lattice, Fraction]]:
    rng = make_rng(seed, "quotient", 0)
    out = []
    while len(out) < count:
        n = 1 + len(out) % 2
        lat = _random_lattice(n, rng, -3, 4) if rng.random() < 0.5 else Lattice.scaled_identity(n, 1)
        while True:
            T = rng.integers(-2, 3, size=(n, n))
            d = abs(int_det([[int(x) for x in r] for r in T]))
            if 2 <= d <= 6:
                break
        sub_cols = [[sum(int(T[i][j]) * lat.columns[i][r] for i in range(n)) for r in range(n)] for j in range(n)]
        sub = Lattice.from_columns(sub_cols)
        b0 = ceil_frac(2 * sub.nu_upper) + int(rng.integers(1, 12 if n == 1 else 8))
        out.append((lat, sub, Fraction(b0)))
    return out


def suite_quotient(count: int = 50, seed: int = 0) -> list[Check]:
    worst_gap = None
    ok = True
    for lat, sub, b0 in quotient_instances(count, seed):
        tv, bound = quotient_uniformity_distance(lat, sub, b0)
        ok &= tv <= bound
        gap = bound - tv
        worst_gap = gap if worst_gap is None else min(worst_gap, gap)
    return [check(f"TV <= bound on {count} quotient instances (min slack)", worst_gap, ">=", Fraction(0), ok)]


# --- criterion 7: recovery -------------------------------------------------------------------


def recovery_instance(rng: np.random.Generator, n: int):
    """Lattice plus 2n+1 integer combinations of its basis that generate it exactly."""
    lat = _random_lattice(n, rng, -6, 7, den=int(rng.integers(1, 4)))
    k = 2 * n + 1
    while True:
        Cm = [[int(x) for x in row] for row in rng.integers(-2, 3, size=(k, n))]
        divs = elementary_divisors(Cm)
        if len(divs) == n and all(d == 1 for d in divs):
            break
    ex = [[sum(Cm[j][i] * lat.columns[i][r] for i in range(n)) for r in range(n)] for j in range(k)]
    return lat, ex


def run_recovery_trial(rng: np.random.Generator, n: int, mode: str) -> dict:
    lat, ex = recovery_instance(rng, n)
    k = 2 * n + 1
    alpha = sqrt_ceil(max(norm2(v) for v in ex))
    mu = lat.lambda1_lower
    probe = ApproxGeneratingSet(ex, 0, mu, alpha, lat.det, n)
    f = quality_bound(mode, k)
    e1 = probe.eps_max(f)
    s = choose_scaling(f, probe.lam(), mu)
    g_pre = f * sqrt_ceil(Fraction(k)) * sqrt_ceil(s * s * (alpha + e1) ** 2 + 1)
    eps = min(e1, dual_eps_max(n, g_pre, alpha, lat.det)) / 2
    D = 10**6
    pert = [[a + eps * Fraction(int(rng.integers(-D, D + 1)), D * n) for a in v] for v in ex]
    gs = ApproxGeneratingSet(pert, eps, mu, alpha, lat.det, n)
    res = recover_basis(gs, mode)
    chk = verify_recovery(res, ex, lat, gs)
    dr = dual_basis_from_approx(res.basis, res.g, alpha, lat.det, eps, res.exact_basis(ex))
    return {"n": n, "mode": mode, "hnf_equal": chk["hnf_equal"], "relations_exact": chk["relations_exact"],
            "delta_ok": chk["delta_ok"], "norm_ok": chk["norm_ok"], "cond_half": dr.checks["cond_half"],
            "gamma_ok": dr.checks["rows_ok"] and dr.checks["norm1_ok"], "internal": all(res.checks.values()),
            "error_ratio": float(chk["max_error2"] / res.delta**2) if res.delta else 0.0}


def suite_recovery(count: int = 100, seed: int = 0) -> list[Check]:
    keys = ("hnf_equal", "relations_exact", "delta_ok", "norm_ok", "cond_half", "gamma_ok", "internal")
    fails = {k: 0 for k in keys}
    worst = 0.0
    for t in range(count):
        rng = make_rng(seed, "recovery", t)
        n = 1 + t % 3
        mode = "kz" if t % 2 == 0 else "lll"
        r = run_recovery_trial(rng, n, mode)
        for k in keys:
            fails[k] += not r[k]
        worst = max(worst, r["error_ratio"])
    out = [check(f"{k} failures over {count} lattices", fails[k], "==", 0) for k in keys]
    out.append(check("max (||b'-b|| / (f sqrt(k) alpha~ eps))^2", worst, "<=", 1.0))
    return out


# --- criterion 8: end to end ----------------------------------------------------------------


def pipeline_setup(gamma=10):
    infra = infra_1d()
    inp = planner_input_for(infra, gamma)
    return infra, inp, plan(inp, "theorem")


def suite_end_to_end(attempts: int = 200, seed: int = 0, gamma=10):
    infra, inp, p = pipeline_setup(gamma)
    res = end_to_end(infra, inp, p, attempts, seed)
    out = [check("1-D theorem-mode plan satisfied", p.all_required_ok(), "==", True),
           check(f"attempts within gamma={gamma} of the period", res.successes, ">=", 1)]
    for a in res.audit:
        out.append(check(f"audit factor {a.name} ({a.successes}/{a.trials})",
                         Fraction(a.successes, a.trials) if a.trials else Fraction(0), ">=", a.bound, a.ok))
    return out, res


# --- criterion 9: formulas ------------------------------------------------------------------


def suite_formulas() -> list[Check]:
    out = []
    for n in range(1, 11):
        sb = success_lower_bound(n)
        out.append(check(f"success table n={n}", sb.table_entry(), "==", SUCCESS_TABLE[n - 1]))
        out.append(check(f"simplified form below exact n={n}", sb.simplified, "<=", sb.exact))
        cb = competitor_bound(n)
        out.append(check(f"competitor table n={n}", cb.table_entry(), "==", COMPETITOR_TABLE[n - 1]))
    out.append(check("c = cos^2(pi 17417/36864)", c_constant_lower(), ">=", C_FLOOR))
    inp = PlannerInput(1, 1, 1, 1, 40, 40, 1)
    out.append(check("1-D theorem plan rechecked", all(recheck(inp, plan(inp)).values()), "==", True))
    inp2 = PlannerInput(2, 1, 1, 1, 10, 100, 1)
    out.append(check("2-D theorem plan rechecked", all(recheck(inp2, plan(inp2)).values()), "==", True))
    return out


# --- criterion 10: lattice properties ----------------------------------------------------------


def property_instance(rng: np.random.Generator) -> dict:
    n = int(rng.integers(1, 5))
    lat = _random_lattice(n, rng, -5, 6, den=int(rng.integers(1, 4)))
    res = {}
    cols = lat.columns
    mins = successive_minima_sq(lat)
    for name, red in (("lll", lll_reduce(cols)), ("kz", kz_reduce(cols))):
        det_u = int_det(red.transform)
        res[f"{name}_unimodular"] = abs(det_u) == 1
        prod = transpose(matmul(transpose(cols), red.transform))
        res[f"{name}_transform"] = [list(c) for c in prod] == [list(c) for c in red.reduced_basis]
        res[f"{name}_quality"] = all(norm2(c) <= red.quality_factor_sq * m for c, m in zip(red.reduced_basis, mins))
    res["kz_first_minimum"] = norm2(kz_reduce(cols).reduced_basis[0]) == mins[0]
    dual = lat.dual()
    res["dual_involution"] = dual.dual().same_lattice(lat)
    # B^T D must be integral and unimodular for any basis D of the dual
    pair = matmul([list(c) for c in cols], transpose(dual.columns))
    res["dual_pairing"] = (all(x.denominator == 1 for r in pair for x in r)
                           and abs(int_det([[int(x) for x in r] for r in pair])) == 1)
    b = ceil_frac(2 * lat.nu_upper) + int(rng.integers(1, 4))
    wc = count_window_points(lat, b)
    res["count_sandwich"] = wc.asserted and wc.lower <= wc.count <= wc.upper
    return res


def suite_properties(count: int = 500, seed: int = 0) -> list[Check]:
    fails: dict[str, int] = {}
    for t in range(count):
        r = property_instance(make_rng(seed, "properties", t))
        for k, v in r.items():
            fails[k] = fails.get(k, 0) + (not v)
    return [check(f"{k} failures over {count} instances", v, "==", 0) for k, v in sorted(fails.items())]


def timed(fn, *args, **kwargs):
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t
