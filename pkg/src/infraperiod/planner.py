"""Parameter planning from infrastructure metadata, the closed-form success bounds, and the
expected-iteration tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from mpmath import iv

from .errors import ConfigError, PreconditionError
from .generation import span_product, span_window_factor, zeta_product_lower
from .rational import as_fraction, ceil_frac, decode, encode, format_sig, iv_endpoints, pow_half_ceil, sqrt_ceil

IV_PREC = 200

# cos(π · 17417/36864) is the cosine at the worst admissible argument once qN >= 32^2 and κ = 1/(9n)
COS_ARG = Fraction(17417, 36864)
C_FLOOR = Fraction(746, 100000)

THEOREM_SETS = {
    "multi": ("(I)", "(II)", "(III)", "(IV1)", "(V)", "(VI)", "(VII1)", "(VIII)"),
    "one": ("(I)", "(II)", "(III)", "(IV2)", "(V)", "(VI2)", "(VII2)"),
}
DESK_SET = ("(III)", "(IV)", "(V)")

# printed expected-iteration tables for n = 1..10
SUCCESS_TABLE = ("1.40e8", "1.27e30", "4.67e59", "1.74e102", "6.47e158",
                 "1.39e230", "7.12e316", "2.92e419", "2.72e538", "1.43e674")
COMPETITOR_TABLE = ("1.72e10", "5.32e36", "6.32e82", "8.18e149", "1.19e239",
                    "1.18e351", "3.45e486", "1.02e646", "9.05e829", "6.10e1038")


@dataclass(frozen=True)
class PlannerInput:
    n: int
    A: Fraction
    C: Fraction
    D: Fraction
    lambda1: Fraction  # lower bound on λ1(Λ)
    det: Fraction  # det(Λ), or an upper bound on it
    gamma: Fraction
    nu: Fraction | None = None  # upper bound on ν(Λ); derived from det and λ1 when absent

    def __post_init__(self):
        for name in ("A", "C", "D", "lambda1", "det", "gamma"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.nu is not None:
            object.__setattr__(self, "nu", as_fraction(self.nu))
        if self.n < 1:
            raise ConfigError("n >= 1 required")
        if not (0 < self.C <= 1) or self.A < 1:
            raise ConfigError("need 0 < C <= 1 and A >= 1")
        if min(self.D, self.lambda1, self.det, self.gamma) <= 0:
            raise ConfigError("D, λ1, det and γ must be positive")

    @property
    def nu_upper(self) -> Fraction:
        if self.nu is not None:
            return self.nu
        if self.n == 1:
            return self.det / 2
        n = self.n
        return pow_half_ceil(Fraction(n), n + 1) * self.det / (2 * self.lambda1 ** (n - 1))

    def to_json(self) -> dict:
        d = {"n": self.n}
        for name in ("A", "C", "D", "lambda1", "det", "gamma"):
            d[name] = encode(getattr(self, name))
        d["nu"] = None if self.nu is None else encode(self.nu)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "PlannerInput":
        nu = obj.get("nu")
        return cls(int(obj["n"]), *(decode(obj[k]) for k in ("A", "C", "D", "lambda1", "det", "gamma")),
                   nu=None if nu is None else decode(nu))


@dataclass(frozen=True)
class LedgerEntry:
    required: Fraction
    chosen: Fraction
    relation: str  # ">=", ">" or "<"
    satisfied: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"required": encode(self.required), "chosen": encode(self.chosen), "relation": self.relation,
                "satisfied": self.satisfied, "required_approx": float(self.required),
                "chosen_approx": float(self.chosen), "detail": self.detail}


@dataclass
class PlannedParameters:
    n: int
    N: int
    N0: int | None
    q: int
    L: int
    kappa: Fraction
    mode: str
    ledger: dict[str, LedgerEntry] = field(default_factory=dict)
    required: tuple[str, ...] = ()

    @property
    def eps(self) -> Fraction:
        return Fraction(1, 2 * self.N * self.L)

    def all_required_ok(self) -> bool:
        return all(self.ledger[k].satisfied for k in self.required)

    def failing(self) -> list[str]:
        return [k for k, e in self.ledger.items() if not e.satisfied]

    def to_json(self) -> dict:
        return {"n": self.n, "N": self.N, "N0": self.N0, "q": self.q, "L": self.L,
                "kappa": encode(self.kappa), "eps": encode(self.eps), "mode": self.mode,
                "required": list(self.required), "all_required_ok": self.all_required_ok(),
                "ledger": {k: e.to_json() for k, e in self.ledger.items()}}


def _ge(req, val, detail="") -> LedgerEntry:
    req, val = as_fraction(req), as_fraction(val)
    return LedgerEntry(req, val, ">=", val >= req, detail)


def _gt(req, val, detail="") -> LedgerEntry:
    req, val = as_fraction(req), as_fraction(val)
    return LedgerEntry(req, val, ">", val > req, detail)


def _lt(req, val, detail="") -> LedgerEntry:
    req, val = as_fraction(req), as_fraction(val)
    return LedgerEntry(req, val, "<", val < req, detail)


def _sq_ratio(k: int, lam1: Fraction) -> Fraction:
    """Upper bound on 2√k/λ1."""
    return 2 * sqrt_ceil(Fraction(k)) / lam1


def assumption_ledger(inp: PlannerInput, N: int, q: int, L: int, kappa: Fraction, N0: int | None) -> dict:
    """Every listed inequality evaluated for the given parameters.

    Irrational right-hand sides are replaced by certified upper bounds, so a satisfied flag
    is always sound.
    """
    n, A, C, D, lam1, det = inp.n, inp.A, inp.C, inp.D, inp.lambda1, inp.det
    nu = inp.nu_upper
    kappa = as_fraction(kappa)
    Ns = [N] if N0 is None else [N, N0]
    led: dict[str, LedgerEntry] = {}

    req_L = 4 * n * D * (q + A + C + 2) ** n / C**n
    led["(I)"] = _ge(req_L, L, "ε = 1/(2NL) by construction")
    reqN2 = max(4 / A, Fraction(8 * (n + 1) * n * 2**n) * D * A ** (n - 1) / (3 * C**n))
    reqq2 = 9 * max(Fraction(1), A)
    ok2 = q >= reqq2 and min(Ns) >= reqN2
    led["(II)"] = LedgerEntry(reqN2, Fraction(min(Ns)), ">=", ok2, f"also q >= {reqq2}: {q >= reqq2}")
    led["(III)"] = _ge(_sq_ratio(n, lam1), min(Ns))
    led["(IV)"] = _gt(2 * n * nu + Fraction(3 * n, N), q)
    led["(IV1)"] = _ge(Fraction(6 * n * n, N) + 4 * n * (n + 1) * nu, q)
    led["(IV2)"] = _ge(Fraction(12, N) + 4 * det, q)
    led["(V)"] = _lt(Fraction(1, 8 * n) - Fraction(1, 4 * n * q * min(Ns)), kappa)
    wf = span_window_factor(n)
    led["(VI)"] = _ge((wf * n / (2 * lam1) + Fraction(1, 2 * n * q)) / kappa, min(Ns))
    led["(VI2)"] = _ge((3 / det + 1 + Fraction(1, 2 * q)) / kappa, N)
    led["(VII)"] = _gt((Fraction(1, 2 * q) + n * n / lam1) / kappa, N)
    led["(VII1)"] = _ge((Fraction(n, q) + 2 * n**3 / lam1) / kappa, N)
    led["(VII2)"] = _ge((Fraction(2, q) + 4 / det) / kappa, N)
    if N0 is not None:
        led["(VIII)"] = _ge(8 * n * n * (n + 1) * N, N0)
    return led


def _n_terms_multi(inp: PlannerInput) -> dict:
    n, A, C, D, lam1 = inp.n, inp.A, inp.C, inp.D, inp.lambda1
    return {
        "floor": Fraction(32),
        "shift": Fraction(8 * (n + 1) * n * 2**n) * D * A ** (n - 1) / (3 * C**n),
        "seven": Fraction(9 * n * n, 32) + Fraction(18 * n**4) / lam1,
        "window": span_window_factor(n) * Fraction(9 * n * n) / (2 * lam1) + Fraction(9, 64),
    }


def _q_terms_multi(inp: PlannerInput, N: int, N0: int) -> dict:
    n, A, lam1, det, gamma = inp.n, inp.A, inp.lambda1, inp.det, inp.gamma
    h = Fraction(39, 2)
    corr = 1 + Fraction(5, 2 * n) + Fraction(1, n * n)
    e1 = n * n + 2 * n - 1
    e2 = 2 * n * n + 3 * n - 3
    return {
        "floor": Fraction(32),
        "A": 9 * A,
        "nu": Fraction(6 * n * n, N) + 2 * pow_half_ceil(Fraction(n), n + 3) * (n + 1) * det / lam1 ** (n - 1),
        "generation": h**n * pow_half_ceil(Fraction(n), 2 * n + 3) * corr**n * Fraction(N0) ** e1
        * det ** (2 * n + 1) / (2 * Fraction(9) ** e1 * lam1 ** (n * n - n)),
        "inversion": h ** (2 * n) * pow_half_ceil(Fraction(n), 4 * n + 3) * corr ** (2 * n - 1)
        * Fraction(N0) ** e2 * det ** (4 * n) / (gamma * 39 * Fraction(9) ** e2 * lam1 ** (2 * n * n - 3 * n - 1)),
    }


def _plan_theorem(inp: PlannerInput) -> PlannedParameters:
    n, A, C, D, det, gamma = inp.n, inp.A, inp.C, inp.D, inp.det, inp.gamma
    if n == 1:
        kappa = Fraction(1, 9)
        N = ceil_frac(max(Fraction(32), 4 / A, 32 * D / (3 * C), 36 / det + Fraction(9, 16),
                          27 / det + 9 + Fraction(9, 16)))
        q = ceil_frac(max(Fraction(32), 9 * A, Fraction(12, N) + 4 * det,
                          Fraction(39, 2 * 81) * N * N * det**3 * max(Fraction(1), det / gamma)))
        N0 = None
        required = THEOREM_SETS["one"]
    else:
        kappa = Fraction(1, 9 * n)
        N = ceil_frac(max(_n_terms_multi(inp).values()))
        N0 = 8 * n * n * (n + 1) * N
        q = ceil_frac(max(_q_terms_multi(inp, N, N0).values()))
        required = THEOREM_SETS["multi"]
    L = ceil_frac(4 * n * D * (q + A + C + 2) ** n / C**n)
    led = assumption_ledger(inp, N, q, L, kappa, N0)
    return PlannedParameters(n, N, N0, q, L, kappa, "theorem", led, required)


def _largest_unit_kappa(n: int, q: int, N: int) -> Fraction:
    """1/(9n) when (V) allows it, otherwise the largest 1/m below the (V) threshold."""
    top = Fraction(1, 8 * n) - Fraction(1, 4 * n * q * N)
    if Fraction(1, 9 * n) < top:
        return Fraction(1, 9 * n)
    m = ceil_frac(1 / top)
    if Fraction(1, m) >= top:
        m += 1
    return Fraction(1, m)


def _plan_desk(inp: PlannerInput, N_min: int = 1, q_min: int = 1, kappa: Fraction | None = None) -> PlannedParameters:
    n, A, C, D = inp.n, inp.A, inp.C, inp.D
    N = max(int(N_min), ceil_frac(_sq_ratio(n, inp.lambda1)), 1)
    q = max(int(q_min), ceil_frac(2 * n * inp.nu_upper + Fraction(3 * n, N)))
    if q <= 2 * n * inp.nu_upper + Fraction(3 * n, N):
        q += 1
    kappa = _largest_unit_kappa(n, q, N) if kappa is None else as_fraction(kappa)
    L = ceil_frac(4 * n * D * (q + A + C + 2) ** n / C**n)
    led = assumption_ledger(inp, N, q, L, kappa, None)
    return PlannedParameters(n, N, None, q, L, kappa, "desk", led, DESK_SET)


def plan(inp: PlannerInput, mode: str = "theorem", N_min: int = 1, q_min: int = 1,
         kappa: Fraction | None = None) -> PlannedParameters:
    """Smallest parameters meeting the listed inequalities.

    ``theorem`` meets every hypothesis of the final result (the one-dimensional variant when n = 1).
    ``desk`` meets only (III)-(V) above the given floors, with L from (I); the ledger shows which
    theorem conditions then fail.
    """
    if mode == "theorem":
        return _plan_theorem(inp)
    if mode == "desk":
        return _plan_desk(inp, N_min, q_min, kappa)
    raise ConfigError(f"unknown planning mode {mode!r}")


def recheck(inp: PlannerInput, p: PlannedParameters) -> dict[str, bool]:
    """Independent substitution of the planned values into the hypotheses, squared where roots appear."""
    n, A, C, D, lam1, det, gamma = inp.n, inp.A, inp.C, inp.D, inp.lambda1, inp.det, inp.gamma
    N, q, L, N0 = p.N, p.q, p.L, p.N0
    out = {"L": L * C**n >= 4 * n * D * (q + A + C + 2) ** n, "q_floor": q >= 32 and q >= 9 * A,
           "N_floor": N >= 32, "kappa": p.kappa == Fraction(1, 9 * n)}
    if n == 1:
        out["N"] = (N >= 4 / A and N >= 32 * D / (3 * C) and N >= 36 / det + Fraction(9, 16)
                    and N >= 27 / det + 9 + Fraction(9, 16))
        out["q_iv2"] = q >= Fraction(12, N) + 4 * det
        out["q_rec"] = 81 * 2 * q >= 39 * N * N * det**3 * max(Fraction(1), det / gamma)
        return out
    # n^{(n-1)/2} 2^{n+1} - 2 <= x  <=>  n^{n-1} 4^{n+1} <= (x + 2)^2
    def wf_le(x):
        return x >= 8 * n - 2 and Fraction(n) ** (n - 1) * 4 ** (n + 1) <= (x + 2) ** 2

    x = (N - Fraction(9, 64)) * 2 * lam1 / (9 * n * n)
    out["N"] = (N * 3 * C**n >= 8 * (n + 1) * n * 2**n * D * A ** (n - 1)
                and N >= Fraction(9 * n * n, 32) + Fraction(18 * n**4) / lam1 and wf_le(x))
    out["N0"] = N0 >= 8 * n * n * (n + 1) * N

    def root_le(coef: Fraction, e2: int, rhs: Fraction) -> bool:
        """coef * n^{e2/2} <= rhs, exactly."""
        if rhs < 0:
            return False
        if e2 % 2 == 0:
            return coef * Fraction(n) ** (e2 // 2) <= rhs
        return coef * coef * Fraction(n) ** e2 <= rhs * rhs

    out["q_nu"] = root_le(2 * (n + 1) * det / lam1 ** (n - 1), n + 3, q - Fraction(6 * n * n, N))
    h = Fraction(39, 2)
    corr = 1 + Fraction(5, 2 * n) + Fraction(1, n * n)
    e1, e2 = n * n + 2 * n - 1, 2 * n * n + 3 * n - 3
    out["q_gen"] = root_le(h**n * corr**n * Fraction(N0) ** e1 * det ** (2 * n + 1)
                           / (2 * Fraction(9) ** e1 * lam1 ** (n * n - n)), 2 * n + 3, Fraction(q))
    out["q_inv"] = root_le(h ** (2 * n) * corr ** (2 * n - 1) * Fraction(N0) ** e2 * det ** (4 * n)
                           / (gamma * 39 * Fraction(9) ** e2 * lam1 ** (2 * n * n - 3 * n - 1)), 4 * n + 3, Fraction(q))
    return out


# --- closed-form success bounds ----------------------------------------------------------


def _cos_lower(arg: Fraction) -> Fraction:
    iv.prec = IV_PREC
    lo, _ = iv_endpoints(iv.cos(iv.pi * iv.mpf(arg.numerator) / arg.denominator))
    return lo


def c_constant_lower() -> Fraction:
    """Rational lower bound on cos²(π·17417/36864)."""
    return _cos_lower(COS_ARG) ** 2


def c_for(q: int, N: int, n: int, kappa: Fraction) -> Fraction:
    """Lower bound on cos²(π(1/4 + 1/(4qN) + 2κn))."""
    arg = Fraction(1, 4) + Fraction(1, 4 * q * N) + 2 * as_fraction(kappa) * n
    if arg >= Fraction(1, 2):
        raise PreconditionError("cosine argument leaves (0, π/2)")
    return _cos_lower(arg) ** 2


@dataclass(frozen=True)
class SuccessBound:
    n: int
    exact: Fraction  # rational lower bound on the cosine-exact form
    simplified: Fraction  # the decimal closed form
    general_formula: Fraction  # the n-dimensional formula, also for n = 1

    @property
    def inverse_upper(self) -> Fraction:
        return 1 / self.exact

    def table_entry(self) -> str:
        return format_sig(self.inverse_upper, 3, "up")


def _general_exact(n: int) -> Fraction:
    c = _cos_lower(COS_ARG)
    head = c ** (4 * n + 2) / (2 ** (2 * n + 6) * Fraction(3) ** (4 * n * n + 2 * n) * Fraction(n) ** (4 * n * n + 2 * n))
    return head * (zeta_product_lower(n) - Fraction(1, 4)) * span_product(n)


def success_lower_bound(n: int) -> SuccessBound:
    """Lower bound on the success probability of one full run (one-dimensional variant for n = 1)."""
    if n < 1:
        raise PreconditionError("n >= 1 required")
    general = _general_exact(n)
    if n == 1:
        exact = _cos_lower(COS_ARG) ** 4 / 7776
        simplified = Fraction(7163, 10**12)
    else:
        exact = general
        simplified = (Fraction(6198327, 10**6) * Fraction(154587777, 10**8) ** n
                      / (Fraction(10) ** (6 * n + 6) * Fraction(81) ** (n * n) * Fraction(n) ** (4 * n * n + 2 * n)))
    return SuccessBound(n, exact, simplified, general)


@dataclass(frozen=True)
class CompetitorBound:
    n: int
    bound: Fraction
    ratio: Fraction  # ours / theirs
    improvement_floor: Fraction  # 2^{n^2 - 1}

    def table_entry(self) -> str:
        return format_sig(1 / self.bound, 3, "nearest")


def competitor_bound(n: int) -> CompetitorBound:
    """2^{-20n^2-12n-2} n^{-4n^2}, the previously published success bound."""
    if n < 1:
        raise PreconditionError("n >= 1 required")
    b = Fraction(1, 2 ** (20 * n * n + 12 * n + 2) * n ** (4 * n * n))
    ours = success_lower_bound(n).exact
    return CompetitorBound(n, b, ours / b, Fraction(2) ** (n * n - 1))


def iteration_tables(n_max: int = 10) -> list[dict]:
    rows = []
    for n in range(1, n_max + 1):
        sb = success_lower_bound(n)
        cb = competitor_bound(n)
        rows.append({"n": n, "ours": sb.table_entry(), "ours_general": format_sig(1 / sb.general_formula),
                     "competitor": cb.table_entry(), "simplified_ok": sb.exact >= sb.simplified,
                     "ratio_log10": len(str(cb.ratio.numerator // cb.ratio.denominator)) - 1})
    return rows


def product_tables(n_max: int = 6) -> list[dict]:
    """Π(1 - 2^{-i}) and Π ζ(i)^{-1} columns, three decimals."""
    out = []
    for n in range(1, n_max + 1):
        out.append({"n": n, "span_product": float(span_product(n)), "zeta_product": float(zeta_product_lower(n))})
    return out


# --- joint probability audit ---------------------------------------------------------------


@dataclass(frozen=True)
class AuditFactor:
    name: str
    bound: Fraction
    successes: int
    trials: int

    @property
    def observed(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def ok(self) -> bool:
        return self.trials > 0 and Fraction(self.successes, self.trials) >= self.bound

    def to_json(self) -> dict:
        return {"name": self.name, "bound": encode(self.bound), "bound_approx": float(self.bound),
                "observed": self.observed, "successes": self.successes, "trials": self.trials, "pass": self.ok}


def joint_probability_audit(planned: PlannedParameters, counts: dict[str, tuple[int, int]],
                            det: Fraction, hit_bound: Fraction | None = None) -> list[AuditFactor]:
    """Compare each empirical factor of the end-to-end success with its bound.

    ``counts`` maps factor names to (successes, trials): shift, anchor, hit, generation.
    """
    n = planned.n
    bounds = {
        "shift": Fraction(1, 2),
        "anchor": 1 - Fraction(1, 4 * (n + 1)),
        "generation": Fraction(1, 3) if n == 1 else (zeta_product_lower(n) - Fraction(1, 4)) * span_product(n),
    }
    if hit_bound is None:
        c = c_for(planned.q, planned.N, n, planned.kappa)
        k = planned.kappa
        if n != 1:
            raise PreconditionError("pass hit_bound explicitly for n >= 2")
        # one sample: M_l L_l c / W >= (κc/2)(1 - (1/(2q) + 1/det)/(κN))(1 - 3/(qN) - det/q)
        hit_bound = (k * c / 2 * (1 - (Fraction(1, 2 * planned.q) + 1 / det) / (k * planned.N))
                     * (1 - Fraction(3, planned.q * planned.N) - det / planned.q))
    bounds["hit"] = hit_bound
    out = []
    for name in ("shift", "anchor", "hit", "generation"):
        if name in counts:
            s, t = counts[name]
            out.append(AuditFactor(name, bounds[name], s, t))
    return out


def plan_table(p: PlannedParameters) -> str:
    lines = [f"mode={p.mode} n={p.n} N={p.N} N0={p.N0} q={p.q} L={p.L} kappa={p.kappa}",
             f"{'assumption':<10} {'required':>14} {'rel':>3} {'chosen':>14}  ok  needed"]
    for k, e in p.ledger.items():
        lines.append(f"{k:<10} {float(e.required):>14.6g} {e.relation:>3} {float(e.chosen):>14.6g}  "
                     f"{'y' if e.satisfied else 'n':>2}  {'*' if k in p.required else ''}")
    return "\n".join(lines)


def table_rows(seq: Sequence[dict], keys: Sequence[str]) -> list[list]:
    return [[r[k] for k in keys] for r in seq]
