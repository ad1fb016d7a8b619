"""End-to-end one-dimensional run: random shift, two samples, basis recovery, inversion.

The exact period is used only by the audit, never by the recovery itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import InfraError, PreconditionError
from .infrastructure import BoxInfrastructure, GridSpec, ScaledGrid, shift_is_good
from .planner import AuditFactor, PlannedParameters, PlannerInput, joint_probability_audit
from .recovery import ApproxGeneratingSet, dual_basis_from_approx, recover_basis
from .rng import make_rng
from .rational import encode, round_half_up
from .sampler import build_collision_set, measure_anchor, sample_w_rejection


@dataclass
class AttemptRecord:
    index: int
    shift_index: int
    good_shift: bool
    anchors: list[int] = field(default_factory=list)
    outside_hbound: list[bool] = field(default_factory=list)
    ws: list[int] = field(default_factory=list)
    hits: list[int | None] = field(default_factory=list)  # multiplier j with w = round(2q j/det), or None
    value: Fraction | None = None
    gamma: Fraction | None = None
    failure: str = ""

    def error(self, period: Fraction) -> Fraction | None:
        return None if self.value is None else abs(abs(self.value) - period)

    def generated(self) -> bool | None:
        if any(h is None for h in self.hits) or len(self.hits) < 2:
            return None
        return gcd(*self.hits) == 1

    def to_json(self, period: Fraction) -> dict:
        err = self.error(period)
        return {"index": self.index, "shift_index": self.shift_index, "good_shift": self.good_shift,
                "anchors": self.anchors, "outside_hbound": self.outside_hbound, "ws": self.ws,
                "hits": self.hits, "value": None if self.value is None else encode(self.value),
                "value_approx": None if self.value is None else float(self.value),
                "gamma": None if self.gamma is None else encode(self.gamma),
                "error_approx": None if err is None else float(err), "failure": self.failure}


def _hit(w: int, q: int, kappa: Fraction, N: int, period: Fraction) -> int | None:
    """j when w is the nearest rounding of 2q·j/period for an in-window dual vector j/period."""
    j = round_half_up(Fraction(w) * period / (2 * q))
    if j < 0 or Fraction(j) / period > kappa * N:
        return None
    return j if round_half_up(Fraction(2 * q * j) / period) == w else None


def recover_period(ws: list[int], inp: PlannerInput, planned: PlannedParameters) -> tuple[Fraction, Fraction]:
    """Approximate period from the two samples, and the certified radius γ."""
    q, N, kappa = planned.q, planned.N, planned.kappa
    eps = Fraction(1, 4 * q)
    approx = [[Fraction(w, 2 * q)] for w in ws]
    if any(a[0] > kappa * N + eps for a in approx):
        raise PreconditionError("sample outside the dual window")
    det_dual = 1 / inp.det
    gs = ApproxGeneratingSet(approx, eps, mu=det_dual, alpha=kappa * N, det=det_dual, rank=1)
    res = recover_basis(gs, "kz", f_bound=Fraction(1))
    dual = dual_basis_from_approx(res.basis, res.g, gs.alpha, gs.det, eps)
    return abs(dual.basis[0][0]), dual.gamma


def run_attempt(infra: BoxInfrastructure, inp: PlannerInput, planned: PlannedParameters, seed: int,
                index: int) -> AttemptRecord:
    if infra.n != 1 or planned.n != 1:
        raise PreconditionError("the end-to-end run is one-dimensional")
    rng = make_rng(seed, "pipeline", index)
    sidx = int(rng.integers(0, planned.L))
    grid = GridSpec.from_shift_index(1, planned.N, planned.q, planned.L, planned.kappa, (sidx,))
    sg = ScaledGrid(infra, grid)
    rec = AttemptRecord(index, sidx, shift_is_good(infra, grid, sg))
    period = infra.lattice.columns[0][0]
    for _ in range(2):
        anchor = measure_anchor(grid, rng)
        coll = build_collision_set(infra, grid, anchor, sg)
        w = sample_w_rejection(coll, rng)[0]
        rec.anchors.append(anchor[0])
        rec.outside_hbound.append(not coll.anchor_in_hbound)
        rec.ws.append(w)
        rec.hits.append(_hit(w, planned.q, planned.kappa, planned.N, period))
    try:
        rec.value, rec.gamma = recover_period(rec.ws, inp, planned)
    except InfraError as exc:
        rec.failure = f"{type(exc).__name__}: {exc}"
    return rec


def audit_counts(records: list[AttemptRecord]) -> dict[str, tuple[int, int]]:
    """Factor counts, each conditioned on the earlier factors holding.

    Hits are independent draws from one distribution, so the generation factor is estimated
    over all pairs of hit samples rather than only pairs from the same attempt.
    """
    shift = (sum(r.good_shift for r in records), len(records))
    good = [r for r in records if r.good_shift]
    anchor = (sum(sum(r.outside_hbound) for r in good), sum(len(r.outside_hbound) for r in good))
    js = [h for r in good for o, h in zip(r.outside_hbound, r.hits) if o and h is not None]
    hit_t = sum(sum(r.outside_hbound) for r in good)
    pairs = [(a, b) for i, a in enumerate(js) for b in js[i + 1:]]
    gen = (sum(gcd(a, b) == 1 for a, b in pairs), len(pairs))
    return {"shift": shift, "anchor": anchor, "hit": (len(js), hit_t), "generation": gen}


@dataclass
class EndToEndResult:
    records: list[AttemptRecord]
    successes: int
    audit: list[AuditFactor]
    period: Fraction
    gamma_target: Fraction

    def to_json(self) -> dict:
        return {"attempts": len(self.records), "successes": self.successes,
                "period": encode(self.period), "gamma_target": encode(self.gamma_target),
                "audit": [a.to_json() for a in self.audit],
                "records": [r.to_json(self.period) for r in self.records]}


def end_to_end(infra: BoxInfrastructure, inp: PlannerInput, planned: PlannedParameters, attempts: int,
               seed: int) -> EndToEndResult:
    records = [run_attempt(infra, inp, planned, seed, i) for i in range(attempts)]
    period = infra.lattice.columns[0][0]
    ok = sum(1 for r in records if r.value is not None and r.error(period) <= inp.gamma)
    audit = joint_probability_audit(planned, audit_counts(records), inp.det)
    return EndToEndResult(records, ok, audit, period, inp.gamma)


def success_rate(result: EndToEndResult) -> float:
    return result.successes / max(len(result.records), 1)


def observed_errors(result: EndToEndResult) -> np.ndarray:
    errs = [float(r.error(result.period)) for r in result.records if r.value is not None]
    return np.array(errs)
