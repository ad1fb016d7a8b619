from fractions import Fraction

import pytest

from infraperiod.errors import PreconditionError
from infraperiod.experiments import pipeline_setup
from infraperiod.pipeline import (
    AttemptRecord,
    _hit,
    audit_counts,
    end_to_end,
    observed_errors,
    recover_period,
    run_attempt,
    success_rate,
)
from infraperiod.rational import round_half_up

F = Fraction


@pytest.fixture(scope="module")
def setup():
    return pipeline_setup(10)


def _w(j, q):
    return round_half_up(F(2 * q * j, 40))


def test_hit_inverts_rounding(setup):
    _, _, p = setup
    for j in (0, 1, 7, 142):
        assert _hit(_w(j, p.q), p.q, p.kappa, p.N, F(40)) == j
    # beyond the window κN = 32/9
    assert _hit(_w(143, p.q), p.q, p.kappa, p.N, F(40)) is None
    assert _hit(_w(7, p.q) + 1, p.q, p.kappa, p.N, F(40)) is None


def test_recover_from_coprime_hits(setup):
    _, inp, p = setup
    value, gamma = recover_period([_w(3, p.q), _w(5, p.q)], inp, p)
    assert abs(value - 40) <= gamma <= inp.gamma


def test_non_generating_hits_give_a_multiple(setup):
    _, inp, p = setup
    value, gamma = recover_period([_w(2, p.q), _w(4, p.q)], inp, p)
    assert abs(value - 20) <= gamma


def test_out_of_window_sample_rejected(setup):
    _, inp, p = setup
    with pytest.raises(PreconditionError):
        recover_period([_w(3, p.q), 2 * p.q * 4], inp, p)


def test_attempts_are_deterministic(setup):
    infra, inp, p = setup
    a = run_attempt(infra, inp, p, seed=3, index=1)
    b = run_attempt(infra, inp, p, seed=3, index=1)
    assert a.to_json(F(40)) == b.to_json(F(40))
    assert len(a.ws) == 2 and 0 <= a.shift_index < p.L


def test_audit_counts_conditioning():
    recs = [AttemptRecord(0, 0, True, outside_hbound=[True, True], hits=[3, 5]),
            AttemptRecord(1, 0, True, outside_hbound=[True, False], hits=[4, None]),
            AttemptRecord(2, 0, False, outside_hbound=[True, True], hits=[1, 1])]
    c = audit_counts(recs)
    assert c["shift"] == (2, 3)
    assert c["anchor"] == (3, 4)
    assert c["hit"] == (3, 3)
    # pairs among hits 3, 5, 4
    assert c["generation"] == (3, 3)
    assert recs[0].generated() and recs[1].generated() is None


def test_short_end_to_end(setup):
    infra, inp, p = setup
    res = end_to_end(infra, inp, p, 3, seed=0)
    assert len(res.records) == 3 and 0 <= success_rate(res) <= 1
    assert len(observed_errors(res)) == sum(r.value is not None for r in res.records)
    assert {a.name for a in res.audit} <= {"shift", "anchor", "hit", "generation"}
    assert res.to_json()["attempts"] == 3
