"""Command-line harness: synth, plan, sample, recover, verify, report.

Exit codes: 0 all checks pass, 2 a check failed, 3 capability or budget, 4 configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapabilityError, CheckFailure, ConfigError, InfraError, PreconditionError
from .experiments import (
    Check,
    check,
    instance_1d,
    instance_2d,
    planner_input_for,
    suite_collisions,
    suite_end_to_end,
    suite_formulas,
    suite_fourier,
    suite_groups,
    suite_one_dim_generation,
    suite_properties,
    suite_quotient,
    suite_recovery,
    suite_shift,
    suite_span,
)
from .infrastructure import BoxInfrastructure, GridSpec, interval_infrastructure, shift_is_good, synth_box_infrastructure
from .lattice import Lattice
from .pipeline import recover_period
from .planner import PlannerInput, iteration_tables, plan, plan_table, product_tables, recheck
from .rational import decode, encode
from .recovery import ApproxGeneratingSet, dual_basis_from_approx, recover_basis
from .rng import make_rng
from .sampler import draw_sample

SCHEMA = "infraperiod.transcript/1"


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from exc


def _jsonable(x):
    if isinstance(x, Fraction):
        return encode(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


# --- subcommands ------------------------------------------------------------------------


def _load(path: str) -> dict:
    """A transcript body, or a bare JSON object."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if isinstance(obj, dict) and "schema" in obj:
        if obj["schema"] != SCHEMA:
            raise ConfigError(f"{path}: schema mismatch ({obj['schema']!r})")
        return obj["body"]
    return obj


def cmd_synth(args) -> dict:
    if args.n == 1:
        corners = args.corners if args.corners else [0]
        infra = interval_infrastructure(args.period, corners)
    else:
        lat = Lattice.scaled_identity(args.n, args.period) if args.lattice is None else \
            Lattice.from_columns(json.loads(Path(args.lattice).read_text()))
        infra = synth_box_infrastructure(args.n, lat, args.cells, make_rng(args.seed, "synth", 0))
    infra.verify_tiling()
    lat = infra.lattice
    return {"infrastructure": infra.to_json(), "planner_input": planner_input_for(infra, args.gamma).to_json(),
            "summary": {"n": infra.n, "det": encode(lat.det), "A": encode(infra.A), "D": infra.D,
                        "cells": len(infra.cells)}, "checks": []}


def _planner_input(args) -> PlannerInput:
    if args.input:
        obj = _load(args.input)
        return PlannerInput.from_json(obj.get("planner_input", obj))
    missing = [k for k in ("n", "A", "lambda1", "det") if getattr(args, k) is None]
    if missing:
        raise ConfigError(f"plan needs --{' --'.join(missing)} (or --input)")
    return PlannerInput(args.n, args.A, args.C, args.D, args.lambda1, args.det, args.gamma, nu=args.nu)


def cmd_plan(args) -> dict:
    inp = _planner_input(args)
    p = plan(inp, args.mode, N_min=args.N_min, q_min=args.q_min)
    rc = recheck(inp, p) if args.mode == "theorem" else {}
    checks = [Check(f"assumption {k}", e.chosen, e.relation, e.required, e.satisfied)
              for k, e in p.ledger.items() if k in p.required]
    checks += [Check(f"recheck {k}", v, "==", True, v) for k, v in rc.items()]
    if args.verbose:
        print(plan_table(p), file=sys.stderr)
    return {"input": inp.to_json(), "plan": p.to_json(), "checks": checks}


def _load_infra(path: str | None, builtin: str | None):
    if builtin:
        inst = instance_1d() if builtin == "1d" else instance_2d()
        return inst.infra, inst.planned
    if not path:
        raise ConfigError("sample needs --infra FILE or --builtin {1d,2d}")
    obj = _load(path)
    return BoxInfrastructure.from_json(obj.get("infrastructure", obj)), None


def cmd_sample(args) -> dict:
    infra, planned = _load_infra(args.infra, args.builtin)
    if args.plan:
        obj = _load(args.plan)
        pj = obj.get("plan", obj)
        N, q, L, kappa = int(pj["N"]), int(pj["q"]), int(pj["L"]), decode(pj["kappa"])
    elif planned is not None:
        N, q, L, kappa = planned.N, planned.q, planned.L, planned.kappa
    else:
        raise ConfigError("sample needs --plan FILE unless a builtin instance is used")
    samples = []
    for i in range(args.count):
        rng = make_rng(args.seed, "sample", i)
        idx = tuple(int(x) for x in rng.integers(0, L, size=infra.n)) if args.shift is None else \
            tuple([args.shift] * infra.n)
        g = GridSpec.from_shift_index(infra.n, N, q, L, kappa, idx)
        rec = draw_sample(infra, g, rng, args.sampling, args.budget_terms, shift_is_good(infra, g))
        samples.append({"shift_index": list(idx), **rec.to_json()})
    checks = [Check("good shifts", sum(s["good_shift"] for s in samples), ">=", 0, True)]
    return {"params": {"N": N, "q": q, "L": L, "kappa": encode(kappa)}, "samples": samples, "checks": checks}


def cmd_recover(args) -> dict:
    obj = _load(args.input)
    if "samples" in obj:
        if not args.planner:
            raise ConfigError("recovering from samples needs --planner FILE (a synth or plan transcript)")
        pobj = _load(args.planner)
        inp = PlannerInput.from_json(pobj.get("planner_input", pobj.get("input", pobj)))
        prm = obj["params"]
        from .planner import PlannedParameters

        planned = PlannedParameters(1, int(prm["N"]), None, int(prm["q"]), int(prm["L"]), decode(prm["kappa"]), "input")
        ws = [s["w"][0] for s in obj["samples"]]
        try:
            value, gamma = recover_period(ws, inp, planned)
        except PreconditionError as exc:
            return {"period_estimate": None, "failure": str(exc),
                    "checks": [Check("samples inside the dual window", False, "==", True, False)]}
        checks = [Check("certified radius", gamma, "<=", inp.gamma, gamma <= inp.gamma)]
        return {"period_estimate": encode(value), "period_approx": float(value), "gamma": encode(gamma),
                "checks": checks}
    vecs = [[decode(a) for a in v] for v in obj["vectors"]]
    gs = ApproxGeneratingSet(vecs, decode(obj["eps"]), decode(obj["mu"]), decode(obj["alpha"]),
                             decode(obj["det"]), int(obj.get("rank", len(vecs[0]))))
    res = recover_basis(gs, obj.get("mode", args.reduction))
    out = {"basis": _jsonable(res.basis), "delta": encode(res.delta), "g": encode(res.g),
           "checks": [Check(f"internal {k}", v, "==", True, v) for k, v in res.checks.items()]}
    if obj.get("dual", False):
        dr = dual_basis_from_approx(res.basis, res.g, gs.alpha, gs.det, gs.eps)
        out["dual_basis"] = _jsonable(dr.basis)
        out["gamma"] = encode(dr.gamma)
        out["checks"] += [Check(f"dual {k}", v, "==", True, v) for k, v in dr.checks.items()]
    return out


def _verify_part1(args) -> list[Check]:
    ns = [args.n] if args.n else [2, 3]
    out = []
    for n in ns:
        if n >= 2:
            out += suite_span(n, args.trials or 10_000, args.seed)
        out += suite_groups(n)
    out += suite_one_dim_generation(args.trials or 10_000, args.seed)
    out += suite_quotient(50, args.seed)
    return out


def _verify_sampler(args) -> list[Check]:
    ns = [args.n] if args.n else [1, 2]
    out = []
    for n in ns:
        inst = instance_1d() if n == 1 else instance_2d()
        out += suite_fourier(inst, args.seed)
        out += suite_collisions(inst)
    return out


def _verify_shift(args) -> list[Check]:
    ns = [args.n] if args.n else [1, 2]
    return [c for n in ns for c in suite_shift(n, args.trials or 10_000, args.seed)]


def _verify_recovery(args) -> list[Check]:
    return suite_recovery(args.trials or 100, args.seed)


def _verify_endtoend(args) -> list[Check]:
    checks, _ = suite_end_to_end(args.trials or 200, args.seed, Fraction(args.gamma))
    return checks


VERIFY = {
    "part1": _verify_part1,
    "sampler": _verify_sampler,
    "shift": _verify_shift,
    "recovery": _verify_recovery,
    "endtoend": _verify_endtoend,
    "formulas": lambda a: suite_formulas(),
    "properties": lambda a: suite_properties(a.trials or 500, a.seed),
}


def cmd_verify(args) -> dict:
    checks = VERIFY[args.suite](args)
    return {"suite": args.suite, "checks": checks}


def cmd_report(args) -> dict:
    if not args.transcripts:
        raise ConfigError("report needs at least one transcript")
    rows = []
    sections = []
    for path in args.transcripts:
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if obj.get("schema") != SCHEMA:
            raise ConfigError(f"{path}: schema mismatch ({obj.get('schema')!r})")
        body = obj["body"]
        sections.append(obj["command"])
        for c in body.get("checks", []):
            rows.append({"transcript": Path(path).name, "command": obj["command"], **c})
    tables = {"iterations": iteration_tables(10), "products": product_tables(6)} if args.tables else {}
    return {"sections": sections, "rows": rows, "tables": tables,
            "checks": [check("all transcript checks pass", sum(not r["pass"] for r in rows), "==", 0)]}


# --- output --------------------------------------------------------------------------------


CSV_FIELDS = ["name", "observed_approx", "relation", "bound_approx", "pass"]


def checks_csv(checks: list[dict], prefix: tuple[str, ...] = ()) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(prefix) + CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for c in checks:
        w.writerow(c)
    return buf.getvalue()


def report_markdown(body: dict) -> str:
    lines = ["# Verification summary", ""]
    by_cmd: dict[str, list] = {}
    for r in body["rows"]:
        by_cmd.setdefault(f"{r['command']} ({r['transcript']})", []).append(r)
    for cmd, rows in by_cmd.items():
        ok = sum(r["pass"] for r in rows)
        lines += [f"## {cmd}", "", f"{ok}/{len(rows)} checks pass.", "",
                  "| check | observed | rel | bound | pass |", "|---|---|---|---|---|"]
        for r in rows:
            lines.append(f"| {r['name']} | {r['observed_approx']} | {r['relation']} | {r['bound_approx']} | "
                         f"{'yes' if r['pass'] else 'NO'} |")
        lines.append("")
    t = body.get("tables") or {}
    if t:
        lines += ["## Iteration bounds", "", "| n | this method | competitor |", "|---|---|---|"]
        lines += [f"| {r['n']} | {r['ours']} | {r['competitor']} |" for r in t["iterations"]]
        lines += ["", "## Products", "", "| n | Π(1-2^-i) | Πζ(i)^-1 |", "|---|---|---|"]
        lines += [f"| {r['n']} | {r['span_product']:.3f} | {r['zeta_product']:.3f} |" for r in t["products"]]
        lines.append("")
    return "\n".join(lines)


def _config_echo(args) -> dict:
    skip = {"func", "config", "out", "verbose"}
    return {k: _jsonable(v if not isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items())
            if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget-terms", type=int, default=50_000_000, dest="budget_terms")
    common.add_argument("--out", default=None, help="transcript path; CSV and markdown are written alongside")
    common.add_argument("--config", default=None, help="JSON file mirroring the flags; flags win")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="infraperiod", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="build a synthetic infrastructure")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--period", type=_frac, default=Fraction(40), help="period (n=1) or lattice scale")
    s.add_argument("--corners", type=_frac, nargs="*", default=None)
    s.add_argument("--lattice", default=None, help="JSON file with basis columns")
    s.add_argument("--cells", type=int, default=4)
    s.add_argument("--gamma", type=_frac, default=Fraction(1))
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("plan", parents=[common], help="choose N, q, L, κ and print the assumption ledger")
    s.add_argument("--input", default=None, help="synth transcript supplying the planner input")
    s.add_argument("--n", type=int)
    s.add_argument("--A", type=_frac)
    s.add_argument("--C", type=_frac, default=Fraction(1))
    s.add_argument("--D", type=_frac, default=Fraction(1))
    s.add_argument("--lambda1", type=_frac)
    s.add_argument("--det", type=_frac)
    s.add_argument("--gamma", type=_frac, default=Fraction(1))
    s.add_argument("--nu", type=_frac, default=None)
    s.add_argument("--mode", choices=("theorem", "desk"), default="theorem")
    s.add_argument("--N-min", type=int, default=1, dest="N_min")
    s.add_argument("--q-min", type=int, default=1, dest="q_min")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("sample", parents=[common], help="draw outcomes w from the simulated measurement")
    s.add_argument("--infra", default=None)
    s.add_argument("--builtin", choices=("1d", "2d"), default=None)
    s.add_argument("--plan", default=None)
    s.add_argument("--count", type=int, default=2)
    s.add_argument("--shift", type=int, default=None, help="fixed diagonal shift index")
    s.add_argument("--sampling", choices=("targets-only", "exact-dist"), default="targets-only")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("recover", parents=[common], help="basis (or period) from approximate generators")
    s.add_argument("--input", required=True)
    s.add_argument("--planner", default=None)
    s.add_argument("--reduction", choices=("lll", "kz"), default="kz")
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", choices=sorted(VERIFY))
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--gamma", type=_frac, default=Fraction(10))
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("report", parents=[common], help="aggregate transcripts into CSV and markdown")
    s.add_argument("transcripts", nargs="*")
    s.add_argument("--no-tables", dest="tables", action="store_false")
    s.set_defaults(func=cmd_report)
    return p


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        # file values become defaults, so explicit flags still win
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sp._actions}
        conv = {}
        for k, v in cfg.items():
            k = k.replace("-", "_")
            if k not in known:
                raise ConfigError(f"unknown config key {k!r}")
            t = known[k].type
            conv[k] = [t(str(x)) for x in v] if isinstance(v, list) and t else (t(str(v)) if t and v is not None else v)
        sp.set_defaults(**conv)
        args = parser.parse_args(argv)
    return args


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main(argv=None) -> int:
    t0 = time.time()
    started = datetime.now(timezone.utc).isoformat()
    try:
        args = _parse(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except SystemExit as exc:  # argparse usage errors
        return 4 if exc.code not in (0, None) else 0
    try:
        body = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except CapabilityError as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"config error: malformed input ({type(exc).__name__}: {exc})", file=sys.stderr)
        return 4
    except InfraError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code if exc.exit_code in (2, 3, 4) else 2
    checks = [c.to_json() if isinstance(c, Check) else c for c in body.pop("checks", [])]
    body = _jsonable(body)
    body["checks"] = checks
    ok = all(c["pass"] for c in checks)
    transcript = {
        "schema": SCHEMA,
        "command": args.command + (f" {args.suite}" if args.command == "verify" else ""),
        "config": _config_echo(args),
        "body": body,
        "pass": ok,
        "metadata": {"started": started, "elapsed_s": round(time.time() - t0, 3), "version": __version__,
                     "python": platform.python_version()},
    }
    text = json.dumps(transcript, indent=2, sort_keys=False) + "\n"
    rows = body["rows"] if args.command == "report" else checks
    if args.out:
        out = Path(args.out)
        _write(out, text)
        if args.command in ("verify", "report"):
            _write(out.with_suffix(".csv"), checks_csv(rows, ("transcript", "command") if args.command == "report" else ()))
        if args.command == "report":
            _write(out.with_suffix(".md"), report_markdown(body))
    else:
        sys.stdout.write(text)
    for c in checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}", file=sys.stderr)
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
