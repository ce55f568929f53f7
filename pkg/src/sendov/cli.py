"""``sendov`` command line: eval, verify-tables, bound, search, families.

Exit codes: 0 success, 1 a check failed, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, localcontext
from pathlib import Path

import numpy as np

from . import report
from .errors import EndpointUndefined, InvalidSpec, NoFeasibleResult, SendovError
from .families import GENERATORS, FamilyDescriptor
from .metrics import c_of_spec, catalog_for, dist_exact
from .polyform import PolySpec, degree, spec_from_dict
from .roots import MEMBERSHIP_TOL, check_membership
from .search import (
    DEFAULT_BETA_RANGE,
    MultiplicityPattern,
    SearchOptions,
    SearchProblem,
    multistart,
    pattern_scan,
)
from .tables import MEMBERSHIP_CAP, TOL_C, TOL_R, DatasetError, load_records, verify_tables

OK, CHECK_FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    out = report.dumps(payload) if args.json else text
    if getattr(args, "out", None):
        Path(args.out).write_text(out + "\n")
    else:
        print(out)


def _read_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text, parse_float=Decimal)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _precision(args) -> str:
    return args.precision or "auto"


# ------------------------------------------------------------ eval

def eval_summary(spec: PolySpec, tol: float = MEMBERSHIP_TOL, precision: str = "auto") -> dict:
    n = degree(spec)
    d = dist_exact(spec)
    beta = spec.beta_dec
    with localcontext() as ctx:
        ctx.prec = 50
        # |P'(beta)| for the monic polynomial: the integral form scaled by n
        deriv = Decimal(n)
        for cp in spec.crits:
            deriv *= (((cp.re - beta) ** 2 + cp.im ** 2).sqrt()) ** cp.m
        half = (1 + beta) / 2
        square = (1 + beta) ** 2
    out = {
        "degree": n,
        "beta": float(beta),
        "d": float(d),
        "c": None,
        "monic_derivative_at_beta": float(deriv),
        "one_plus_beta_over_2": float(half),
        "one_plus_beta_squared": float(square),
        "notes": [],
    }
    try:
        out["c"] = c_of_spec(spec).c
    except EndpointUndefined:
        out["notes"].append("c undefined at beta in {0, 1}")
    if d > half:
        out["notes"].append(f"d = {float(d):.6g} exceeds (1+beta)/2 = {float(half):.6g}")
        if deriv > square:
            out["notes"].append(
                f"|P'(beta)| = {float(deriv):.6g} exceeds (1+beta)^2 = {float(square):.6g}")
    membership = check_membership(spec, tol, precision)
    out["membership"] = membership.to_dict()
    out["roots_modulus_max"] = membership.max_modulus
    return out


def cmd_eval(args) -> int:
    try:
        spec = spec_from_dict(_read_json(args.spec))
    except (InvalidSpec, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    info = eval_summary(spec, args.tol, _precision(args))
    m = info["membership"]
    lines = [
        f"degree      {info['degree']}",
        f"beta        {report.fmt(info['beta'])}",
        f"d(P, beta)  {report.fmt(info['d'])}",
        f"c           {report.fmt(info['c']) if info['c'] is not None else 'undefined'}",
        f"|P'(beta)|  {report.fmt(info['monic_derivative_at_beta'])} (monic)",
        f"max |root|  {report.fmt(m['max_modulus'])}",
        f"member      {m['is_member']} ({m['method']}, tol {m['tol']:g})",
    ] + [f"note: {s}" for s in info["notes"]]
    _emit(args, info, "\n".join(lines))
    return OK if m["is_member"] else CHECK_FAILED


# ------------------------------------------------------------ verify-tables

def cmd_verify_tables(args) -> int:
    try:
        records = load_records(Path(args.dataset).read_text() if args.dataset else None)
    except (DatasetError, OSError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return USAGE
    cap = None if args.deep else args.membership_cap

    def progress(check):
        if not args.json:
            flag = "ok" if check.passed else ("WARN" if check.warn_only else "FAIL")
            print(f"{check.record.label:<16} {flag}", file=sys.stderr)

    rep = verify_tables(records, args.max_n, args.tol_r, args.tol_c, cap, _precision(args),
                        progress=progress)
    rows = []
    for ch in rep.checks:
        r = ch.record
        mem = ch.membership
        mtxt = "skipped" if mem is None else ("member" if mem.is_member else "NOT member")
        if ch.error:
            mtxt = ch.error
        ex = "" if ch.excess is None else f"  n(c-{r.offset})={float(ch.excess):.6f} [{r.scaled_excess}]"
        rows.append(f"{r.label:<16} d={float(ch.d):.15f} c={float(ch.c):.15f} "
                    f"r:{'ok' if ch.r_match else 'X'} c:{'ok' if ch.c_match else 'X'} {mtxt}{ex}")
    s = rep.summary()
    rows.append(f"{s['passed']}/{s['records']} passed, {s['failed']} failed, {s['warnings']} warnings")
    _emit(args, rep.to_dict(), "\n".join(rows))
    return OK if rep.ok else CHECK_FAILED


# ------------------------------------------------------------ bound

def parse_grid(text: str) -> np.ndarray:
    """``start:step:stop`` (stop included) or a comma-separated list."""
    try:
        if ":" in text:
            start, step, stop = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(count)
            grid[-1] = min(grid[-1], stop)
            if abs(grid[-1] - stop) < 1e-9 * max(1.0, abs(stop)):
                grid[-1] = stop
        else:
            grid = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad beta grid {text!r}") from exc
    if grid.size == 0 or not np.all(np.isfinite(grid)) or grid.min() < 0 or grid.max() > 1:
        raise UsageError(f"beta grid {text!r} must lie in [0, 1]")
    return grid


def bound_csv(n: int, grid: np.ndarray) -> str:
    entries = catalog_for(n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["beta"] + [e.name for e in entries])
    cols = [e.value_at(n, grid) for e in entries]
    for i, b in enumerate(grid):
        w.writerow([report.fmt(b)] + ["" if np.isnan(c[i]) else report.fmt(c[i]) for c in cols])
    return buf.getvalue()


def cmd_bound(args) -> int:
    if args.n < 2:
        raise UsageError("n must be at least 2")
    text = bound_csv(args.n, parse_grid(args.beta_grid))
    if args.out:
        Path(args.out).write_text(text, newline="")
    else:
        sys.stdout.write(text)
    return OK


# ------------------------------------------------------------ search

def _options(args, seed: int) -> SearchOptions:
    opts = SearchOptions(seed=seed)
    if args.budget:
        opts.budget = args.budget
    return opts


def cmd_search(args) -> int:
    data = json.loads(json.dumps(_read_json(args.problem), default=float))
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    starts = args.starts or int(data.get("starts", 20))
    opts = _options(args, seed)
    try:
        if "scan" in data:
            scan = data["scan"]
            rng = tuple(scan.get("beta_range", DEFAULT_BETA_RANGE))
            results = pattern_scan(int(scan["n"]), int(scan["max_distinct"]), starts, seed,
                                   rng, opts, args.workers)
            if not results:
                raise NoFeasibleResult("no pattern produced a member of S(beta)")
            payload = {"best": results[0].to_dict(), "results": [r.to_dict() for r in results]}
            best = results[0]
        else:
            problem = SearchProblem.from_dict(data)
            best = multistart(problem, starts, seed, opts, args.workers)
            payload = best.to_dict()
            if args.trend:
                if not problem.free_beta:
                    raise UsageError("--trend needs a free beta range")
                trend = []
                for hi in (float(t) for t in args.trend.split(",")):
                    p = SearchProblem.from_dict({**data, "beta_mode": {"free": [problem.beta_range[0], hi]}})
                    r = multistart(p, starts, seed, opts, args.workers)
                    trend.append({"beta_hi": hi, "c": r.c, "beta": r.spec.beta})
                payload["trend"] = trend
    except NoFeasibleResult as exc:
        print(f"no feasible result: {exc}", file=sys.stderr)
        return CHECK_FAILED
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed problem: {exc}") from exc
    text = (f"best c = {report.fmt(best.c)} at beta = {report.fmt(best.spec.beta)}\n"
            f"pattern {best.pattern}, converged {best.converged}, "
            f"{best.evaluations} evaluations, seed {best.seed}")
    _emit(args, payload, text)
    return OK


# ------------------------------------------------------------ families

def cmd_families(args) -> int:
    if args.name not in GENERATORS:
        raise UsageError(f"unknown family {args.name!r}; choose from {sorted(GENERATORS)}")
    try:
        params = json.loads(args.params)
        desc = FamilyDescriptor(args.name, params)
        data = desc.to_dict()
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise UsageError(f"bad parameters: {exc}") from exc
    args.json = True
    _emit(args, data, "")
    return OK


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--precision", choices=["double", "dd"], default=None)
    common.add_argument("--seed", type=int, default=None)

    p = argparse.ArgumentParser(prog="sendov", parents=[common],
                                description="Critical-point distances for polynomials in S(beta).")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate one spec file")
    e.add_argument("spec")
    e.add_argument("--tol", type=float, default=MEMBERSHIP_TOL)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify-tables", parents=[common], help="check the embedded dataset")
    v.add_argument("--max-n", type=int, default=None, help="skip rows above this degree")
    v.add_argument("--tol-r", type=float, default=TOL_R)
    v.add_argument("--tol-c", type=float, default=TOL_C)
    v.add_argument("--membership-cap", type=int, default=MEMBERSHIP_CAP)
    v.add_argument("--deep", action="store_true", help="certify membership for every row")
    v.add_argument("--dataset", help="alternative dataset file")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify_tables)

    b = sub.add_parser("bound", parents=[common], help="tabulate catalog bounds as CSV")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--beta-grid", default="0:0.01:1")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("search", parents=[common], help="minimize c over a pattern")
    s.add_argument("problem")
    s.add_argument("--starts", type=int, default=None)
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--trend", help="comma-separated beta upper limits")
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    f = sub.add_parser("families", parents=[common], help="write a family member as a spec")
    f.add_argument("name")
    f.add_argument("--params", default="{}", help="generator keyword arguments as JSON")
    f.add_argument("--out")
    f.set_defaults(func=cmd_families)
    return p


def _merge_globals(argv):
    """Let global flags appear before the subcommand as well as after it."""
    p = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--json", action="store_true")
    pre.add_argument("--precision", choices=["double", "dd"], default=None)
    pre.add_argument("--seed", type=int, default=None)
    known, _ = pre.parse_known_args(argv)
    args = p.parse_args(argv)
    args.json = args.json or known.json
    args.precision = args.precision or known.precision
    args.seed = args.seed if args.seed is not None else known.seed
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = _merge_globals(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except InvalidSpec as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return USAGE
    except SendovError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
