"""Command-line entry point.

Exit codes: 0 when every check passes (or a compute-only command succeeds),
1 when an inequality is violated (the report carries the witness), 2 on bad
input or usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .convex import ProfileError, biconjugate_check, compose, legendre, parse_profile
from .functionals import extract_one_sided_profile, log_lipschitz_constant
from .infconv import ic_check, upper_tail
from .reverse_holder import (WindowError, exp_nontight_constants, herbst_ls_constant, rh_verify,
                             thm_1_1_constant, thm_Lb_bound, thm_main_constant, thm_poincare_constant)
from .space import (SpaceError, check_space, discretize_line, lipschitz_constant, load_field,
                    load_measure, load_space, random_space)
from .suite import PRESETS, run_preset
from .transport import nu_family, relative_entropy, te_check, wasserstein

SCHEMA = 1
OK, VIOLATION, USAGE = 0, 1, 2
CSV_COLUMNS = ("p", "ratio_plus", "ratio_minus", "constant", "margin", "verdict")


class UsageError(ValueError):
    pass


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, +-inf to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")
    return obj


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_json(report: dict, out: str | None) -> None:
    text = json.dumps(_clean(dict(schema=SCHEMA, **report)), indent=2, sort_keys=True) + "\n"
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def threads() -> int:
    try:
        return max(1, int(os.environ.get("FUNCINEQ_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# inputs


def space_arg(text: str):
    """A space file, or ``line:<density>:<half_width>:<step>`` or ``random:<n>:<seed>``."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "line":
            density, hw, step = rest.split(":")
            return discretize_line(density, float(hw), float(step))
        if kind == "random":
            n, seed = rest.split(":")
            return random_space(int(n), int(seed))
    except ValueError as exc:
        if isinstance(exc, SpaceError):
            raise
        raise UsageError(f"--space: cannot parse {text!r}") from None
    space = load_space(text)
    check_space(space)
    return space


def field_arg(text: str, space, positive: bool = False) -> np.ndarray:
    fld = load_field(text).check_on(space)
    vals = np.asarray(fld.values)
    if positive and vals.min() <= 0:
        raise SpaceError(f"{text}: field 'values' must be strictly positive")
    return vals


def float_list(text: str, name: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{name}: empty grid")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise UsageError(f"{name}: grid must be sorted")
    return vals


def positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


# --------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    space = space_arg(args.space)
    info = {"command": "validate", "n": space.n, "metric": "matrix" if space.dist_matrix is not None else space.metric,
            "edges": 0 if space.edges is None else len(space.edges)}
    if args.field:
        field_arg(args.field, space)
        info["field"] = "ok"
    if args.measure:
        w = load_measure(args.measure).weights
        if w.size != space.n:
            raise SpaceError(f"measure 'weights' has {w.size} entries, space has {space.n}")
        info["measure"] = "ok"
    emit_json(dict(info, verdict="valid"), args.out)
    return OK


def cmd_legendre(args) -> int:
    prof = parse_profile(args.profile)
    s = float_list(args.s, "--s")
    report = {"command": "legendre", "profile": repr(prof), "s": s,
              "conjugate": [float(v) for v in np.atleast_1d(legendre(prof, np.asarray(s)))],
              "growth_rate": prof.growth_rate}
    if args.biconjugate:
        report["biconjugate_error"] = biconjugate_check(prof)
    emit_json(report, args.out)
    return OK


def cmd_transport(args) -> int:
    space = space_arg(args.space)
    nu = load_measure(args.nu).weights
    mu = load_measure(args.mu).weights if args.mu else None
    phi = parse_profile(args.phi)
    plan = wasserstein(space, nu, mu, phi)
    emit_json({"command": "transport", "W": plan.cost, "dual_value": plan.dual_value, "gap": plan.gap,
               "marginal_error": plan.marginal_error,
               "H": relative_entropy(nu, space.weights if mu is None else mu),
               "plan": plan.plan, "g": plan.g, "f": plan.f}, args.out)
    return OK


def _lambda_grid(text: str):
    return "auto" if text == "auto" else float_list(text, "--lambda-grid")


def cmd_ic_check(args) -> int:
    space = space_arg(args.space)
    f = field_arg(args.field, space)
    rep = ic_check(space, parse_profile(args.phi), parse_profile(args.Phi), f,
                   _lambda_grid(args.lambda_grid), tol=args.tol, field_id=Path(args.field).stem)
    emit_json(dict(command="ic-check", margins=rep.margins, vacuous_lambdas=rep.vacuous,
                   **rep.to_dict()), args.out)
    return OK if rep.passed else VIOLATION


def cmd_te_check(args) -> int:
    space = space_arg(args.space)
    phi, Phi = parse_profile(args.phi), parse_profile(args.Phi)
    if args.nu:
        ids = [Path(p).stem for p in args.nu]
        family = [load_measure(p).weights for p in args.nu]
    else:
        ids, family = nu_family(space, args.nu_family, args.count, args.seed)
    reps = te_check(space, phi, Phi, family, tol=args.tol, ids=ids, max_workers=threads())
    fails = [r for r in reps if r.verdict == "fail"]
    emit_json({"command": "te-check", "verdict": "fail" if fails else "pass",
               "records": [r.to_dict() for r in reps],
               "witnesses": [r.to_dict() for r in fails]}, args.out)
    return VIOLATION if fails else OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"theorem {args.theorem!r} needs {flags}")


def _psi(args):
    if args.Psi:
        return parse_profile(args.Psi)
    if args.phi and args.Phi:
        return compose(parse_profile(args.Phi), parse_profile(args.phi))
    raise UsageError("theorem 'main' needs --Psi or both --phi and --Phi")


def cmd_rh_constant(args) -> int:
    th = args.theorem
    if th == "herbst":
        _need(args, "lambda_ls", "L", "p")
        c = herbst_ls_constant(args.lambda_ls, args.L, args.p, args.q or 0.0)
    elif th == "t11":
        _need(args, "lambda1", "L", "p")
        c = thm_1_1_constant(args.lambda1, args.L, args.q or 0.0, args.p)
    elif th == "main":
        _need(args, "L", "p")
        c = thm_main_constant(_psi(args), args.L, args.p)
    elif th == "poincare":
        _need(args, "lambda1", "L", "p")
        c = thm_poincare_constant(args.lambda1, args.L, args.p)
    elif th == "expnt":
        _need(args, "M", "lambda_exp", "L", "p")
        pair = exp_nontight_constants(args.M, args.lambda_exp, args.L, args.p)
        if args.json:
            emit_json(dict(command="rh-constant", **pair.to_dict()), None)
        else:
            print(f"uniform {pair.displayed.value:.12g}")
            print(f"conjugate {pair.from_conjugate.value:.12g}")
        return OK
    else:  # lb
        _need(args, "space", "field", "phi", "Phi", "p")
        space = space_arg(args.space)
        f = field_arg(args.field, space, positive=True)
        prof = extract_one_sided_profile(space, f)
        c = thm_Lb_bound(space, parse_profile(args.phi), parse_profile(args.Phi), f, prof, args.p).constant
    if args.json:
        emit_json(dict(command="rh-constant", **c.to_dict()), None)
    else:
        print(f"{c.value:.12g}")
    return OK


def _constant_from(spec: str, L: float):
    """``main:<profile>``, ``poincare:<lambda1>``, ``herbst:<lambda_LS>``,
    ``t11:<lambda1>``, ``expnt:<M>,<lambda_exp>`` or ``value:<C>``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "main":
            prof = parse_profile(rest)
            return lambda p: thm_main_constant(prof, L, p)
        if kind == "poincare":
            return lambda p: thm_poincare_constant(float(rest), L, p)
        if kind == "herbst":
            return lambda p: herbst_ls_constant(float(rest), L, p)
        if kind == "t11":
            return lambda p: thm_1_1_constant(float(rest), L, 0.0, p)
        if kind == "expnt":
            M, lam = (float(v) for v in rest.split(","))
            return lambda p: exp_nontight_constants(M, lam, L, p).from_conjugate
        if kind == "value":
            C = float(rest)
            return lambda p: C
    except ValueError:
        pass
    raise UsageError(f"--constant-from: cannot parse {spec!r}")


def cmd_rh_verify(args) -> int:
    space = space_arg(args.space)
    f = field_arg(args.field, space, positive=True)
    L = args.L if args.L is not None else log_lipschitz_constant(space, f)
    if log_lipschitz_constant(space, f) > L * (1 + 1e-12) + 1e-15:
        raise UsageError(f"field is not {L}-log-Lipschitz")
    make = _constant_from(args.constant_from, L)
    fid = Path(args.field).stem
    recs = [rh_verify(space, f, p, make(p), args.tol, fid) for p in float_list(args.p_grid, "--p-grid")]
    lines = "".join(json.dumps(_clean(dict(schema=SCHEMA, L=L, **r.to_dict())), sort_keys=True) + "\n"
                    for r in recs)
    if args.out:
        write_atomic(args.out, lines)
    else:
        sys.stdout.write(lines)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in recs:
            d = _clean(r.to_dict())
            w.writerow([repr(r.p), repr(r.ratio_plus), repr(r.ratio_minus), d["constant"], d["margin"], r.verdict])
        write_atomic(args.csv, buf.getvalue())
    return OK if all(r.passed for r in recs) else VIOLATION


def cmd_concentration(args) -> int:
    space = space_arg(args.space)
    fields = []
    for path in args.field:
        vals = field_arg(path, space)
        lip = lipschitz_constant(space, vals)
        fields.append(vals / lip if lip > 1.0 else vals)
    if not fields:
        raise UsageError("empty field family")
    Phi = parse_profile(args.Phi) if args.Phi else None
    ts = float_list(args.t_grid, "--t-grid")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "tail", "bound"] if Phi else ["t", "tail"])
    violated = False
    for t in ts:
        tail = max(upper_tail(space, v, t) for v in fields)
        row = [repr(t), repr(tail)]
        if Phi is not None:
            bound = math.exp(-float(Phi(t)))
            violated |= tail > bound * (1 + 1e-12)
            row.append(repr(bound))
        w.writerow(row)
    if args.out:
        write_atomic(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return VIOLATION if violated else OK


def cmd_suite(args) -> int:
    batteries = run_preset(args.preset)
    for b in batteries:
        print(b.line())
    report = {"command": "suite", "preset": args.preset,
              "verdict": "pass" if all(b.ok for b in batteries) else "fail",
              "batteries": [b.to_dict() for b in batteries]}
    if not args.timings:
        for b in report["batteries"]:
            b.pop("seconds")
    if args.out:
        emit_json(report, args.out)
    return OK if report["verdict"] == "pass" else VIOLATION


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="funcineq", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a space (and optional field/measure) file")
    p.add_argument("--space", required=True)
    p.add_argument("--field")
    p.add_argument("--measure")
    p.add_argument("--out")
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("legendre", help="Legendre-Fenchel conjugate of a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--s", required=True, help="comma-separated slopes")
    p.add_argument("--biconjugate", action="store_true")
    p.add_argument("--out")
    p.set_defaults(run=cmd_legendre)

    p = sub.add_parser("transport", help="exact optimal transport cost")
    p.add_argument("--space", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--mu")
    p.add_argument("--phi", default="identity")
    p.add_argument("--out")
    p.set_defaults(run=cmd_transport)

    p = sub.add_parser("ic-check", help="infimum-convolution inequality on a field")
    p.add_argument("--space", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--Phi", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--lambda-grid", default="auto")
    p.add_argument("--tol", type=positive_float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(run=cmd_ic_check)

    p = sub.add_parser("te-check", help="transport-entropy inequality on a family of measures")
    p.add_argument("--space", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--Phi", required=True)
    p.add_argument("--nu-family", choices=("tilts", "deltas", "dirichlet"), default="tilts")
    p.add_argument("--nu", nargs="+", help="measure files (overrides --nu-family)")
    p.add_argument("--count", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=positive_float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(run=cmd_te_check)

    p = sub.add_parser("rh-constant", help="evaluate a reverse-Hölder constant")
    p.add_argument("--theorem", required=True, choices=("herbst", "t11", "main", "lb", "poincare", "expnt"))
    p.add_argument("--lambda1", type=positive_float)
    p.add_argument("--lambda-ls", type=positive_float)
    p.add_argument("--lambda-exp", type=positive_float)
    p.add_argument("--M", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--Psi")
    p.add_argument("--phi")
    p.add_argument("--Phi")
    p.add_argument("--space")
    p.add_argument("--field")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_rh_constant)

    p = sub.add_parser("rh-verify", help="measure moment ratios against a constant")
    p.add_argument("--space", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--p-grid", required=True)
    p.add_argument("--constant-from", required=True)
    p.add_argument("--L", type=float, help="log-Lipschitz constant (default: measured)")
    p.add_argument("--tol", type=positive_float)
    p.add_argument("--out", help="JSON lines output")
    p.add_argument("--csv", help="CSV summary output")
    p.set_defaults(run=cmd_rh_verify)

    p = sub.add_parser("concentration-profile", help="worst empirical tails of 1-Lipschitz fields")
    p.add_argument("--space", required=True)
    p.add_argument("--field", action="append", default=[], required=True)
    p.add_argument("--t-grid", required=True)
    p.add_argument("--Phi")
    p.add_argument("--out")
    p.set_defaults(run=cmd_concentration)

    p = sub.add_parser("suite", help="run a named battery of reference checks")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--timings", action="store_true", help="include runtimes in the report")
    p.add_argument("--out")
    p.set_defaults(run=cmd_suite)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        return args.run(args)
    except (UsageError, SpaceError, ProfileError, WindowError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"funcineq {args.command}: error: {exc}", file=sys.stderr)
        return USAGE
    except (KeyError, TypeError, ValueError) as exc:
        print(f"funcineq {args.command}: error: malformed input ({exc})", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
