"""Command-line front end: ``run``, ``render``, ``check`` and ``index``."""

import argparse
import json
import sys

import numpy as np

from . import suites
from .errors import ComputeFailure, ConfigParse, SchwarzGeomError, Validation
from .geodesics import rotation_index
from .scenario import Overrides, bundled, run_scenario
from .series import PolyRat

EXIT = {"ok": 0, "check_failed": 1, "ConfigParse": 2, "Validation": 3, "ComputeFailure": 4, "IoFailure": 5}


def error_record(exc):
    code = exc.code if isinstance(exc, SchwarzGeomError) else "ComputeFailure"
    if code not in EXIT:
        code = "ComputeFailure"
    return code, json.dumps({"error": code, "message": str(exc), "exit": EXIT[code]}, sort_keys=True)


def parse_h(expr):
    """``h(z)`` from a formula string such as ``5/(z^5-5*z)``."""
    import sympy as sp
    z = sp.Symbol("z")
    try:
        e = sp.sympify(expr.replace("^", "**"), locals={"z": z, "i": sp.I, "I": sp.I})
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigParse(f"cannot parse h(z) = {expr!r}: {exc}") from exc
    if e.free_symbols - {z}:
        raise Validation(f"h(z) may only depend on z, got {sorted(map(str, e.free_symbols))}")
    num, den = sp.fraction(sp.together(e))
    try:
        cn = [complex(c) for c in sp.Poly(num, z).all_coeffs()[::-1]]
        cd = [complex(c) for c in sp.Poly(den, z).all_coeffs()[::-1]]
    except (sp.PolynomialError, TypeError) as exc:
        raise Validation(f"h(z) = {expr!r} is not rational in z") from exc
    return PolyRat(cn, cd)


def _coeff_list(s):
    try:
        return [complex(x.replace("i", "j")) for x in s.split(",")]
    except ValueError as exc:
        raise ConfigParse(f"cannot parse coefficient list {s!r}") from exc


def _seed_grid(s):
    try:
        lo, hi, num = s.split(":")
        out = (float(lo), float(hi), int(num))
    except ValueError as exc:
        raise ConfigParse(f"--seed-grid expects LO:HI:NUM, got {s!r}") from exc
    if out[2] < 1 or not out[1] >= out[0]:
        raise Validation(f"empty seed grid {s!r}")
    return out


def _map_from_args(a):
    if a.h and (a.num or a.den):
        raise Validation("give either --h or --num/--den")
    if a.h:
        return parse_h(a.h)
    if a.num:
        return PolyRat(_coeff_list(a.num), _coeff_list(a.den) if a.den else [1])
    return None


def build_parser():
    # accepted before or after the subcommand; SUPPRESS keeps one from clobbering the other
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="integration tolerance (default 1e-10)")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="directory for outputs (default: current directory)")
    common.add_argument("--seed-grid", default=argparse.SUPPRESS,
                        help="seed/parameter grid LO:HI:NUM for x-parametrized scenarios")

    p = argparse.ArgumentParser(prog="schwarzgeom", description="Curve dynamics by Schwarz reflection.",
                                parents=[common])
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", parents=[common], help="run a scenario and write its SVG/CSV or report")
    r.add_argument("scenario", help="path to a scenario JSON file or a bundled scenario name")

    r = sub.add_parser("render", parents=[common], help="run a figure scenario and write only its SVG")
    r.add_argument("scenario")

    c = sub.add_parser("check", parents=[common], help="run invariant suites")
    c.add_argument("suite", nargs="*", help=f"suites to run (default all): {', '.join(suites.SUITES)}")
    c.add_argument("--pencil", choices=sorted(suites.PENCILS), action="append",
                   help="restrict pencil-based suites to this type (repeatable)")
    c.add_argument("--h", help="rational map for the index suite, e.g. '5/(z^5-5*z)'")
    c.add_argument("--num", help="numerator coefficients, ascending, comma separated")
    c.add_argument("--den", help="denominator coefficients, ascending, comma separated")
    c.add_argument("--r", type=float, action="append", help="radius for the index suite (repeatable)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--json", action="store_true", help="print a JSON report instead of text lines")

    i = sub.add_parser("index", parents=[common], help="rotation index of h(|z| = r)")
    i.add_argument("--h")
    i.add_argument("--num")
    i.add_argument("--den")
    i.add_argument("--r", type=float, required=True)

    sub.add_parser("list", parents=[common], help="list bundled scenarios")
    return p


def _overrides(a):
    return Overrides(tol=a.tol, out_dir=a.out_dir, seed_grid=_seed_grid(a.seed_grid) if a.seed_grid else None)


def _print_checks(results, as_json):
    if as_json:
        print(json.dumps({"checks": [c.record() for c in results], "passed": all(c.passed for c in results)},
                         sort_keys=True))
    else:
        for c in results:
            print(c.line())
    return EXIT["ok"] if all(c.passed for c in results) else EXIT["check_failed"]


def _cmd_check(a):
    names = a.suite or list(suites.SUITES)
    opt = suites.SuiteOptions(seed=a.seed, tol=a.tol or 1e-10)
    if a.pencil:
        opt.pencils = tuple(a.pencil)
    h = _map_from_args(a)
    if h is not None:
        opt.h = h
    if a.r:
        if any(r <= 0 for r in a.r):
            raise Validation("radii must be positive")
        opt.radii = tuple(a.r)
    try:
        results = suites.run_suites(names, opt)
    except (Validation, ConfigParse):
        raise
    except SchwarzGeomError as exc:
        raise ComputeFailure(f"{exc.code}: {exc}") from exc
    return _print_checks(results, a.json)


def _cmd_index(a):
    h = _map_from_args(a)
    if h is None:
        raise Validation("index needs --h or --num")
    if a.r <= 0:
        raise Validation("radius must be positive")
    try:
        rep = rotation_index(h, a.r)
    except SchwarzGeomError as exc:
        raise ComputeFailure(f"{exc.code}: {exc}") from exc
    print(f"I = {rep.index} (zeros {rep.zeros} - poles {rep.poles} + 1); winding number = {rep.winding}")
    return EXIT["ok"]


def main(argv=None):
    a = build_parser().parse_args(argv)
    for k in ("tol", "out_dir", "seed_grid"):
        setattr(a, k, getattr(a, k, None))
    try:
        if a.cmd == "list":
            print("\n".join(bundled()))
            return EXIT["ok"]
        if a.cmd == "check":
            return _cmd_check(a)
        if a.cmd == "index":
            return _cmd_index(a)
        res = run_scenario(a.scenario, _overrides(a), svg=True, csv=a.cmd == "run")
        if res.checks is not None:
            code = _print_checks(res.checks, False)
        else:
            code = EXIT["ok"]
        for path in res.artifacts:
            print(path)
        return code
    except (SchwarzGeomError, ArithmeticError, np.linalg.LinAlgError) as exc:
        code, rec = error_record(exc)
        print(rec, file=sys.stderr)
        return EXIT[code]


if __name__ == "__main__":
    sys.exit(main())
