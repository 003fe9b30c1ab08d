"""Scenario files: JSON loading, validation and execution."""

import json
import os
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import suites
from .dynamics import MobiusFlow, VelocityField, integrate_reflection, stationary_points
from .errors import ComputeFailure, ConfigParse, IoFailure, SchwarzGeomError, Validation
from .geodesics import HoloFamily
from .moebius import MobiusMap, circle_of, pencil_solution
from .render import CurveSet, RenderStyle, csv_text, curves_from_flow, curves_from_holo, svg_text
from .series import PolyRat

KINDS = ("pencil", "velocity-flow", "davis", "holo-family", "check-suite")


def _schema():
    return json.loads(resources.files("schwarzgeom.scenarios").joinpath("schema.json").read_text("utf-8"))


def bundled():
    """Names of the scenarios shipped with the package."""
    files = resources.files("schwarzgeom.scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json") and p.name != "schema.json")


def resolve(path):
    """A filesystem path, or the name of a bundled scenario."""
    if os.path.exists(path):
        return path
    name = path[:-5] if path.endswith(".json") else path
    if name in bundled():
        return str(resources.files("schwarzgeom.scenarios").joinpath(name + ".json"))
    raise IoFailure(f"no scenario file or bundled scenario named {path!r}")


@dataclass
class Overrides:
    tol: float = None
    out_dir: str = None
    seed_grid: tuple = None  # (lo, hi, num)


@dataclass
class Scenario:
    kind: str
    params: dict
    output: dict = field(default_factory=dict)
    name: str = ""
    source: str = None

    @property
    def style(self):
        st = dict(self.output.get("style", {}))
        if "ramp" in st:
            st["ramp"] = tuple(st["ramp"])
        if st.get("viewport") is not None:
            st["viewport"] = tuple(st["viewport"])
        return RenderStyle(**st)


def parse_scenario(text, source=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{source or 'scenario'}: {exc}") from exc
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise Validation(f"{source or 'scenario'}: {where}: {exc.message}") from exc
    sc = Scenario(doc["kind"], doc["params"], doc.get("output", {}), doc.get("name", ""), source)
    validate(sc)
    return sc


def load_scenario(path):
    path = resolve(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return parse_scenario(text, path)


# ---------------------------------------------------------------------------
# parameter decoding

def cnum(v):
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def rational(d):
    num = [cnum(c) for c in d["num"]]
    den = [cnum(c) for c in d.get("den", [1])]
    if not any(num):
        raise Validation("numerator is identically zero")
    if not any(den):
        raise Validation("denominator is identically zero")
    return PolyRat(num, den)


def grid(d):
    if "values" in d:
        return np.asarray(d["values"], dtype=float)
    lo, hi = d["range"]
    return np.linspace(lo, hi, d["num"])


def circle(d):
    """Schwarz matrix of ``|z - c| = r`` or of the line through ``p`` at ``angle``."""
    if "center" in d:
        c, r = cnum(d["center"]), float(d["radius"])
        return MobiusMap([[np.conj(c), r * r - abs(c) ** 2], [1, -c]]).to_schwarz_form()
    p, e = cnum(d["point"]), np.exp(-2j * float(d["angle"]))
    return MobiusMap([[e, np.conj(p) - e * p], [0, 1]]).to_schwarz_form()


def validate(sc):
    """Preconditions of the target computation, checked before running anything."""
    p = sc.params
    if "t" in p:
        t = grid(p["t"])
        if not np.all(np.isfinite(t)):
            raise Validation("time grid must be finite")
    if sc.kind == "pencil":
        if not any(p["coeffs"]):
            raise Validation("pencil coefficients all vanish")
        if p["param"]["kind"] == "x" and not p["param"]["range"][1] > p["param"]["range"][0]:
            raise Validation("empty parameter range")
    elif sc.kind == "velocity-flow":
        v = rational(p["v"])
        if not v.is_real():
            raise Validation("velocity field must have real coefficients")
        if grid(p["seeds"]).size < 1:
            raise Validation("no seeds")
    elif sc.kind == "holo-family":
        rational(p["h"])
        if p.get("c", 1.0) == 0:
            raise Validation("time scale c must be nonzero")
    elif sc.kind == "davis":
        for key in ("S0", "S1"):
            circle(p[key])
    elif sc.kind == "check-suite":
        bad = [s for s in p["suites"] if s not in suites.SUITES]
        if bad:
            raise Validation(f"unknown suites {bad}")
    sc.style  # RenderStyle validates the viewport and colours


# ---------------------------------------------------------------------------
# computation

def _theta_grid(n):
    return np.linspace(-np.pi, np.pi, n, endpoint=False)


def pencil_curves(coeffs, t, theta):
    """Circles of a pencil, ``gamma(t, .) = P(-t/2)`` applied to ``tan(theta/2)`` in homogeneous form."""
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    W, WX, WXX = [], [], []
    for tk in t:
        (a, b), (cc, d) = pencil_solution(*coeffs, -tk / 2).m
        det = a * d - b * cc
        D = cc * s + d * c
        with np.errstate(divide="ignore", invalid="ignore"):
            W.append((a * s + b * c) / D)
            WX.append(det / (2 * D * D))
            WXX.append(-det * (cc * c - d * s) / (2 * D ** 3))
    return CurveSet(t, theta, W, "theta", np.array(WX), np.array(WXX), closed=True)


def davis_curves(S0, S1, n, samples):
    from .dynamics import davis_iterate
    it = davis_iterate(S0, S1, n)
    theta = _theta_grid(samples)
    W, WX, WXX = [], [], []
    for k in range(n + 1):
        shape = circle_of(it[k].rep)
        if shape.kind == "circle":
            e = np.exp(1j * theta)
            W.append(shape.center + shape.radius * e)
            WX.append(1j * shape.radius * e)
            WXX.append(-shape.radius * e)
        else:
            c, s = np.cos(theta / 2), np.sin(theta / 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                W.append(shape.point + shape.direction * s / c)
                WX.append(shape.direction / (2 * c * c))
                WXX.append(shape.direction * s / (2 * c ** 3))
    return CurveSet(np.arange(n + 1, dtype=float), theta, W, "theta", np.array(WX), np.array(WXX), closed=True)


def compute(sc, ov=Overrides()):
    """Curves for a figure scenario, or check results for a check suite."""
    p = sc.params
    if sc.kind == "check-suite":
        opt = suites.SuiteOptions(seed=p.get("seed", 0), tol=ov.tol or 1e-10)
        return suites.run_suites(p["suites"], opt)
    if sc.kind == "davis":
        if ov.seed_grid is not None:
            raise Validation("--seed-grid applies only to pencil and velocity-flow scenarios")
        return davis_curves(circle(p["S0"]), circle(p["S1"]), p["n"], p.get("samples", 256))
    t = grid(p["t"])
    if sc.kind == "pencil":
        par = p["param"]
        if ov.seed_grid is not None or par["kind"] == "x":
            lo, hi, num = ov.seed_grid or (*par["range"], par["num"])
            return curves_from_flow(MobiusFlow.pencil(*p["coeffs"]).family(np.linspace(lo, hi, int(num)), t))
        return pencil_curves(p["coeffs"], t, _theta_grid(par["num"]))
    if sc.kind == "velocity-flow":
        v = VelocityField(rational(p["v"]))
        seeds = np.linspace(ov.seed_grid[0], ov.seed_grid[1], int(ov.seed_grid[2])) if ov.seed_grid else grid(p["seeds"])
        F = integrate_reflection(v, seeds, t_eval=t, tol=ov.tol or p.get("tol", 1e-10))
        marks = [sp.x0 for sp in stationary_points(v)] if p.get("markers", True) else []
        return curves_from_flow(F, marks)
    if ov.seed_grid is not None:
        raise Validation("--seed-grid applies only to pencil and velocity-flow scenarios")
    if sc.kind == "holo-family":
        F = HoloFamily(rational(p["h"]), p.get("c", 1.0), p.get("planar", False))
        n = p.get("theta_num", 1024)
        theta = np.linspace(0, 2 * np.pi, n, endpoint=False) if not F.planar else np.linspace(-np.pi, np.pi, n)
        return curves_from_holo(F, t, theta)
    raise Validation(f"unknown kind {sc.kind}")


# ---------------------------------------------------------------------------
# execution

def _target(name, out_dir):
    return os.path.join(out_dir, name) if out_dir and not os.path.isabs(name) else name


def _write(path, text):
    try:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


@dataclass
class RunResult:
    scenario: Scenario
    artifacts: list
    checks: list = None

    @property
    def ok(self):
        return self.checks is None or all(c.passed for c in self.checks)


def run_scenario(path_or_scenario, ov=Overrides(), svg=True, csv=True):
    """Load, validate, compute and write the outputs named in the scenario."""
    sc = path_or_scenario if isinstance(path_or_scenario, Scenario) else load_scenario(path_or_scenario)
    try:
        result = compute(sc, ov)
    except (Validation, IoFailure):
        raise
    except SchwarzGeomError as exc:
        raise ComputeFailure(f"{exc.code}: {exc}") from exc
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise ComputeFailure(str(exc)) from exc
    out = sc.output
    stem = sc.name or (os.path.basename(sc.source)[:-5] if sc.source else sc.kind)
    arts = []
    if sc.kind == "check-suite":
        report = {"scenario": stem, "checks": [c.record() for c in result], "passed": all(c.passed for c in result)}
        arts.append(_write(_target(out.get("report", stem + ".json"), ov.out_dir),
                           json.dumps(report, indent=2, sort_keys=True) + "\n"))
        return RunResult(sc, arts, result)
    if svg:
        arts.append(_write(_target(out.get("svg", stem + ".svg"), ov.out_dir), svg_text(result, sc.style)))
    if csv:
        arts.append(_write(_target(out.get("csv", stem + ".csv"), ov.out_dir), csv_text(result, out.get("columns", ()))))
    return RunResult(sc, arts)
