"""Invariant suites behind ``schwarzgeom check``: each returns residuals against tolerances."""

from dataclasses import dataclass, field

import numpy as np

from . import checks, dynamics, geodesics, geometry, moebius
from .errors import Validation
from .series import Jet, PolyRat

PENCILS = {
    "hyperbolic": (1.0, 0.0, 1.0),
    "parabolic": (0.0, 0.0, 1.0),
    "elliptic": (1.0, 0.0, -1.0),
}

GALLERY = {
    "cusp-quadratic": PolyRat([4, -4, 1]),
    "cusp-quartic": PolyRat([4], [0, 4, 0, 0, 1]),
    "celtic-cross": PolyRat([5], [0, -5, 0, 0, 0, 1]),
    "turtle": PolyRat(6 * np.poly([3, -2 + 1j, -3j])[::-1], [0, -6, 0, 0, 0, 0, 1]),
    "bicycle-race": PolyRat(6 * np.poly([2, -1 + 1j, -1j])[::-1], [0, -6, 0, 0, 0, 0, 1]),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    # "below": pass when value < tol; "above": pass when value > tol; "equal": integer agreement
    mode: str = "below"

    @property
    def passed(self):
        if self.mode == "above":
            return self.value > self.tol
        if self.mode == "equal":
            return self.value == 0
        return self.value < self.tol

    def line(self):
        rel = {"below": "<", "above": ">", "equal": "=="}[self.mode]
        tol = 0 if self.mode == "equal" else self.tol
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<48s} {self.value:.3e} {rel} {tol:.1e}"

    def record(self):
        return {"name": self.name, "value": self.value, "tol": self.tol, "mode": self.mode, "passed": self.passed}


@dataclass
class SuiteOptions:
    seed: int = 0
    tol: float = 1e-10
    pencils: tuple = tuple(PENCILS)
    h: PolyRat = None
    radii: tuple = ()
    extra: dict = field(default_factory=dict)


def axioms(opt):
    rng = np.random.default_rng(opt.seed)
    mob = checks.axiom_suite(checks.mobius_space(), checks.random_mobius_triples(rng, 1000))
    quad = checks.axiom_suite(checks.quadric_space(), checks.random_quadric_triples(rng, 1000))
    out = []
    for tag, rep, tol in (("mobius", mob, 1e-10), ("quadric", quad, 1e-12)):
        for ax in ("idempotent", "involutive", "distributive"):
            out.append(CheckResult(f"axioms/{tag}/{ax}", getattr(rep, ax), tol))
    return out


def fixed_points(opt):
    rng = np.random.default_rng(opt.seed)
    wrong, dsum = 0, 0.0
    for k in range(200):
        orth = k % 2 == 0
        P, Q = checks.random_fixed_point_pair(rng, orth)
        rep = checks.orthogonal_fixed_points(P, Q)
        wrong += rep.kind != ("orthogonal" if orth else "equal")
        dsum = max(dsum, rep.deriv_sum)
    return [CheckResult("fixed-points/misclassified", float(wrong), 0.0, "equal"),
            CheckResult("fixed-points/derivative-sum", dsum, 1e-8)]


def davis(opt):
    out = []
    dt = 0.02
    for name in opt.pencils:
        a = PENCILS[name]
        it = dynamics.davis_iterate(moebius.MobiusMap.identity(), moebius.pencil_solution(*a, dt), 50)
        err = max(moebius.mobius_distance(it[n].rep, moebius.pencil_solution(*a, n * dt)) for n in range(51))
        out.append(CheckResult(f"davis/{name}", err, 1e-10))
    return out


def sjk(opt):
    out = []
    for name in opt.pencils:
        it = dynamics.davis_iterate(moebius.MobiusMap.identity(), moebius.pencil_solution(*PENCILS[name], 0.1), 10)
        err = max(dynamics.check_sjk(it, j, k) for j in range(6) for k in range(6))
        out.append(CheckResult(f"sjk/{name}", err, 1e-10))
    return out


def _pencil_flow(a, tol):
    # g = -2i v = i(a0 + a1 z + a2 z^2)
    v = dynamics.VelocityField.poly([-0.5 * c for c in a])
    seeds = np.linspace(-2, 2, 9)
    # time step 1e-3 for the central differences
    return dynamics.integrate_reflection(v, seeds, t_span=(-1, 1), num=2001, tol=tol)


def pde(opt):
    out = []
    for name in opt.pencils:
        a = PENCILS[name]
        exact = dynamics.MobiusFlow.pencil(*a).family(np.linspace(-2, 2, 9), np.linspace(-1, 1, 21))
        r = dynamics.pde_residuals(exact)
        out.append(CheckResult(f"pde/{name}/exact/first", r.first_order, 1e-9))
        out.append(CheckResult(f"pde/{name}/exact/second", r.second_order, 1e-9))
        F = _pencil_flow(a, opt.tol)
        r = dynamics.pde_residuals(F, use_exact=False)
        out.append(CheckResult(f"pde/{name}/integrated/first", r.first_order, 1e-5))
        out.append(CheckResult(f"pde/{name}/integrated/second", r.second_order, 1e-5))
    return out


def rates(opt):
    out = []
    v = dynamics.VelocityField.poly([0, 1])
    F = dynamics.integrate_reflection(v, np.linspace(-1, 1, 5), t_span=(-1, 1), num=201, tol=opt.tol)
    sp = dynamics.stationary_points(v)[0]
    m = dynamics.rate_measurement(F, sp)
    out.append(CheckResult("rates/pivot/theta-rate", abs(m.rate - 1), 1e-4))
    out.append(CheckResult("rates/pivot/residue", abs(sp.lam - 1), 1e-12))
    v = dynamics.VelocityField.poly([0, 0, 1, 1])
    sp = [s for s in dynamics.stationary_points(v) if s.multiplicity == 2][0]
    F = dynamics.integrate_reflection(v, np.linspace(-0.5, 0.5, 5), t_span=(-1, 1), num=201, tol=opt.tol)
    m = dynamics.rate_measurement(F, sp)
    out.append(CheckResult("rates/tangency/kasner-rate", abs(m.rate - 2 / 3), 1e-3))
    out.append(CheckResult("rates/tangency/residue", abs(sp.lam + 1), 1e-12))
    out.append(CheckResult("rates/tangency/prediction", abs(sp.kasner_rate - 2 / 3), 1e-12))
    return out


def index(opt):
    """Rotation index by zero/pole count and by winding number at each radius."""
    maps = {"h": opt.h} if opt.h is not None else GALLERY
    out = []
    for name, h in maps.items():
        radii = opt.radii
        if not radii:
            ts = geodesics.exceptional_times(geodesics.HoloFamily(h))
            edges = [ts[0] - 0.3] + [0.5 * (a + b) for a, b in zip(ts[:-1], ts[1:])] + [ts[-1] + 0.3] if ts else [0.0]
            radii = tuple(np.exp(edges))
        for r in radii:
            rep = geodesics.rotation_index(h, r)
            out.append(CheckResult(f"index/{name}/r={r:.6g}/I={rep.index}/winding={rep.winding}", float(abs(rep.index - rep.winding)), 0.0, "equal"))
    return out


def geodesic(opt):
    out = []
    theta = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    for name, h in GALLERY.items():
        F = geodesics.HoloFamily(h)
        ts = geodesics.exceptional_times(F)
        worst = 0.0
        for t in np.linspace(-0.6, 1.2, 19):
            if ts and min(abs(t - s) for s in ts) < 1e-3:
                continue
            worst = max(worst, geodesics.q_residual(F, t, theta).max_rel)
        out.append(CheckResult(f"geodesic/{name}/im-q", worst, 1e-9))
    return out


def connection(opt):
    planted = dynamics.MobiusFlow.planted().family(np.linspace(-1, 1, 5), np.linspace(0.1, 1, 10))
    a = PENCILS["elliptic"]
    F = _pencil_flow(a, opt.tol)
    return [CheckResult("connection/elliptic-integrated", checks.connection_residual(F, use_exact=False).max_abs, 1e-5),
            CheckResult("connection/planted", checks.connection_residual(planted).max_abs, 1e-2, "above")]


def powers(opt):
    out = []
    space = checks.mobius_space()
    lines = checks.power_table(space, moebius.MobiusMap.identity(), moebius.MobiusMap([[1, -2j], [0, 1]]), 5)
    out.append(CheckResult("powers/lines/homomorphism", lines.residuals["homomorphism"], 1e-10))
    for name in opt.pencils:
        tab = checks.power_table(space, moebius.MobiusMap.identity(), moebius.pencil_solution(*PENCILS[name], 0.2), 5)
        out.append(CheckResult(f"powers/{name}/homomorphism", tab.residuals["homomorphism"], 1e-10))
    return out


def geometry_(opt):
    rng = np.random.default_rng(opt.seed)
    out = []
    worst = 0.0
    for r in (0.5, 1.0, 3.0):
        S = geometry.SchwarzFn(moebius.MobiusMap([[0, r * r], [1, 0]]))
        for z in r * np.exp(1j * np.linspace(0, 2 * np.pi, 7)):
            worst = max(worst, abs(abs(geometry.curvature(S, z)) - 1 / r))
    out.append(CheckResult("geometry/circle-curvature", worst, 1e-9))
    gamma = Jet.polynomial([0, 1, 0.3j, 0.2j], 0.0, 24)
    S = geometry.schwarz_from_curve(gamma, 0.0)
    K0 = geometry.kasner(S, 0.0)
    L = geometry.tangent_line(S, 0.0)
    horn = fixed = 0.0
    for _ in range(50):
        # keep the pole of phi away from the base point 0
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        while abs(m[1, 1]) < 0.5 * abs(m[1, 0]) + 0.2:
            m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        phi = moebius.MobiusMap(m)
        w = phi(0.0)
        horn = max(horn, abs(geometry.horn_kasner(geometry.hermitian_conjugate(phi, S),
                                                  geometry.hermitian_conjugate(phi, L), w) - K0))
        # maps with their pole on the tangent line keep it straight
        m[1, 0] = m[1, 1] / rng.uniform(1.0, 3.0) * rng.choice([-1, 1])
        phi = moebius.MobiusMap(m)
        fixed = max(fixed, abs(geometry.kasner(geometry.hermitian_conjugate(phi, S), phi(0.0)) - K0))
    out.append(CheckResult("geometry/kasner-invariance/horn-angle", horn, 1e-6))
    out.append(CheckResult("geometry/kasner-invariance/line-preserving", fixed, 1e-6))
    return out


SUITES = {
    "axioms": axioms,
    "fixed-points": fixed_points,
    "davis": davis,
    "sjk": sjk,
    "pde": pde,
    "rates": rates,
    "index": index,
    "geodesic": geodesic,
    "connection": connection,
    "powers": powers,
    "geometry": geometry_,
}


def run_suites(names, opt=None):
    opt = opt or SuiteOptions()
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise Validation(f"unknown suites {bad}; choose from {sorted(SUITES)}")
    out = []
    for n in names:
        out.extend(SUITES[n](opt))
    return out
