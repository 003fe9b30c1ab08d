"""Schwarz functions of analytic arcs: construction, recovery, reflection and curvature diagnostics."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NoConvergence, NotInvertible, OffCurve, OutOfDomain, ZeroSchwarzian
from .moebius import MobiusMap, circle_of, conformal_action
from .series import Jet, PolyRat, jet_compose, jet_conjugate, jet_invert

ON_CURVE_TOL = 1e-8
DOMAIN_TAIL_TOL = 1e-6
NEWTON_TOL = 1e-10
NEWTON_MAXIT = 50


@dataclass(frozen=True, eq=False)
class SchwarzFn:
    """Schwarz function with either an exact Möbius or a jet representation.

    ``base_point`` is a point of the curve (``S(z0) = conj z0``); for Möbius
    maps it defaults to a point of the circle or line.
    """

    rep: object
    base_point: complex = None

    def __post_init__(self):
        if self.base_point is None:
            if isinstance(self.rep, MobiusMap):
                shape = circle_of(self.rep)
                bp = shape.center + shape.radius if shape.kind == "circle" else shape.point
            else:
                bp = self.rep.center
            object.__setattr__(self, "base_point", complex(bp))
        else:
            object.__setattr__(self, "base_point", complex(self.base_point))

    @property
    def is_mobius(self):
        return isinstance(self.rep, MobiusMap)

    @cached_property
    def _jets(self):
        out = [self.rep]
        for _ in range(3):
            out.append(out[-1].deriv())
        return out

    def __call__(self, z):
        return self.rep(z)

    def deriv(self, z, k=1):
        if self.is_mobius:
            return self.rep.deriv(z, k)
        if k < len(self._jets):
            return self._jets[k](z)
        j = self.rep
        for _ in range(k):
            j = j.deriv()
        return j(z)

    def tail(self, z):
        """Truncation proxy of the jet at ``z``; zero for exact maps."""
        if self.is_mobius:
            return 0.0
        return self.rep.tail(abs(complex(z) - self.rep.center))

    def schwarzian_at(self, z):
        if self.is_mobius:
            return 0j
        d1, d2, d3 = (self.deriv(z, k) for k in (1, 2, 3))
        return d3 / d1 - 1.5 * (d2 / d1) ** 2

    def on_curve_residual(self, z):
        return abs(self(z) - np.conj(z))

    def jet_at(self, center, order=24):
        if self.is_mobius:
            return self.rep.jet(center, order)
        return self.rep.shift(center).truncate(order) if center != self.rep.center else self.rep


def as_jet(f, center, order=24):
    """Jet of a Jet/MobiusMap/PolyRat about ``center``."""
    if isinstance(f, Jet):
        return f if abs(f.center - center) == 0 else f.shift(center)
    if isinstance(f, (MobiusMap, PolyRat)):
        return f.jet(center, order)
    raise TypeError(f"cannot expand {type(f).__name__} as a jet")


@dataclass
class ParamCurve:
    """Sampled arc; ``gamma`` is the parametrizing jet when known."""

    points: np.ndarray
    params: np.ndarray = None
    gamma: object = None
    isolated: np.ndarray = None
    sparse: bool = False
    residuals: np.ndarray = field(default=None, repr=False)


def schwarz_from_curve(gamma, x0=0.0, order=24):
    """S = conj(gamma) o gamma^-1 about gamma(x0); gamma is a jet about a real parameter."""
    if not isinstance(gamma, Jet):
        gamma = as_jet(gamma, x0, order)
    if abs(np.imag(gamma.center)) > 1e-14:
        raise ValueError("parametrization must be expanded about a real parameter")
    S = jet_compose(jet_conjugate(gamma), jet_invert(gamma))
    return SchwarzFn(S, S.center)


def _newton(S, z, tol=NEWTON_TOL, maxit=NEWTON_MAXIT):
    for _ in range(maxit):
        F = S(z) - np.conj(z)
        if abs(F) < tol:
            d = S.deriv(z, 1)
            J = np.array([[(d - 1).real, (1j * (d + 1)).real], [(d - 1).imag, (1j * (d + 1)).imag]])
            sv = np.linalg.svd(J, compute_uv=False)
            return complex(z), abs(F), bool(sv[-1] > 1e-6 * max(sv[0], 1e-300))
        d = S.deriv(z, 1)
        J = np.array([[(d - 1).real, (1j * (d + 1)).real], [(d - 1).imag, (1j * (d + 1)).imag]])
        # the Jacobian is rank one on the curve itself: take the minimum-norm step
        step = np.linalg.lstsq(J, -np.array([F.real, F.imag]), rcond=1e-12)[0]
        z = z + step[0] + 1j * step[1]
        if not np.isfinite(z):
            break
    raise NoConvergence(f"Newton did not converge from seed (last residual {abs(F):.3g})")


def _chain_order(pts):
    """Greedy nearest-neighbour ordering starting from an extreme point."""
    n = len(pts)
    if n < 3:
        return np.arange(n)
    centroid = pts.mean()
    start = int(np.argmax(np.abs(pts - centroid)))
    order, left = [start], set(range(n)) - {start}
    while left:
        last = pts[order[-1]]
        nxt = min(left, key=lambda i: abs(pts[i] - last))
        order.append(nxt)
        left.remove(nxt)
    return np.array(order)


def curve_from_schwarz(S, seeds, tol=NEWTON_TOL, dedupe=1e-9):
    """Points of ``{z : S(z) = conj z}`` by Newton from each seed, ordered into a polyline."""
    if not isinstance(S, SchwarzFn):
        S = SchwarzFn(S)
    pts, res, iso = [], [], []
    for s in np.atleast_1d(np.asarray(seeds, dtype=complex)):
        z, r, isolated = _newton(S, complex(s), tol)
        pts.append(z)
        res.append(r)
        iso.append(isolated)
    pts, res, iso = np.array(pts), np.array(res), np.array(iso)
    if iso.all():
        keep = []
        for i, z in enumerate(pts):
            if all(abs(z - pts[j]) > dedupe for j in keep):
                keep.append(i)
        pts, res, iso = pts[keep], res[keep], iso[keep]
    order = _chain_order(pts)
    return ParamCurve(points=pts[order], isolated=iso[order], sparse=bool(iso.all()), residuals=res[order])


def reflect_point(S, z):
    """Schwarzian reflection ``conj(S(z))``."""
    if S.tail(z) > DOMAIN_TAIL_TOL:
        raise OutOfDomain(f"jet tail {S.tail(z):.2e} at {z}")
    return complex(np.conj(S(z)))


def _require_on_curve(S, z, tol=ON_CURVE_TOL):
    r = S.on_curve_residual(z)
    if not r < tol:
        raise OffCurve(f"|S(z) - conj z| = {r:.2e} at z = {z}")


def clinant(S, z):
    """``S'(z) = exp(-2i theta)`` at a curve point."""
    _require_on_curve(S, z)
    return complex(S.deriv(z, 1))


def unit_tangent(S, z, hint=None):
    """``1/sqrt(S'(z))``; sign chosen to agree with ``hint`` (principal branch otherwise)."""
    t = 1 / np.sqrt(complex(S.deriv(z, 1)))
    if hint is not None and (t * np.conj(hint)).real < 0:
        t = -t
    return complex(t)


def curvature(S, z, hint=None):
    """Signed curvature ``(i/2) S''/S'^(3/2)``; positive for a circle traversed along ``hint`` counter-clockwise."""
    _require_on_curve(S, z)
    d1 = S.deriv(z, 1)
    d2 = S.deriv(z, 2)
    k = 0.5j * d2 * unit_tangent(S, z, hint) / d1
    return float(k.real)


def curvature_s(S, z):
    """Arclength derivative of the curvature, ``(i / 2S') {S, z}``."""
    _require_on_curve(S, z)
    return float((0.5j * S.schwarzian_at(z) / S.deriv(z, 1)).real)


def kasner(S, z, rel_tol=1e-12):
    """Kasner's conformal invariant ``(i/2) S''^2 / (S'^2 {S, z})``."""
    _require_on_curve(S, z)
    sch = S.schwarzian_at(z)
    d1, d2 = S.deriv(z, 1), S.deriv(z, 2)
    if S.is_mobius or abs(sch) <= rel_tol * max(1.0, abs(d2) ** 2 / abs(d1) ** 2):
        raise ZeroSchwarzian("Schwarzian vanishes: curve is a circle or line")
    return float((0.5j * d2 ** 2 / (d1 ** 2 * sch)).real)


def tangent_line(S, z):
    """Schwarz function of the tangent line at a curve point: ``conj z0 + S'(z0)(z - z0)``."""
    _require_on_curve(S, z)
    c = complex(S.deriv(z, 1))
    z = complex(z)
    return SchwarzFn(MobiusMap([[c, np.conj(z) - c * z], [0, 1]]), z)


def horn_kasner(S1, S2, z):
    """Horn-angle measure ``(k1 - k2)^2 / (k1_s - k2_s)`` of two curves in first-order contact at ``z``.

    Reduces to :func:`kasner` when the second curve is the tangent line.  Unlike
    the one-curve form it is invariant under every Möbius map, since the
    image of the tangent line is in general a circle.
    """
    _require_on_curve(S1, z)
    _require_on_curve(S2, z)
    if abs(S1.deriv(z, 1) - S2.deriv(z, 1)) > 1e-8:
        raise OffCurve("curves are not tangent at z")
    hint = unit_tangent(S1, z)
    dk = curvature(S1, z, hint) - curvature(S2, z, hint)
    ds = curvature_s(S1, z) - curvature_s(S2, z)
    if abs(ds) <= 1e-14 * max(1.0, dk * dk):
        raise ZeroSchwarzian("arclength derivatives of curvature agree")
    return float(dk * dk / ds)


def hermitian_conjugate(phi, S, order=24):
    """Transport of S by an analytic map: ``conj(phi) o S o phi^-1``, the Schwarz function of phi(curve)."""
    z0 = S.base_point
    if isinstance(phi, MobiusMap) and S.is_mobius:
        if phi.det == 0:
            raise NotInvertible("singular Möbius map")
        return SchwarzFn(conformal_action(phi, S.rep), phi(z0))
    pj = as_jet(phi, z0, order)
    inv = jet_invert(pj)
    s_jet = S.jet_at(z0, order) if S.is_mobius else S.rep
    inner = jet_compose(s_jet, inv)
    out = jet_compose(jet_conjugate(pj), inner)
    return SchwarzFn(out, pj.coeffs[0])


@dataclass
class TangentReport:
    ok: bool
    ratios: np.ndarray
    max_real: float
    max_imag_rel: float


def is_tangent_vector(X, S, curve_points, tol=1e-12):
    """Tests ``X^2 / S' <= 0`` (real, non-positive) at every curve point.

    The inequality is non-strict since tangent fields vanish at stationary points.
    """
    pts = np.atleast_1d(np.asarray(curve_points, dtype=complex))
    for z in pts:
        _require_on_curve(S, z)
    xv = np.array([complex(X(z)) for z in pts])
    ratio = xv ** 2 / np.array([complex(S.deriv(z, 1)) for z in pts])
    mag = np.abs(ratio)
    scale = max(1.0, float(mag.max()))
    live = mag > tol * scale
    imag_rel = np.where(live, np.abs(ratio.imag) / np.where(live, mag, 1), 0.0)
    ok = bool(np.all(ratio.real <= tol * scale) and np.all(imag_rel < 1e-8))
    return TangentReport(ok, ratio, float(ratio.real.max()), float(imag_rel.max()))
