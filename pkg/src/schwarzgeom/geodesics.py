"""Singular geodesics ``w(t, x) = h(exp(i x + c t))`` and the quartic operator ``Q[w]``."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRatio, PoleOnCircle, WindingMismatch
from .moebius import MobiusMap
from .series import Jet, PolyRat, count_zeros_poles, winding_number

POLE_MARGIN = 1e-6
THETA_POINTS = 2048


@dataclass
class CurveSamples:
    """``w`` and its partial derivatives in the curve parameter ``x`` and time ``t``."""

    t: float
    x: np.ndarray
    w: np.ndarray
    w_x: np.ndarray
    w_t: np.ndarray
    w_xx: np.ndarray
    w_tt: np.ndarray
    w_xt: np.ndarray


@dataclass(frozen=True, eq=False)
class HoloFamily:
    """``w(t, x) = h(exp(i x + c t))``, or ``h(x + i c t)`` when ``planar``."""

    h: PolyRat
    c: float = 1.0
    planar: bool = False

    def __post_init__(self):
        if not isinstance(self.h, PolyRat):
            object.__setattr__(self, "h", PolyRat(self.h))

    @property
    def derivs(self):
        h1 = self.h.deriv()
        return self.h, h1, h1.deriv()

    def _check_poles(self, t):
        for p, _ in self.h.poles():
            gap = abs(p.imag - self.c * t) if self.planar else abs(abs(p) - np.exp(self.c * t))
            if gap <= POLE_MARGIN:
                raise PoleOnCircle(f"pole {p} of h lies on the curve at t = {t}")

    def evaluate(self, t, x=None):
        if x is None:
            x = np.linspace(0, 2 * np.pi, THETA_POINTS, endpoint=False)
        x = np.asarray(x, dtype=float)
        t = float(t)
        self._check_poles(t)
        c = self.c
        if self.planar:
            u = x + 1j * c * t
            ux, ut = np.ones_like(u), 1j * c * np.ones_like(u)
            uxx, utt, uxt = np.zeros_like(u), np.zeros_like(u), np.zeros_like(u)
        else:
            u = np.exp(1j * x + c * t)
            ux, ut = 1j * u, c * u
            uxx, utt, uxt = -u, c * c * u, 1j * c * u
        h0, h1, h2 = self.derivs
        w, d1, d2 = h0(u), h1(u), h2(u)
        return CurveSamples(
            t=t, x=x, w=w,
            w_x=d1 * ux, w_t=d1 * ut,
            w_xx=d2 * ux * ux + d1 * uxx,
            w_tt=d2 * ut * ut + d1 * utt,
            w_xt=d2 * ux * ut + d1 * uxt,
        )


def evaluate_family(F, t, theta_grid=None):
    return F.evaluate(t, theta_grid)


def q_terms(s):
    """The three summands of ``Q[w]``."""
    wx, wt = s.w_x, s.w_t
    cx, ct, cxt = np.conj(wx), np.conj(wt), np.conj(s.w_xt)
    t1 = wx * cx * cx * s.w_tt
    t2 = (wx * cx * wt + wx * wx * ct) * cxt
    t3 = cx * wt * ct * s.w_xx
    return t1, t2, t3


def q_operator(s):
    t1, t2, t3 = q_terms(s)
    return t1 + t2 + t3


@dataclass(frozen=True)
class QReport:
    max_abs: float
    max_rel: float


def q_residual(F, t, theta_grid=None):
    """Max ``|Im Q[w]|``, absolute and relative to the summed term magnitudes."""
    s = F.evaluate(t, theta_grid) if isinstance(F, HoloFamily) else F
    t1, t2, t3 = q_terms(s)
    im = np.abs((t1 + t2 + t3).imag)
    scale = np.abs(t1) + np.abs(t2) + np.abs(t3)
    rel = np.where(scale > 0, im / np.where(scale > 0, scale, 1.0), 0.0)
    return QReport(float(im.max()), float(rel.max()))


@dataclass(frozen=True)
class NormalMotionReport:
    geodesic: float
    normal: float

    def is_normal(self, tol=1e-10):
        return self.geodesic < tol and self.normal < tol


def normal_motion_residual(F, t=None, theta_grid=None):
    s = F.evaluate(t, theta_grid) if isinstance(F, HoloFamily) else F
    cx = np.conj(s.w_x)
    r1 = np.abs((cx * (np.abs(s.w_x) ** 2 * s.w_tt + np.abs(s.w_t) ** 2 * s.w_xx)).imag)
    r2 = np.abs(s.w_t * cx + np.conj(s.w_t) * s.w_x)
    return NormalMotionReport(float(r1.max()), float(r2.max()))


# ---------------------------------------------------------------------------
# rotation index

@dataclass(frozen=True)
class IndexReport:
    index: int
    zeros: int
    poles: int
    winding: int


def rotation_index(h, r):
    """Rotation index of ``h(|z| = r)`` as ``Z[h'] - P[h'] + 1``, checked against the winding of ``i z h'(z)``."""
    if not isinstance(h, PolyRat):
        h = PolyRat(h)
    h1 = h.deriv()
    counts = count_zeros_poles(h1, r)
    formula = counts.zeros - counts.poles + 1
    wind = winding_number(h1 * PolyRat([0, 1j]), r)
    if wind != formula:
        raise WindingMismatch(f"argument-principle count {formula} != winding number {wind} at r = {r}")
    return IndexReport(formula, counts.zeros, counts.poles, wind)


def exceptional_times(F, dedupe=1e-9):
    """Times at which the curve meets a zero or pole of ``h'``."""
    # poles of h' are the poles of h, which are simple roots and better conditioned
    pts = [z for z, _ in F.h.deriv().zeros()] + [z for z, _ in F.h.poles()]
    times = []
    for z in pts:
        if F.planar:
            times.append(z.imag / F.c)
        elif abs(z) > 1e-12:
            times.append(np.log(abs(z)) / F.c)
    times.sort()
    out = []
    for s in times:
        if not out or s - out[-1] > dedupe:
            out.append(float(s))
    return out


@dataclass(frozen=True)
class HomotopySegment:
    t_interval: tuple
    index: int


def homotopy_segments(F, t_min, t_max):
    """Rotation index on each interval between consecutive exceptional times inside ``(t_min, t_max)``."""
    cuts = [s for s in exceptional_times(F) if t_min < s < t_max]
    edges = [t_min] + cuts + [t_max]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        out.append(HomotopySegment((a, b), rotation_index(F.h, np.exp(F.c * mid)).index))
    return out


# ---------------------------------------------------------------------------
# invariance under conformal maps and reparametrization

def perturbed_sampler(F, eps=0.1):
    """Sampler for the non-geodesic family ``w + eps t^2 exp(2 i x)`` (generic ``Im Q != 0``)."""
    def sample(t, x):
        s = F.evaluate(t, x)
        e = eps * np.exp(2j * np.asarray(x, dtype=float))
        return CurveSamples(t, s.x, s.w + t * t * e, s.w_x + 2j * t * t * e, s.w_t + 2 * t * e,
                            s.w_xx - 4 * t * t * e, s.w_tt + 2 * e, s.w_xt + 4j * t * e)
    return sample


def _map_derivs(phi, w):
    if isinstance(phi, MobiusMap):
        return phi(w), phi.deriv(w, 1), phi.deriv(w, 2)
    if isinstance(phi, PolyRat):
        d1 = phi.deriv()
        return phi(w), d1(w), d1.deriv()(w)
    if isinstance(phi, Jet):
        d1 = phi.deriv()
        return phi(w), d1(w), d1.deriv()(w)
    raise TypeError(f"unsupported conformal map {type(phi).__name__}")


def conformal_transform(s, phi):
    """Samples of ``phi(w)`` by the chain rule."""
    p0, p1, p2 = _map_derivs(phi, s.w)
    return CurveSamples(s.t, s.x, p0, p1 * s.w_x, p1 * s.w_t,
                        p2 * s.w_x ** 2 + p1 * s.w_xx,
                        p2 * s.w_t ** 2 + p1 * s.w_tt,
                        p2 * s.w_x * s.w_t + p1 * s.w_xt)


@dataclass(frozen=True)
class Reparam:
    """Reparametrization ``x -> sigma(t, x)`` with its partial derivatives."""

    s: object
    s_x: object
    s_t: object
    s_xx: object
    s_tt: object
    s_xt: object

    @classmethod
    def identity(cls):
        zero = lambda t, x: np.zeros_like(np.asarray(x, dtype=float))
        one = lambda t, x: np.ones_like(np.asarray(x, dtype=float))
        return cls(lambda t, x: np.asarray(x, dtype=float), one, zero, zero, zero, zero)

    @classmethod
    def from_expr(cls, expr):
        """Build from a sympy-parsable expression in ``t`` and ``x``."""
        import sympy as sp

        t, x = sp.symbols("t x", real=True)
        e = sp.sympify(expr, locals={"t": t, "x": x})
        parts = [e, sp.diff(e, x), sp.diff(e, t), sp.diff(e, x, 2), sp.diff(e, t, 2), sp.diff(e, x, t)]
        fns = []
        for p in parts:
            f = sp.lambdify((t, x), p, "numpy")
            fns.append(lambda tt, xx, f=f: np.broadcast_to(np.asarray(f(tt, xx), dtype=float),
                                                             np.shape(xx)).copy())
        return cls(*fns)


def reparametrize(sample, sigma, t, x):
    """Samples of ``w(t, sigma(t, x))``."""
    x = np.asarray(x, dtype=float)
    s = sample(t, sigma.s(t, x))
    sx, st = sigma.s_x(t, x), sigma.s_t(t, x)
    sxx, stt, sxt = sigma.s_xx(t, x), sigma.s_tt(t, x), sigma.s_xt(t, x)
    return CurveSamples(
        t, x, s.w,
        s.w_x * sx,
        s.w_t + s.w_x * st,
        s.w_xx * sx ** 2 + s.w_x * sxx,
        s.w_tt + 2 * s.w_xt * st + s.w_xx * st ** 2 + s.w_x * stt,
        s.w_xt * sx + s.w_xx * sx * st + s.w_x * sxt,
    ), s


@dataclass
class InvarianceReport:
    ratios: np.ndarray
    expected: np.ndarray
    max_rel_err: float
    skipped: int


def _ratio_report(num, den, expected, floor):
    keep = np.abs(den) >= floor
    if not keep.any():
        raise DegenerateRatio("Im Q[w] vanishes at every sample")
    r = num[keep] / den[keep]
    e = expected[keep]
    return InvarianceReport(r, e, float(np.max(np.abs(r - e) / np.abs(e))), int((~keep).sum()))


def invariance_check(sample, t, x, phi=None, sigma=None, floor=1e-14):
    """Pointwise ratios ``Im Q[phi(w)] / Im Q[w]`` (expected ``|phi'|^4``) or
    ``Im Q[w o sigma] / Im Q[w]`` (expected ``sigma_x^3``).

    ``sample(t, x)`` returns :class:`CurveSamples`; points where ``|Im Q[w]|``
    is below ``floor`` are skipped.
    """
    if (phi is None) == (sigma is None):
        raise ValueError("give exactly one of phi or sigma")
    x = np.asarray(x, dtype=float)
    if phi is not None:
        s = sample(t, x)
        base = q_operator(s).imag
        moved = q_operator(conformal_transform(s, phi)).imag
        expected = np.abs(_map_derivs(phi, s.w)[1]) ** 4
        return _ratio_report(moved, base, expected, floor)
    moved_s, base_s = reparametrize(sample, sigma, t, x)
    return _ratio_report(q_operator(moved_s).imag, q_operator(base_s).imag, sigma.s_x(t, x) ** 3, floor)


# ---------------------------------------------------------------------------
# Schwarz function derivatives along a parametrized family

@dataclass
class SchwarzJet:
    S_z: np.ndarray
    S_zz: np.ndarray
    S_t: np.ndarray
    S_tz: np.ndarray
    S_tt: np.ndarray

    @property
    def connection(self):
        """``nabla_{S_t} S_t = S_tt - S_t S_tz / S_z``."""
        return self.S_tt - self.S_t * self.S_tz / self.S_z


def schwarz_derivatives(s):
    """Derivatives of ``S(t, .)`` at ``w(t, x)`` from ``S(t, w(t, x)) = conj(w(t, x))``."""
    cx, ct = np.conj(s.w_x), np.conj(s.w_t)
    S_z = cx / s.w_x
    S_zz = (np.conj(s.w_xx) - S_z * s.w_xx) / s.w_x ** 2
    S_t = ct - S_z * s.w_t
    S_tz = (np.conj(s.w_xt) - S_zz * s.w_x * s.w_t - S_z * s.w_xt) / s.w_x
    S_tt = np.conj(s.w_tt) - 2 * S_tz * s.w_t - S_zz * s.w_t ** 2 - S_z * s.w_tt
    return SchwarzJet(S_z, S_zz, S_t, S_tz, S_tt)


def connection_identity_residual(s, connection=None):
    """``|w_x^2 conj(w_x) nabla_{S_t} S_t + 2i Im Q[w]|``, scaled by ``|Q|`` terms.

    ``connection`` defaults to the value implied by the samples themselves.
    """
    if connection is None:
        connection = schwarz_derivatives(s).connection
    lhs = s.w_x ** 2 * np.conj(s.w_x) * connection
    rhs = -2j * q_operator(s).imag
    t1, t2, t3 = q_terms(s)
    scale = 1.0 + np.abs(t1) + np.abs(t2) + np.abs(t3)
    return float(np.max(np.abs(lhs - rhs) / scale))
