"""Davis iteration and continuous reflection ``dS/dt = -2i v(S)``, ``S(0, z) = z``.

Trajectories are integrated as jets in ``z`` so that ``S`` and its
z-derivatives come out of one ODE solve (the characteristic ODE
differentiated along the seed).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (CenterMismatch, DomainExhausted, GridTooCoarse, InsufficientResolution,
                     NoConvergence, SingularityHit, ZeroField)
from .geometry import SchwarzFn
from .moebius import MobiusMap, adj, mobius_distance, mobius_product, pencil_generator
from .rk45 import integrate
from .series import Jet, PolyRat, _compose, _recip, jet_compose, jet_conjugate

SINGULAR_RADIUS = 1e-6
STATIONARY_RADIUS = 1e-8
MAX_FD_STEP = 1e-2


# ---------------------------------------------------------------------------
# velocity fields

@dataclass(frozen=True)
class ZeroInfo:
    location: complex
    multiplicity: int
    residue: complex


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Real-analytic velocity ``v`` on the real line, extended as a rational function."""

    v: PolyRat

    def __post_init__(self):
        v = self.v if isinstance(self.v, PolyRat) else PolyRat(self.v)
        if not v.is_real():
            raise ValueError("velocity field must have real coefficients")
        object.__setattr__(self, "v", PolyRat(v.num.real.astype(complex), v.den.real.astype(complex)))

    @classmethod
    def poly(cls, coeffs):
        return cls(PolyRat(coeffs))

    def __call__(self, z):
        return self.v(z)

    @property
    def g(self):
        """Generator ``g = -2i v``."""
        return PolyRat(-2j * self.v.num, self.v.den)

    def zeros(self):
        return [ZeroInfo(z, m, residue(self.v, z, m)) for z, m in self.v.zeros()]

    def zero_locations(self):
        return np.array([z for z, _ in self.v.zeros()], dtype=complex)


def residue(v, z0, m):
    """Residue of ``1/v`` at a zero of order ``m``: coefficient ``m-1`` of ``u^m / v``."""
    c = v.taylor(complex(z0), 2 * m)
    lead = c[m:]
    return complex(_recip(lead, m - 1)[m - 1])


# ---------------------------------------------------------------------------
# flow families

@dataclass
class FlowFamily:
    """``S(t, x)`` on a (t, seed) grid with the canonical curves ``gamma(t, x) = S(-t/2, x)``."""

    t: np.ndarray
    x: np.ndarray
    S: np.ndarray
    S_z: np.ndarray
    gamma: np.ndarray
    gamma_x: np.ndarray
    g: object
    tag: str = "numeric"
    S_t: np.ndarray = None
    S_tt: np.ndarray = None
    S_tz: np.ndarray = None
    S_zz: np.ndarray = None
    stationary: np.ndarray = field(default=None, repr=False)
    gamma_xx: np.ndarray = None

    def curves(self):
        """One polyline of the canonical parametrization per time."""
        return [self.gamma[i] for i in range(len(self.t))]

    def normal_motion_residual(self):
        """Max of ``|<gamma_t, gamma_x>|`` with ``gamma_t = -g(gamma)/2``."""
        gt = -0.5 * self.g(self.gamma)
        return float(np.max(np.abs((gt * np.conj(self.gamma_x)).real)))


def _jet_rhs(g, stationary):
    def rhs(t, y):
        gc = g.taylor(y[:, 0], y.shape[1] - 1)
        d = y.copy()
        d[:, 0] = 0.0
        out = _compose(gc, d, y.shape[1] - 1)
        out[stationary, 0] = 0.0
        return out
    return rhs


def _propagate(v, seeds, times, tol, order, zeros, stationary):
    """Jets of ``S(t, .)`` about each seed at every time in ``times`` (any order)."""
    n = len(seeds)
    y0 = np.zeros((n, order + 1), dtype=complex)
    y0[:, 0] = seeds
    if order >= 1:
        y0[:, 1] = 1.0
    rhs = _jet_rhs(v.g, stationary)
    moving = ~stationary

    def check(t, y):
        if len(zeros) and moving.any():
            dist = np.abs(y[moving, 0][:, None] - zeros[None, :])
            if dist.min() < SINGULAR_RADIUS:
                raise SingularityHit(f"trajectory within {dist.min():.2e} of a zero of v at t = {t:.6g}")

    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), n, order + 1), dtype=complex)
    for sign in (1.0, -1.0):
        mask = sign * times > 0
        if not mask.any():
            continue
        idx = np.where(mask)[0]
        srt = idx[np.argsort(sign * times[idx])]
        out[srt] = integrate(rhs, 0.0, y0, times[srt], tol=tol, check=check,
                             max_step=1e-2 * max(np.abs(times).max(), 1e-12))
    out[times == 0] = y0
    return out


def integrate_reflection(v, z_grid, t_span=(-1.0, 1.0), tol=1e-10, num=201, t_eval=None, order=2):
    """Integrate the continuous reflection on a grid of seeds.

    Seeds within 1e-8 of a zero of ``v`` are stationary points and are held
    fixed.  Raises SingularityHit when any other trajectory approaches a zero.
    """
    if not isinstance(v, VelocityField):
        v = VelocityField(v)
    seeds = np.atleast_1d(np.asarray(z_grid, dtype=complex))
    t = np.linspace(t_span[0], t_span[1], num) if t_eval is None else np.asarray(t_eval, dtype=float)
    zeros = v.zero_locations()
    if len(zeros):
        stationary = np.min(np.abs(seeds[:, None] - zeros[None, :]), axis=1) < STATIONARY_RADIUS
    else:
        stationary = np.zeros(len(seeds), dtype=bool)
    allt = np.unique(np.r_[t, -t / 2, 0.0])
    jets = _propagate(v, seeds, allt, tol, max(order, 1), zeros, stationary)
    pos = {float(s): i for i, s in enumerate(allt)}
    it = [pos[float(s)] for s in t]
    ih = [pos[float(s)] for s in -t / 2]
    S = jets[it, :, 0]
    S_z = jets[it, :, 1]
    S_zz = 2 * jets[it, :, 2] if order >= 2 else None
    gxx = 2 * jets[ih, :, 2] if order >= 2 else None
    return FlowFamily(t=t, x=seeds, S=S, S_z=S_z, S_zz=S_zz, gamma=jets[ih, :, 0], gamma_x=jets[ih, :, 1],
                      g=v.g, tag="numeric", stationary=stationary, gamma_xx=gxx)


# ---------------------------------------------------------------------------
# closed-form (Möbius) families

def _matrix_derivs(M, dM, ddM, z):
    """Value, time and z derivatives of the map of a matrix ``M(t)`` given ``M, M', M''``."""
    z = np.asarray(z, dtype=complex)
    (a, b), (c, d) = M
    (da, db), (dc, dd) = dM
    (dda, ddb), (ddc, ddd) = ddM
    N, D = a * z + b, c * z + d
    Nt, Dt = da * z + db, dc * z + dd
    Ntt, Dtt = dda * z + ddb, ddc * z + ddd
    det = a * d - b * c
    det_t = da * d + a * dd - db * c - b * dc
    S = N / D
    S_t = (Nt * D - N * Dt) / D ** 2
    S_tt = (Ntt * D - N * Dtt) / D ** 2 - 2 * Dt * (Nt * D - N * Dt) / D ** 3
    S_z = det / D ** 2
    S_zz = -2 * c * det / D ** 3
    S_tz = det_t / D ** 2 - 2 * det * Dt / D ** 3
    return S, S_t, S_tt, S_z, S_zz, S_tz


@dataclass(frozen=True)
class MobiusFlow:
    """Family ``S(t) = conj(P(t)) adj(P(t))`` with canonical parametrization ``gamma(t, x) = P(t) x``.

    ``P, dP, ddP`` return the matrix and its first two time derivatives.
    """

    P: object
    dP: object
    ddP: object
    g: object = None

    @classmethod
    def pencil(cls, a0, a1, a2):
        X = pencil_generator(a0, a1, a2)
        from .moebius import pencil_solution

        def P(t):
            return pencil_solution(a0, a1, a2, -t / 2).m

        g = PolyRat([1j * a0, 1j * a1, 1j * a2])
        return cls(P, lambda t: -0.5 * X @ P(t), lambda t: 0.25 * X @ X @ P(t), g)

    @classmethod
    def planted(cls):
        """Non-geodesic family ``gamma = x + i t^2``, ``S = z - 2i t^2``."""
        return cls(lambda t: np.array([[1, 1j * t * t], [0, 1]], dtype=complex),
                   lambda t: np.array([[0, 2j * t], [0, 0]], dtype=complex),
                   lambda t: np.array([[0, 2j], [0, 0]], dtype=complex))

    def matrices(self, t):
        P, dP, ddP = self.P(t), self.dP(t), self.ddP(t)
        M = np.conj(P) @ adj(P)
        dM = np.conj(dP) @ adj(P) + np.conj(P) @ adj(dP)
        ddM = np.conj(ddP) @ adj(P) + 2 * np.conj(dP) @ adj(dP) + np.conj(P) @ adj(ddP)
        return M, dM, ddM

    def schwarz(self, t):
        return SchwarzFn(MobiusMap(self.matrices(t)[0]))

    def derivatives(self, t, z):
        """``S, S_t, S_tt, S_z, S_zz, S_tz`` at ``(t, z)``."""
        return _matrix_derivs(*self.matrices(t), z)

    def samples(self, t, x):
        """Canonical curve ``gamma(t, x) = P(t) x`` with its partial derivatives."""
        from .geodesics import CurveSamples
        x = np.asarray(x, dtype=float)
        w, w_t, w_tt, w_x, w_xx, w_xt = _matrix_derivs(self.P(t), self.dP(t), self.ddP(t), x)
        return CurveSamples(t, x, w, w_x, w_t, w_xx, w_tt, w_xt)

    def family(self, x, t):
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        t = np.asarray(t, dtype=float)
        cols = [np.array([self.derivatives(s, x)[k] for s in t]) for k in range(6)]
        gam = np.array([MobiusMap(self.P(s))(x) for s in t])
        gx = np.array([MobiusMap(self.P(s)).deriv(x) for s in t])
        gxx = np.array([MobiusMap(self.P(s)).deriv(x, 2) for s in t])
        g = self.g if self.g is not None else (lambda z: self.derivatives(0.0, z)[1])
        return FlowFamily(t=t, x=x, S=cols[0], S_t=cols[1], S_tt=cols[2], S_z=cols[3], S_zz=cols[4],
                          S_tz=cols[5], gamma=gam, gamma_x=gx, g=g, tag="exact", gamma_xx=gxx)


# ---------------------------------------------------------------------------
# residuals

@dataclass(frozen=True)
class PDEResiduals:
    first_order: float
    second_order: float


def time_derivatives(F, use_exact=True):
    """``S, S_t, S_tt, S_z, S_tz`` on the family grid.

    Exact families supply closed-form derivatives; otherwise fourth-order
    central differences on the uniform t grid (interior rows only).
    """
    if use_exact and F.S_t is not None:
        return F.S, F.S_t, F.S_tt, F.S_z, F.S_tz
    t = np.asarray(F.t, dtype=float)
    if len(t) < 5:
        raise GridTooCoarse("need at least five time samples")
    h = np.diff(t)
    if np.max(np.abs(h)) > MAX_FD_STEP * (1 + 1e-9) or not np.allclose(h, h[0], rtol=1e-6):
        raise GridTooCoarse(f"time step {np.max(np.abs(h)):.3g} too coarse or non-uniform")
    h = h[0]
    A, Z = F.S, F.S_z
    S_t = (A[:-4] - 8 * A[1:-3] + 8 * A[3:-1] - A[4:]) / (12 * h)
    S_tt = (-A[:-4] + 16 * A[1:-3] - 30 * A[2:-2] + 16 * A[3:-1] - A[4:]) / (12 * h * h)
    S_tz = (Z[:-4] - 8 * Z[1:-3] + 8 * Z[3:-1] - Z[4:]) / (12 * h)
    return A[2:-2], S_t, S_tt, Z[2:-2], S_tz


def pde_residuals(F, use_exact=True):
    """``max |S_t - g S_z|`` and ``max |S_tt S_z - S_t S_tz|`` over the family."""
    S, S_t, S_tt, S_z, S_tz = time_derivatives(F, use_exact)
    xg = np.broadcast_to(F.x, S.shape)
    first = np.abs(S_t - F.g(xg) * S_z)
    second = np.abs(S_tt * S_z - S_t * S_tz)
    return PDEResiduals(float(np.max(first)), float(np.max(second)))


# ---------------------------------------------------------------------------
# stationary points

@dataclass(frozen=True)
class StationaryPoint:
    x0: float
    multiplicity: int
    lam: complex
    theta_rate: float = None
    kasner_rate: float = None


def stationary_points(v, real_tol=1e-9):
    """Real zeros of ``v`` with their residues and predicted rotation or Kasner rates.

    Simple zeros carry ``theta_rate = v'(x0)``; double zeros carry
    ``kasner_rate = v''^2/v'''``; triple zeros have a vanishing Kasner rate.
    Zeros of order four or more carry no prediction.
    """
    if not isinstance(v, VelocityField):
        v = VelocityField(v)
    out = []
    for info in v.zeros():
        if abs(info.location.imag) > real_tol:
            continue
        x0 = float(info.location.real)
        m = info.multiplicity
        c = v.v.taylor(complex(x0), 4)
        lam = info.residue
        if m == 1:
            rate = float(c[1].real)
            if abs(rate - 1 / lam) > 1e-9 * max(1.0, abs(rate)):
                raise ArithmeticError(f"v'({x0}) = {rate} disagrees with 1/residue = {1 / lam}")
            out.append(StationaryPoint(x0, m, lam, theta_rate=rate))
        elif m == 2 and abs(lam) > 1e-12:
            v2, v3 = 2 * c[2].real, 6 * c[3].real
            rate = v2 * v2 / v3
            if abs(rate - (-2 / (3 * lam))) > 1e-9 * max(1.0, abs(rate)):
                raise ArithmeticError(f"Kasner rate {rate} disagrees with -2/(3 lambda)")
            out.append(StationaryPoint(x0, m, lam, kasner_rate=float(rate)))
        elif m == 3:
            out.append(StationaryPoint(x0, m, lam, kasner_rate=0.0))
        else:
            out.append(StationaryPoint(x0, m, lam))
    return out


@dataclass
class RateMeasurement:
    kind: str
    rate: float
    spread: float
    predicted: float
    t: np.ndarray
    values: np.ndarray


def rate_measurement(F, sp, v=None, tol=1e-12, order=4):
    """Empirical rotation or Kasner rate at a stationary point over the times of ``F``.

    ``v`` defaults to the field recovered from ``F.g``.  The local jet of
    ``S(t, .)`` at ``x0`` is propagated and the clinant or Kasner invariant
    is differentiated in time.
    """
    x = np.asarray(F.x)
    if not (np.any(x.real < sp.x0) and np.any(x.real > sp.x0)):
        raise InsufficientResolution("seed grid does not straddle the stationary point")
    if v is None:
        g = F.g
        v = VelocityField(PolyRat((g.num * 0.5j).real, g.den.real))
    if abs(v(sp.x0)) > 1e-10:
        raise InsufficientResolution(f"{sp.x0} is not a stationary point of v")
    t = np.asarray(F.t, dtype=float)
    if len(t) < 3:
        raise InsufficientResolution("need at least three times")
    jets = _propagate(v, np.array([sp.x0], dtype=complex), t, tol, order,
                      np.array([], dtype=complex), np.array([True]))[:, 0, :]
    if sp.theta_rate is not None:
        theta = -np.unwrap(np.angle(jets[:, 1])) / 2
        rates = np.gradient(theta, t)
        return RateMeasurement("theta", float(np.mean(rates)), float(np.ptp(rates)), sp.theta_rate, t, theta)
    if sp.kasner_rate is None:
        raise InsufficientResolution("no rate is predicted at this stationary point")
    keep = np.abs(t) > 1e-3 * np.max(np.abs(t))
    tk = t[keep]
    d1, d2, d3 = jets[keep, 1], 2 * jets[keep, 2], 6 * jets[keep, 3]
    sch = d3 / d1 - 1.5 * (d2 / d1) ** 2
    K = (0.5j * d2 ** 2 / (d1 ** 2 * sch)).real
    # K vanishes at t = 0, so K/t is the average rate over [0, t]
    rates = K / tk
    return RateMeasurement("kasner", float(np.mean(rates)), float(np.ptp(rates)), sp.kasner_rate, tk, K)


# ---------------------------------------------------------------------------
# equipotentials, reciprocal fields, local conjugation

@dataclass
class Equipotential:
    s: np.ndarray
    z: np.ndarray
    potential: np.ndarray

    @property
    def drift(self):
        return float(np.max(np.abs(self.potential - self.potential[0])))


def _segment_integral(f, a, b):
    """``int_a^b f(z) dz`` along the straight segment."""
    d = b - a
    val, _ = quad(lambda s: f(a + s * d) * d, 0.0, 1.0, complex_func=True, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


def trace_equipotential(v, z0, s_span=1.0, num=101, tol=1e-11):
    """Curve through ``z0`` with ``dz/ds = -v/|v|``; ``Re int dz/(i v)`` is constant along it."""
    f = v if callable(v) else VelocityField(v)
    z0 = complex(z0)
    if abs(f(z0)) < SINGULAR_RADIUS:
        raise SingularityHit(f"v vanishes at {z0}")

    def rhs(s, y):
        w = f(y)
        return -w / np.abs(w)

    def check(s, y):
        if np.abs(f(y[0])) < SINGULAR_RADIUS:
            raise SingularityHit(f"equipotential runs into a zero of v at s = {s:.6g}")

    s = np.linspace(0.0, s_span, num)
    z = np.empty(num, dtype=complex)
    z[0] = z0
    z[1:] = integrate(rhs, 0.0, np.array([z0]), s[1:], tol=tol, check=check)[:, 0]
    integrand = lambda w: 1.0 / (1j * f(w))
    pot = np.zeros(num)
    acc = 0j
    for k in range(1, num):
        acc += _segment_integral(integrand, z[k - 1], z[k])
        pot[k] = acc.real
    return Equipotential(s, z, pot)


@dataclass(frozen=True)
class ReciprocalField:
    """Ideal-flow field ``W = i v`` and its reciprocal ``Y = conj(1/(i v)) / lambda^2``."""

    v: object
    lam2: object

    def W(self, z):
        return 1j * np.asarray(self.v(z), dtype=complex)

    def Y(self, z):
        w = self.W(z)
        if np.any(np.abs(w) == 0):
            raise ZeroField("field vanishes")
        return np.conj(1.0 / w) / self.lam2(z)

    def norm_product(self, z):
        l2 = self.lam2(z)
        return l2 * np.abs(self.Y(z)) ** 2 * l2 * np.abs(self.W(z)) ** 2


def reciprocal_field(v, lam2=None):
    if lam2 is None:
        lam2 = lambda z: np.ones_like(np.real(z), dtype=float)
    return ReciprocalField(v, lam2)


def local_conjugation(v, x0, t, z, tol=1e-13, maxit=50):
    """``S(t, z) = F^-1(i t + F(z))`` with ``F(w) = int dS / (-2 v(S))``, by quadrature and Newton.

    ``v`` may be any callable (for instance a square-root field).
    """
    f = v if callable(v) else VelocityField(v)
    if abs(f(x0)) == 0:
        raise ZeroField(f"v vanishes at x0 = {x0}")
    z = complex(z)
    dF = lambda s: 1.0 / (-2.0 * f(s))
    w = z + t * (-2j * f(z))
    for _ in range(maxit):
        r = _segment_integral(dF, z, w) - 1j * t
        w_new = w - r * (-2.0 * f(w))
        if abs(w_new - w) < tol * max(1.0, abs(w)):
            return complex(w_new)
        w = w_new
    raise NoConvergence("Newton inversion of the conjugating map did not converge")


# ---------------------------------------------------------------------------
# Davis iteration

def _jet_about(S, center, order=24, limit=1e-6):
    if S.is_mobius:
        return S.rep.jet(center, order)
    j = S.rep
    delta = complex(center) - j.center
    if delta == 0:
        return j
    proxy = abs(j.coeffs[-1]) * abs(delta) ** j.order
    if proxy > limit or abs(delta) > 0.5 * j.radius_estimate():
        raise DomainExhausted(f"re-expansion by {abs(delta):.3g} leaves the jet window (proxy {proxy:.2e})")
    return j.shift(center)


def schwarz_product(S, T, order=24):
    """``S o conj(T) o S``; exact for Möbius pairs, by jets otherwise."""
    if S.is_mobius and T.is_mobius:
        m = mobius_product(S.rep, T.rep)
        return SchwarzFn(m, np.conj(S(T.base_point)))
    t0 = T.base_point
    p = complex(np.conj(S(t0)))
    try:
        inner = jet_compose(jet_conjugate(_jet_about(T, t0, order)), _jet_about(S, p, order))
        out = jet_compose(_jet_about(S, t0, order), inner, recenter=False)
    except CenterMismatch as exc:
        raise DomainExhausted(str(exc)) from exc
    if not np.all(np.isfinite(out.coeffs)):
        raise DomainExhausted("product jet has lost accuracy")
    return SchwarzFn(out, p)


def davis_iterate(S0, S1, n, order=24):
    """Iterates ``S_{k+2} = S_{k+1} o conj(S_k) o S_{k+1}`` indexed from 0 to ``n`` (negative allowed)."""
    S0 = S0 if isinstance(S0, SchwarzFn) else SchwarzFn(S0)
    S1 = S1 if isinstance(S1, SchwarzFn) else SchwarzFn(S1)
    out = {0: S0, 1: S1}
    for k in range(2, n + 1):
        out[k] = schwarz_product(out[k - 1], out[k - 2], order)
    for k in range(-1, n - 1, -1):
        out[k] = schwarz_product(out[k + 1], out[k + 2], order)
    return out


def check_sjk(S_list, j, k, samples=None, radius=1e-2):
    """Residual of ``S_{j+k} = S_j o conj(S_0) o S_k``."""
    Sj, S0, Sk, Sjk = S_list[j], S_list[0], S_list[k], S_list[j + k]
    if all(s.is_mobius for s in (Sj, S0, Sk, Sjk)):
        lhs = MobiusMap(Sj.rep.m @ np.conj(S0.rep.m) @ Sk.rep.m)
        return mobius_distance(lhs, Sjk.rep)
    if samples is None:
        samples = Sjk.base_point + radius * np.exp(2j * np.pi * np.arange(8) / 8)
    samples = np.atleast_1d(np.asarray(samples, dtype=complex))
    lhs = np.array([Sj(np.conj(S0(np.conj(Sk(z))))) for z in samples])
    rhs = np.array([Sjk(z) for z in samples])
    return float(np.max(np.abs(lhs - rhs)))
