"""Circles as Möbius Schwarz functions, the inversion product and Lorentz coordinates.

A circle (or line) is stored as the 2x2 matrix of its Schwarz function
``z -> (w z + iB)/(iA z + conj w)`` with real ``A, B``.  Matrices are kept
unnormalized; only :func:`classify` and :func:`to_lorentz` rescale.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import Degenerate, LightlikeCoordinate, NonrealTrace, ZeroVector
from .series import Jet, _div

SCHWARZ_FORM_TOL = 1e-8
TRACE_TOL = 1e-9
DISC_TOL = 1e-12
LORENTZ = np.array([1.0, 1.0, 1.0, -1.0])


def adj(m):
    """Adjugate of a 2x2 matrix (inverse up to the determinant)."""
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


@dataclass(frozen=True, eq=False)
class MobiusMap:
    """``z -> (a z + b)/(c z + d)``, matrix defined up to nonzero complex scale."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=complex).reshape(2, 2)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_coeffs(cls, a, b, c, d):
        return cls([[a, b], [c, d]])

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    @classmethod
    def schwarz_form(cls, omega, A, B):
        return cls([[omega, 1j * B], [1j * A, np.conj(omega)]])

    @property
    def det(self):
        m = self.m
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    @property
    def trace(self):
        return complex(self.m[0, 0] + self.m[1, 1])

    def __call__(self, z):
        a, b, c, d = self.m.ravel()
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (a * z + b) / (c * z + d)
        return out if out.ndim else complex(out)

    def __matmul__(self, other):
        return MobiusMap(self.m @ other.m)

    def conj(self):
        """The conjugate map ``z -> conj(f(conj z))``."""
        return MobiusMap(np.conj(self.m))

    def inverse(self):
        return MobiusMap(adj(self.m))

    def normalized(self):
        """Unit Frobenius norm representative."""
        return MobiusMap(self.m / np.linalg.norm(self.m))

    def deriv(self, z, k=1):
        """k-th derivative at ``z``: ``(-1)^(k+1) k! c^(k-1) det / (cz+d)^(k+1)``."""
        _, _, c, d = self.m.ravel()
        z = np.asarray(z, dtype=complex)
        if k == 0:
            return self(z)
        out = (-1) ** (k + 1) * factorial(k) * c ** (k - 1) * self.det / (c * z + d) ** (k + 1)
        return out if np.ndim(out) else complex(out)

    def jet(self, center, order=24):
        a, b, c, d = self.m.ravel()
        z0 = complex(center)
        num = np.zeros(order + 1, dtype=complex)
        den = np.zeros(order + 1, dtype=complex)
        num[0], den[0] = a * z0 + b, c * z0 + d
        if order >= 1:
            num[1], den[1] = a, c
        return Jet(z0, _div(num, den, order))

    def to_schwarz_form(self):
        """Rescale by a unit phase so that ``conj(N) = adj(N)``.

        Raises Degenerate if no phase achieves this (not a circle Schwarz function).
        """
        m = self.m
        if abs(self.det) <= 1e-300 * max(1.0, np.max(np.abs(m)) ** 2):
            raise Degenerate("singular matrix")
        am = adj(m)
        i, j = np.unravel_index(np.argmax(np.abs(am)), am.shape)
        phase = np.conj(m[i, j]) / am[i, j]
        phase /= abs(phase)
        n = m * np.sqrt(phase)
        resid = np.linalg.norm(np.conj(n) - adj(n)) / np.linalg.norm(n)
        if resid > SCHWARZ_FORM_TOL:
            raise Degenerate(f"matrix is not a circle Schwarz function (residual {resid:.2e})")
        return MobiusMap(n)

    def circle_params(self):
        """``(omega, A, B)`` of the Schwarz form."""
        n = self.to_schwarz_form().m
        omega = 0.5 * (n[0, 0] + np.conj(n[1, 1]))
        B = float((n[0, 1] / 1j).real)
        A = float((n[1, 0] / 1j).real)
        return complex(omega), A, B

    def __repr__(self):
        return f"MobiusMap({np.round(self.m, 12).tolist()})"


def schwarz_of_mobius(M):
    """Schwarz function ``conj(M) o M^-1`` of the circle parametrized by ``M`` on the real line."""
    if not isinstance(M, MobiusMap):
        M = MobiusMap(M)
    if abs(M.det) == 0:
        raise Degenerate("det(M) = 0")
    return MobiusMap(np.conj(M.m) @ adj(M.m)).to_schwarz_form()


def _project_schwarz(m):
    """Nearest matrix with ``conj(N) = adj(N)`` after phase alignment.

    Rounding errors off the Schwarz-form manifold grow like (1 + sqrt 2)^k
    under repeated products, so products are re-projected.
    """
    am = adj(m)
    i, j = np.unravel_index(np.argmax(np.abs(am)), am.shape)
    phase = np.conj(m[i, j]) / am[i, j]
    n = m * np.sqrt(phase / abs(phase))
    if np.linalg.norm(np.conj(n) - adj(n)) > SCHWARZ_FORM_TOL * np.linalg.norm(n):
        return m
    return 0.5 * (n + np.conj(adj(n)))


def mobius_product(S, T):
    """Inversion product ``S o conj(T) o S``: the image of circle T under inversion in circle S."""
    m = S.m @ np.conj(T.m) @ S.m
    nrm = np.linalg.norm(m)
    if nrm == 0 or abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) <= 1e-14 * nrm ** 2:
        raise Degenerate("product is singular")
    return MobiusMap(_project_schwarz(m / nrm))


def conformal_action(phi, S):
    """Transport of a Schwarz function by a Möbius map: ``conj(phi) o S o phi^-1``."""
    return MobiusMap(np.conj(phi.m) @ S.m @ adj(phi.m))


def mobius_distance(S, T):
    """Projective distance between two matrices modulo complex scale (0 iff equal as maps)."""
    a = S.m.ravel() / np.linalg.norm(S.m)
    b = T.m.ravel() / np.linalg.norm(T.m)
    ip = np.vdot(b, a)
    phase = ip / abs(ip) if ip != 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


# ---------------------------------------------------------------------------
# Lorentz coordinates

@dataclass(frozen=True, eq=False)
class CircleCoord:
    """Point on the unit hyperboloid ``x1^2 + x2^2 + x3^2 - x4^2 = 1``, identified with ``-x``."""

    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(4))

    def same_as(self, other, tol=1e-10):
        return bool(min(np.max(np.abs(self.x - other.x)), np.max(np.abs(self.x + other.x))) <= tol)

    def __repr__(self):
        return f"CircleCoord({np.round(self.x, 12).tolist()})"


def lorentz_dot(x, y):
    x = x.x if isinstance(x, CircleCoord) else np.asarray(x, dtype=float)
    y = y.x if isinstance(y, CircleCoord) else np.asarray(y, dtype=float)
    return float(np.sum(LORENTZ * x * y))


def canonical_sign(x, tol=1e-12):
    x = np.asarray(x, dtype=float)
    for v in x:
        if abs(v) > tol:
            return x if v > 0 else -x
    return x


def to_lorentz(S):
    omega, A, B = S.circle_params()
    raw = np.array([omega.imag, omega.real, -(A + B) / 2, (A - B) / 2])
    q = lorentz_dot(raw, raw)
    if q <= DISC_TOL * max(1.0, np.sum(raw ** 2)):
        raise LightlikeCoordinate("point circle: det(S) = 0")
    return CircleCoord(canonical_sign(raw / np.sqrt(q)))


def from_lorentz(x):
    x1, x2, x3, x4 = (x.x if isinstance(x, CircleCoord) else np.asarray(x, dtype=float))
    return MobiusMap.schwarz_form(x2 + 1j * x1, x4 - x3, -(x3 + x4))


def quadric_product(x, y):
    """``2<x,y>/<x,x> x - y``: reflection of y in x on the hyperboloid."""
    xv, yv = x.x, y.x
    return CircleCoord(2 * lorentz_dot(xv, yv) / lorentz_dot(xv, xv) * xv - yv)


def random_circle(rng, scale=2.0):
    """Random non-degenerate circle coordinate (spacelike unit vector)."""
    while True:
        v = rng.normal(size=4) * scale
        q = lorentz_dot(v, v)
        if q > 0.05 * np.sum(v ** 2):
            return CircleCoord(canonical_sign(v / np.sqrt(q)))


def hyperboloid_point(rng, spread=1.5):
    """Random point of the unit hyperboloid with ``|x4| <= spread`` (bounded components)."""
    x4 = rng.uniform(-spread, spread)
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    return CircleCoord(canonical_sign(np.r_[np.sqrt(1 + x4 * x4) * u, x4]))


# ---------------------------------------------------------------------------
# circles as point sets

@dataclass(frozen=True)
class CircleShape:
    kind: str  # "circle" or "line"
    center: complex = 0j
    radius: float = 0.0
    point: complex = 0j
    direction: complex = 1 + 0j


def circle_of(S, tol=1e-12):
    """Geometric circle or line ``{z : S(z) = conj z}``."""
    omega, A, B = S.circle_params()
    det = abs(omega) ** 2 + A * B
    if det <= 0:
        raise LightlikeCoordinate("no real circle: det(S) <= 0")
    scale = max(abs(omega), abs(A), abs(B))
    if abs(A) <= tol * scale:
        return CircleShape("line", point=-1j * B / (2 * omega), direction=np.conj(omega) / abs(omega))
    return CircleShape("circle", center=1j * np.conj(omega) / A, radius=float(np.sqrt(det) / abs(A)))


def sample_circle(S, n=256, extent=10.0):
    shape = circle_of(S)
    if shape.kind == "circle":
        th = np.linspace(0, 2 * np.pi, n)
        return shape.center + shape.radius * np.exp(1j * th)
    s = np.linspace(-extent, extent, n)
    return shape.point + s * shape.direction


# ---------------------------------------------------------------------------
# pencils

@dataclass(frozen=True)
class PencilClass:
    kind: str
    trace: float


def pencil_generator(a0, a1, a2):
    return 1j * np.array([[a1 / 2, a0], [-a2, -a1 / 2]], dtype=complex)


def pencil_solution(a0, a1, a2, t):
    """Geodesic through the real axis with ``S_t = g(S)``, ``g(z) = i(a2 z^2 + a1 z + a0)``.

    Closed form ``exp(tX)``: cosh/sinh, cos/sin or linear according to the
    sign of the discriminant.  The result has unit determinant.
    """
    if a0 == 0 and a1 == 0 and a2 == 0:
        raise ZeroVector("pencil coefficients all vanish")
    X = pencil_generator(a0, a1, a2)
    k2 = -(a1 * a1 - 4 * a2 * a0) / 4.0
    t = float(t)
    if abs(k2) <= DISC_TOL:
        m = np.eye(2) + t * X
    elif k2 > 0:
        k = np.sqrt(k2)
        m = np.cosh(k * t) * np.eye(2) + (np.sinh(k * t) / k) * X
    else:
        k = np.sqrt(-k2)
        m = np.cos(k * t) * np.eye(2) + (np.sin(k * t) / k) * X
    return MobiusMap(m)


def classify(S):
    d = S.det
    if d == 0:
        raise Degenerate("det(S) = 0")
    tau = S.trace / np.sqrt(d)
    if abs(tau.imag) > TRACE_TOL:
        raise NonrealTrace(f"normalized trace {tau} is not real")
    tau = abs(tau.real)
    if abs(tau - 2) <= TRACE_TOL:
        kind = "parabolic"
    elif tau > 2:
        kind = "hyperbolic"
    else:
        kind = "elliptic"
    return PencilClass(kind, float(tau))


def causal_type(a0, a1, a2):
    disc = a1 * a1 - 4 * a2 * a0
    if abs(disc) <= DISC_TOL:
        return "lightlike"
    return "timelike" if disc < 0 else "spacelike"


def pencil_norm(a0, a1, a2):
    """Lorentz norm ``<g,g>`` of the pencil generator (a quarter of the discriminant)."""
    return (a1 * a1 - 4 * a2 * a0) / 4.0


def trace_ode_residual(a0, a1, a2, t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.size < 5:
        raise ValueError("need at least 5 grid points")
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-15):
        raise ValueError("grid must be uniform")
    tau = np.array([pencil_solution(a0, a1, a2, s).trace.real for s in t])
    tt = (tau[2:] - 2 * tau[1:-1] + tau[:-2]) / h ** 2
    return float(np.max(np.abs(tt + pencil_norm(a0, a1, a2) * tau[1:-1])))
