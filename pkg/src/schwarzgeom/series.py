"""Truncated power series (jets), rational functions and zero/pole counting.

Coefficient arrays are stored lowest degree first throughout: ``coeffs[k]``
multiplies ``(z - center)**k`` for jets and ``z**k`` for polynomials.  The
private ``_mul``/``_recip``/``_compose`` helpers work on arrays with arbitrary
leading batch dimensions (the last axis holds the coefficients), which is what
the ODE code in :mod:`schwarzgeom.dynamics` uses to push many jets at once.
"""

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import BoundaryRoot, CenterMismatch, NotInvertible

DEFAULT_ORDER = 24
CENTER_TOL = 1e-10
ROOT_CLUSTER_TOL = 1e-7
COMMON_ROOT_TOL = 1e-9


# ---------------------------------------------------------------------------
# batched series kernels

def _mul(a, b, n):
    """Product of two series truncated at degree ``n``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (n + 1,)
    out = np.zeros(shape, dtype=complex)
    for i in range(min(n, a.shape[-1] - 1) + 1):
        m = min(n - i, b.shape[-1] - 1)
        out[..., i:i + m + 1] += a[..., i:i + 1] * b[..., :m + 1]
    return out


def _recip(a, n):
    a = np.asarray(a, dtype=complex)
    out = np.zeros(a.shape[:-1] + (n + 1,), dtype=complex)
    inv0 = 1.0 / a[..., 0]
    out[..., 0] = inv0
    for k in range(1, n + 1):
        m = min(k, a.shape[-1] - 1)
        acc = np.zeros(a.shape[:-1], dtype=complex)
        for j in range(1, m + 1):
            acc = acc + a[..., j] * out[..., k - j]
        out[..., k] = -inv0 * acc
    return out


def _div(a, b, n):
    return _mul(a, _recip(b, n), n)


def _deriv(a):
    a = np.asarray(a, dtype=complex)
    k = np.arange(1, a.shape[-1])
    return a[..., 1:] * k


def _compose(f, d, n):
    """Series of ``f(u)`` with ``u = d``; ``d`` must have zero constant term."""
    f = np.asarray(f, dtype=complex)
    d = np.asarray(d, dtype=complex)
    m = min(f.shape[-1] - 1, n)
    shape = np.broadcast_shapes(f.shape[:-1], d.shape[:-1]) + (n + 1,)
    out = np.zeros(shape, dtype=complex)
    out[..., 0] = f[..., m]
    for k in range(m - 1, -1, -1):
        out = _mul(out, d, n)
        out[..., 0] += f[..., k]
    return out


def _taylor_shift(c, delta):
    """Re-expand the polynomial with coefficients ``c`` about ``center + delta``."""
    c = np.asarray(c, dtype=complex)
    n = len(c) - 1
    out = np.zeros(n + 1, dtype=complex)
    powers = delta ** np.arange(n + 1)
    for k in range(n + 1):
        j = np.arange(k, n + 1)
        binom = np.array([comb(int(jj), k) for jj in j], dtype=float)
        out[k] = np.sum(binom * c[k:] * powers[j - k])
    return out


# ---------------------------------------------------------------------------
# jets

@dataclass(frozen=True, eq=False)
class Jet:
    """Truncated Taylor series ``sum coeffs[k] (z - center)**k``."""

    center: complex
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a jet needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", complex(self.center))

    @property
    def order(self):
        return len(self.coeffs) - 1

    @classmethod
    def identity(cls, center=0.0, order=DEFAULT_ORDER):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(center, c)

    @classmethod
    def constant(cls, value, center=0.0, order=DEFAULT_ORDER):
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(center, c)

    @classmethod
    def polynomial(cls, coeffs, center=0.0, order=DEFAULT_ORDER):
        """Jet of the polynomial ``sum coeffs[k] z**k`` re-expanded about ``center``."""
        c = np.zeros(max(order, len(coeffs) - 1) + 1, dtype=complex)
        c[:len(coeffs)] = coeffs
        return cls(center, _taylor_shift(c, center)[:order + 1])

    def __call__(self, z):
        u = np.asarray(z, dtype=complex) - self.center
        out = np.full(u.shape, self.coeffs[-1], dtype=complex)
        for c in self.coeffs[-2::-1]:
            out = out * u + c
        return out if out.ndim else complex(out)

    def deriv(self):
        if self.order == 0:
            return Jet(self.center, [0.0])
        return Jet(self.center, _deriv(self.coeffs))

    def derivatives(self, z, k):
        """Values ``[f(z), f'(z), ..., f^(k)(z)]``."""
        out, j = [], self
        for _ in range(k + 1):
            out.append(j(z))
            j = j.deriv()
        return out

    def truncate(self, order):
        return Jet(self.center, self.coeffs[:order + 1])

    def shift(self, new_center):
        """Taylor shift: the same truncated polynomial expanded about ``new_center``."""
        return Jet(new_center, _taylor_shift(self.coeffs, complex(new_center) - self.center))

    def radius_estimate(self):
        """Cauchy-Hadamard estimate of the convergence radius from the upper half of the coefficients."""
        n = self.order
        if n < 1:
            return np.inf
        k = np.arange(max(1, n // 2), n + 1)
        mags = np.abs(self.coeffs[k])
        nz = mags > 0
        if not np.any(nz):
            return np.inf
        return float(np.min(mags[nz] ** (-1.0 / k[nz])))

    def tail(self, radius=1.0):
        """Truncation-error proxy ``|c_N| * radius**N``."""
        return float(abs(self.coeffs[-1]) * radius ** self.order)

    def _binary(self, other, op):
        if isinstance(other, Jet):
            if abs(other.center - self.center) > CENTER_TOL:
                raise CenterMismatch(f"centers {self.center} and {other.center} differ")
            n = min(self.order, other.order)
            return Jet(self.center, op(self.coeffs[:n + 1], other.coeffs[:n + 1], n))
        c = self.coeffs.copy()
        return Jet(self.center, op(c, np.r_[complex(other), np.zeros(self.order)], self.order))

    def __add__(self, other):
        return self._binary(other, lambda a, b, n: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b, n: a - b)

    def __neg__(self):
        return Jet(self.center, -self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.center, self.coeffs * other)
        return self._binary(other, _mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return Jet(self.center, self.coeffs / other)
        return self._binary(other, _div)

    def __repr__(self):
        return f"Jet(center={self.center!r}, order={self.order}, coeffs[:4]={self.coeffs[:4]})"


def jet_conjugate(f):
    """The conjugate function ``z -> conj(f(conj z))`` as a jet about ``conj(center)``."""
    return Jet(np.conj(f.center), np.conj(f.coeffs))


def jet_compose(f, g, recenter=True):
    """Jet of ``f o g`` about the center of ``g``.

    The outer jet is Taylor-shifted to ``g(center)`` when the two disagree,
    provided the shift stays inside half the estimated convergence radius.
    """
    g0 = g.coeffs[0]
    delta = g0 - f.center
    if delta != 0:
        if abs(delta) > CENTER_TOL and (not recenter or abs(delta) > 0.5 * f.radius_estimate()):
            raise CenterMismatch(
                f"inner value {g0} is {abs(delta):.3g} away from outer center {f.center}")
        f = f.shift(g0)
    n = min(f.order, g.order)
    d = g.coeffs[:n + 1].copy()
    d[0] = 0.0
    return Jet(g.center, _compose(f.coeffs[:n + 1], d, n))


def jet_invert(f):
    """Series reversion: the local inverse of ``f`` as a jet about ``f(center)``."""
    a1 = f.coeffs[1] if f.order >= 1 else 0.0
    if abs(a1) <= 1e-12:
        raise NotInvertible(f"derivative {a1} at the center vanishes")
    n = f.order
    h = f.coeffs.copy()
    h[0] = 0.0
    r = np.zeros(n + 1, dtype=complex)
    r[1] = 1.0 / a1
    for k in range(2, n + 1):
        err = _compose(h, r, k)[k]
        r[k] -= err / a1
    r[0] = f.center
    return Jet(f.coeffs[0], r)


def schwarzian(f):
    """Schwarzian derivative ``(f''/f')' - (f''/f')**2 / 2`` as a jet of order N-3."""
    n = f.order
    if n < 3:
        raise ValueError("the Schwarzian needs a jet of order >= 3")
    d1 = _deriv(f.coeffs)
    if abs(d1[0]) <= 1e-12:
        raise NotInvertible("f'(center) = 0")
    d2 = _deriv(d1)
    ratio = _div(d2, d1[:n - 1], n - 2)
    out = _deriv(ratio) - 0.5 * _mul(ratio, ratio, n - 3)
    return Jet(f.center, out)


# ---------------------------------------------------------------------------
# roots

def _trim(c, rel=1e-13):
    c = np.array(c, dtype=complex).ravel()
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0:
        return np.zeros(1, dtype=complex)
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= rel * scale:
        k -= 1
    return c[:k]


def cluster_roots(coeffs, tol=ROOT_CLUSTER_TOL):
    """Roots of ``sum coeffs[k] z**k`` as ``[(root, multiplicity), ...]``.

    Companion-matrix eigenvalues (``numpy.roots``), one Newton polish per root
    and single-linkage clustering within ``tol``.  Exactly vanishing low-order
    coefficients are read off as an exact root at the origin.
    """
    c = _trim(coeffs)
    if len(c) == 1:
        return []
    m0 = 0
    while m0 < len(c) - 1 and c[m0] == 0:
        m0 += 1
    rest = c[m0:]
    roots = list(np.roots(rest[::-1])) if len(rest) > 1 else []
    dc = P.polyder(rest)
    polished = []
    for r in roots:
        pr = P.polyval(r, rest)
        dpr = P.polyval(r, dc)
        if dpr != 0:
            cand = r - pr / dpr
            if abs(P.polyval(cand, rest)) < abs(pr):
                r = cand
        polished.append(complex(r))
    # single-linkage clustering
    labels = list(range(len(polished)))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(len(polished)):
        for j in range(i + 1, len(polished)):
            if abs(polished[i] - polished[j]) < tol:
                labels[find(i)] = find(j)
    groups = {}
    for i, r in enumerate(polished):
        groups.setdefault(find(i), []).append(r)
    out = [(complex(np.mean(g)), len(g)) for g in groups.values()]
    if m0:
        merged = False
        for i, (r, m) in enumerate(out):
            if abs(r) < tol:
                out[i] = (0j, m + m0)
                merged = True
        if not merged:
            out.append((0j, m0))
    out.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return out


# ---------------------------------------------------------------------------
# rational functions

@dataclass(frozen=True, eq=False)
class PolyRat:
    """Rational function ``num(z)/den(z)`` with a monic denominator.

    Common roots of numerator and denominator (within 1e-9) are cancelled on
    construction.
    """

    num: np.ndarray
    den: np.ndarray = (1.0,)

    def __post_init__(self):
        num = _trim(self.num)
        den = _trim(self.den)
        if np.all(den == 0):
            raise ZeroDivisionError("denominator is identically zero")
        if len(den) > 1 and len(num) > 1:
            nroots = cluster_roots(num)
            for r, m in cluster_roots(den):
                for nr, nm in nroots:
                    if abs(nr - r) < COMMON_ROOT_TOL:
                        root = 0.5 * (nr + r)
                        for _ in range(min(m, nm)):
                            num = _trim(P.polydiv(num, [-root, 1.0])[0])
                            den = _trim(P.polydiv(den, [-root, 1.0])[0])
        lead = den[-1]
        object.__setattr__(self, "num", num / lead)
        object.__setattr__(self, "den", den / lead)

    @classmethod
    def poly(cls, coeffs):
        return cls(coeffs, [1.0])

    @classmethod
    def from_roots(cls, zeros=(), poles=(), scale=1.0):
        num = P.polyfromroots(list(zeros)) * scale if len(zeros) else np.array([scale], dtype=complex)
        den = P.polyfromroots(list(poles)) if len(poles) else np.array([1.0])
        return cls(num, den)

    @property
    def degree(self):
        return len(self.num) - 1, len(self.den) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = P.polyval(z, self.num) / P.polyval(z, self.den)
        return out if out.ndim else complex(out)

    def deriv(self):
        p, q = self.num, self.den
        top = P.polysub(P.polymul(P.polyder(p), q), P.polymul(p, P.polyder(q))) if len(p) > 1 or len(q) > 1 else [0.0]
        if len(q) == 1:
            return PolyRat(P.polyder(p) if len(p) > 1 else [0.0], q)
        return PolyRat(top, P.polymul(q, q))

    def __mul__(self, other):
        if isinstance(other, PolyRat):
            return PolyRat(P.polymul(self.num, other.num), P.polymul(self.den, other.den))
        return PolyRat(self.num * other, self.den)

    __rmul__ = __mul__

    def __neg__(self):
        return PolyRat(-self.num, self.den)

    def is_real(self, tol=1e-12):
        scale = max(np.max(np.abs(self.num)), 1e-300)
        return bool(np.all(np.abs(self.num.imag) <= tol * scale) and np.all(np.abs(self.den.imag) <= tol))

    def zeros(self):
        if np.all(self.num == 0):
            return []
        return cluster_roots(self.num)

    def poles(self):
        return cluster_roots(self.den)

    def taylor(self, centers, order):
        """Taylor coefficients about each of ``centers``; shape ``centers.shape + (order+1,)``."""
        centers = np.asarray(centers, dtype=complex)
        pc = _poly_taylor(self.num, centers, order)
        if len(self.den) == 1:
            return pc / self.den[0]
        qc = _poly_taylor(self.den, centers, order)
        return _div(pc, qc, order)

    def jet(self, center, order=DEFAULT_ORDER):
        return Jet(center, self.taylor(complex(center), order))

    def __repr__(self):
        return f"PolyRat(num={np.round(self.num, 12).tolist()}, den={np.round(self.den, 12).tolist()})"


def _poly_taylor(c, centers, order):
    out = np.zeros(centers.shape + (order + 1,), dtype=complex)
    d = np.asarray(c, dtype=complex)
    for k in range(order + 1):
        if len(d) == 0 or (len(d) == 1 and d[0] == 0):
            break
        out[..., k] = P.polyval(centers, d) / factorial(k)
        d = P.polyder(d) if len(d) > 1 else np.zeros(1)
    return out


# ---------------------------------------------------------------------------
# counting

@dataclass(frozen=True)
class DiskCount:
    zeros: int
    poles: int


def count_zeros_poles(r, radius, center=0.0, boundary_tol=1e-8):
    """Zeros and poles of ``r`` strictly inside ``|z - center| < radius``, with multiplicity."""
    counts = []
    for roots in (r.zeros(), r.poles()):
        n = 0
        for z, m in roots:
            dist = abs(z - center)
            if abs(dist - radius) <= boundary_tol:
                raise BoundaryRoot(f"root {z} lies on the circle of radius {radius}")
            if dist < radius:
                n += m
        counts.append(n)
    return DiskCount(*counts)


MAX_WINDING_SAMPLES = 2_000_000


def _safe_samples(r, radius, center):
    """Samples so that each step moves ``arg r`` by at most pi/2.

    Along the contour ``|d arg(z - a)| <= |dz| / dist(a, contour)``; summing
    over zeros and poles bounds the argument change of ``r`` per step.
    """
    load = 0.0
    for roots in (r.zeros(), r.poles()):
        for z, m in roots:
            gap = abs(abs(z - center) - radius)
            if gap == 0:
                raise BoundaryRoot(f"root {z} lies on the contour")
            load += m / gap
    n = int(np.ceil(2 * np.pi * radius * load / (np.pi / 2)))
    if n > MAX_WINDING_SAMPLES:
        raise BoundaryRoot("a zero or pole lies too close to the contour to resolve the winding")
    return n


def winding_number(f, radius, center=0.0, samples=256, max_depth=40):
    """Winding number of ``f`` (a vectorised callable) around 0 along ``|z - center| = radius``.

    The argument is tracked with adaptive bisection so that every accepted
    step changes ``arg f`` by less than pi/2.  For a :class:`PolyRat` the
    initial grid is also refined from the distances of its zeros and poles
    to the contour, since a near-contour root can turn the argument by a full
    multiple of 2 pi between two samples without the endpoints noticing.
    """
    if isinstance(f, PolyRat):
        samples = max(samples, _safe_samples(f, radius, center))
    def at(th):
        val = np.asarray(f(center + radius * np.exp(1j * np.asarray(th))), dtype=complex)
        if not np.all(np.isfinite(val)) or np.any(val == 0):
            raise BoundaryRoot("function vanishes or blows up on the contour")
        return val

    th = np.linspace(0.0, 2 * np.pi, samples + 1)
    vals = at(th)
    total = 0.0
    stack = [(th[i], th[i + 1], vals[i], vals[i + 1], 0) for i in range(samples)][::-1]
    while stack:
        a, b, fa, fb, depth = stack.pop()
        step = np.angle(fb / fa)
        if abs(step) < np.pi / 2:
            total += step
            continue
        if depth >= max_depth:
            raise BoundaryRoot("argument increment could not be resolved; root too close to contour")
        m = 0.5 * (a + b)
        fm = complex(at(m))
        stack.append((m, b, fm, fb, depth + 1))
        stack.append((a, m, fa, fm, depth + 1))
    w = total / (2 * np.pi)
    return int(round(w))
