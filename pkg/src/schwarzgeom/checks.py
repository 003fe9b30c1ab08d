"""Symmetric-space verification: axioms, fixed points, powers and the canonical connection."""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import schwarz_product, time_derivatives
from .errors import NotAFixedPoint
from .geometry import SchwarzFn
from .moebius import (CircleCoord, MobiusMap, canonical_sign, from_lorentz, hyperboloid_point, lorentz_dot, mobius_distance,
                      mobius_product, quadric_product, random_circle, to_lorentz)


@dataclass(frozen=True)
class ProductSpace:
    name: str
    product: object
    distance: object
    tol: float


def _coord_distance(x, y):
    """Sup-norm distance up to sign, relative to the size of the vectors.

    Nested products legitimately reach components of order 1e2, and the
    Lorentz form then loses absolute (not relative) precision.
    """
    scale = max(1.0, np.max(np.abs(x.x)), np.max(np.abs(y.x)))
    return float(min(np.max(np.abs(x.x - y.x)), np.max(np.abs(x.x + y.x))) / scale)


def quadric_space(tol=1e-12):
    return ProductSpace("quadric", quadric_product, _coord_distance, tol)


def mobius_space(tol=1e-10):
    return ProductSpace("mobius", mobius_product, mobius_distance, tol)


def jet_space(samples=None, tol=1e-6, order=24):
    """Schwarz functions as jets; distance is the max difference at ``samples``."""
    if samples is None:
        samples = 0.05 * np.exp(2j * np.pi * np.arange(8) / 8)
    samples = np.asarray(samples, dtype=complex)

    def dist(S, T):
        return float(np.max(np.abs(S(samples) - T(samples))))

    return ProductSpace("jet", lambda S, T: schwarz_product(S, T, order), dist, tol)


@dataclass(frozen=True)
class AxiomReport:
    idempotent: float
    involutive: float
    distributive: float
    count: int
    tol: float

    @property
    def passed(self):
        return max(self.idempotent, self.involutive, self.distributive) < self.tol


def axiom_suite(space, triples):
    """Max violations of P.P = P, P.(P.Q) = Q and P.(Q.R) = (P.Q).(P.R)."""
    mul, d = space.product, space.distance
    a1 = a2 = a3 = 0.0
    n = 0
    for P, Q, R in triples:
        a1 = max(a1, d(mul(P, P), P))
        a2 = max(a2, d(mul(P, mul(P, Q)), Q))
        a3 = max(a3, d(mul(P, mul(Q, R)), mul(mul(P, Q), mul(P, R))))
        n += 1
    return AxiomReport(a1, a2, a3, n, space.tol)


def random_mobius_triples(rng, n):
    """Random Schwarz-form matrices (random complex rescaling included)."""
    out = []
    for _ in range(n):
        trip = []
        for _ in range(3):
            m = from_lorentz(random_circle(rng)).m
            scale = rng.normal() + 1j * rng.normal()
            trip.append(MobiusMap(m * scale))
        out.append(tuple(trip))
    return out


def random_quadric_triples(rng, n):
    return [tuple(hyperboloid_point(rng) for _ in range(3)) for _ in range(n)]


# ---------------------------------------------------------------------------
# axiom (4)

@dataclass(frozen=True)
class FixedPointReport:
    kind: str
    z0: complex = None
    deriv_sum: float = 0.0
    lorentz: float = None


def _mobius_intersections(P, Q, tol=1e-8):
    (a1, b1), (c1, d1) = P.m
    (a2, b2), (c2, d2) = Q.m
    # (a1 z + b1)(c2 z + d2) - (a2 z + b2)(c1 z + d1) = 0
    coeffs = [a1 * c2 - a2 * c1, a1 * d2 + b1 * c2 - a2 * d1 - b2 * c1, b1 * d2 - b2 * d1]
    if abs(coeffs[0]) < 1e-14 * max(map(abs, coeffs)):
        roots = [-coeffs[2] / coeffs[1]] if abs(coeffs[1]) > 0 else []
    else:
        roots = list(np.roots(coeffs))
    out = []
    for z in roots:
        scale = max(1.0, abs(z))
        if abs(P(z) - np.conj(z)) < tol * scale and abs(Q(z) - np.conj(z)) < tol * scale:
            out.append(complex(z))
    return out


def orthogonal_fixed_points(P, Q, z0=None, tol=1e-8):
    """Classify a fixed point ``P.Q = Q`` as ``equal`` or ``orthogonal`` (``P' = -Q'`` at intersections)."""
    P = P if isinstance(P, SchwarzFn) else SchwarzFn(P)
    Q = Q if isinstance(Q, SchwarzFn) else SchwarzFn(Q)
    mobius = P.is_mobius and Q.is_mobius
    if mobius:
        if mobius_distance(mobius_product(P.rep, Q.rep), Q.rep) > tol:
            raise NotAFixedPoint("P.Q != Q")
        if mobius_distance(P.rep, Q.rep) <= tol:
            return FixedPointReport("equal")
        pts = [z0] if z0 is not None else _mobius_intersections(P.rep, Q.rep)
        if not pts:
            raise NotAFixedPoint("the circles do not meet")
        dsum = max(abs(P.deriv(z, 1) + Q.deriv(z, 1)) for z in pts)
        ld = lorentz_dot(to_lorentz(P.rep), to_lorentz(Q.rep))
        kind = "orthogonal" if dsum < tol and abs(ld) < 1e-9 else "unclassified"
        return FixedPointReport(kind, pts[0], float(dsum), float(ld))
    samples = Q.base_point + 0.05 * np.exp(2j * np.pi * np.arange(8) / 8)
    PQ = schwarz_product(P, Q)
    if np.max(np.abs(PQ(samples) - Q(samples))) > 1e-6:
        raise NotAFixedPoint("P.Q != Q")
    if np.max(np.abs(P(samples) - Q(samples))) <= 1e-6:
        return FixedPointReport("equal")
    if z0 is None:
        raise ValueError("an intersection point is required for jet inputs")
    dsum = abs(P.deriv(z0, 1) + Q.deriv(z0, 1))
    return FixedPointReport("orthogonal" if dsum < tol else "unclassified", z0, float(dsum))


def random_fixed_point_pair(rng, orthogonal=True):
    """Schwarz matrices ``(P, Q)`` with ``P.Q = Q``: orthogonal circles, or ``Q`` a rescaled copy of ``P``."""
    x = random_circle(rng)
    P = from_lorentz(x)
    if not orthogonal:
        return P, MobiusMap(P.m * (rng.normal() + 1j * rng.normal()))
    while True:
        v = rng.normal(size=4) * 2
        y = v - lorentz_dot(v, x.x) / lorentz_dot(x.x, x.x) * x.x
        q = lorentz_dot(y, y)
        if q > 0.05 * np.sum(y ** 2):
            return P, from_lorentz(CircleCoord(canonical_sign(y / np.sqrt(q))))


# ---------------------------------------------------------------------------
# powers

@dataclass
class PowerTable:
    base: object
    p: object
    powers: dict
    residuals: dict = field(default_factory=dict)


def powers(space, o, p, lo, hi):
    """``p^n`` relative to ``o`` for ``lo <= n <= hi``: ``p^(n+1) = p^n . p^(n-1)``."""
    table = {0: o, 1: p}
    for n in range(2, hi + 1):
        table[n] = space.product(table[n - 1], table[n - 2])
    for n in range(-1, lo - 1, -1):
        table[n] = space.product(table[n + 1], table[n + 2])
    return table


def power_table(space, o, p, n=5):
    """Powers with the homomorphism identities checked on ``|m|, |n| <= n``.

    Residual keys: ``homomorphism`` (p^m . p^n = p^(2m-n)), ``transvection``
    (p^(n+2) = p . (o . p^n)), ``kth_power``, ``time_reversal``, ``translation``.
    """
    big = 3 * n
    tab = powers(space, o, p, -big, big)
    d, mul = space.distance, space.product
    res = {}
    res["homomorphism"] = max(d(mul(tab[a], tab[b]), tab[2 * a - b])
                              for a in range(-n, n + 1) for b in range(-n, n + 1))
    res["transvection"] = max(d(tab[k + 2], mul(p, mul(o, tab[k]))) for k in range(-n, n + 1))
    kth = 0.0
    for k in range(-2, 3):
        q = powers(space, o, tab[k], -n, n)
        kth = max(kth, max(d(q[j], tab[k * j]) for j in range(-n, n + 1) if abs(k * j) <= big))
    res["kth_power"] = kth
    rev = powers(space, o, mul(o, p), -n, n)
    res["time_reversal"] = max(d(rev[j], tab[-j]) for j in range(-n, n + 1))
    trans = 0.0
    for k in range(-2, 3):
        q = powers(space, tab[k], tab[k + 1], -n, n)
        trans = max(trans, max(d(q[j], tab[j + k]) for j in range(-n, n + 1)))
    res["translation"] = trans
    return PowerTable(o, p, {k: tab[k] for k in range(-n, n + 1)}, res)


# ---------------------------------------------------------------------------
# canonical connection

@dataclass
class ConnectionReport:
    max_abs: float
    field: np.ndarray


def connection_field(S_t, S_tt, S_z, S_tz):
    """``nabla_{S_t} S_t = S_tt - S_t S_tz / S_z``."""
    return S_tt - S_t * S_tz / S_z


def connection_two_param(S_r, S_t, S_rt, S_z, S_rz, S_tz):
    """``nabla_{S_r} S_t = S_rt - (S_rz S_t + S_tz S_r) / (2 S_z)``."""
    return S_rt - (S_rz * S_t + S_tz * S_r) / (2 * S_z)


def connection_residual(F, use_exact=True):
    """Geodesic residual of a flow family; exact derivatives when available, fourth-order differences otherwise."""
    _, S_t, S_tt, S_z, S_tz = time_derivatives(F, use_exact)
    fld = connection_field(S_t, S_tt, S_z, S_tz)
    return ConnectionReport(float(np.max(np.abs(fld))), fld)
