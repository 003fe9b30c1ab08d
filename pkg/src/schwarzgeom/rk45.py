"""Dormand-Prince 5(4) integrator for complex array states.

Used instead of ``scipy.integrate.solve_ivp`` because the flows need max-norm
error control over batched complex jets and output times hit exactly (the
canonical parametrization samples both ``t`` and ``-t/2``).
"""

import numpy as np

from .errors import StepFailure

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# difference between the 5th and embedded 4th order weights
E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY, MIN_FACTOR, MAX_FACTOR = 0.9, 0.2, 5.0


def _step(f, t, y, h, k0):
    k = [k0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(A[i], k) if a != 0)
        k.append(f(t + C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(B5, k) if b != 0)
    err = h * sum(e * kj for e, kj in zip(E, k) if e != 0)
    return y_new, err, k[6]


def integrate(f, t0, y0, t_out, tol=1e-10, max_step=None, min_step=1e-14, check=None):
    """Integrate ``y' = f(t, y)`` from ``t0`` and return ``y`` at each of ``t_out``.

    ``t_out`` must be monotone in one direction away from ``t0``.  ``check``
    is called as ``check(t, y)`` after every accepted step and may raise.
    """
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t_out),) + y.shape, dtype=complex)
    if len(t_out) == 0:
        return out
    direction = 1.0 if t_out[-1] >= t0 else -1.0
    if np.any(direction * np.diff(np.r_[t0, t_out]) < 0):
        raise ValueError("output times must move monotonically away from t0")
    span = abs(t_out[-1] - t0)
    if max_step is None:
        max_step = max(1e-2 * span, 1e-12)
    t = float(t0)
    k0 = f(t, y)
    h = min(max_step, 1e-3 * max(span, 1e-12))
    idx = 0
    while idx < len(t_out) and t_out[idx] == t:
        out[idx] = y
        idx += 1
    while idx < len(t_out):
        target = t_out[idx]
        dist = abs(target - t)
        landing = h >= dist * (1 - 1e-12)
        step = dist if landing else h
        y_new, err, k_new = _step(f, t, y, direction * step, k0)
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        ratio = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if not np.isfinite(ratio):
            ratio = np.inf
        if ratio <= 1.0:
            t = target if landing else t + direction * step
            y, k0 = y_new, k_new
            if check is not None:
                check(t, y)
            if landing:
                out[idx] = y
                idx += 1
            factor = MAX_FACTOR if ratio == 0 else min(MAX_FACTOR, SAFETY * ratio ** -0.2)
            # a short landing step says nothing about the admissible step size
            h = min(max_step, max(h, step * factor) if landing else step * factor)
        else:
            h = step * (max(MIN_FACTOR, SAFETY * ratio ** -0.2) if np.isfinite(ratio) else MIN_FACTOR)
            if h < min_step * max(1.0, abs(t)):
                raise StepFailure(f"step size underflow at t = {t:.6g}")
    return out
