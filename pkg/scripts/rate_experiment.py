"""Measured rotation and Kasner rates at stationary points of polynomial velocity fields."""

import argparse

import numpy as np

from schwarzgeom import dynamics

FIELDS = {
    "z": [0, 1],
    "-2z": [0, -2],
    "z^2+z^3": [0, 0, 1, 1],
    "z^2-z^3": [0, 0, 1, -1],
    "2z^2+z^3": [0, 0, 2, 1],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--num", type=int, default=201, help="time samples on [-1, 1]")
    ap.add_argument("--tol", type=float, default=1e-10)
    a = ap.parse_args()
    print(f"{'v(z)':<10s} {'x0':>8s} {'m':>2s} {'lambda':>9s} {'kind':<8s} {'measured':>12s} {'predicted':>12s} {'spread':>9s}")
    for name, coeffs in FIELDS.items():
        v = dynamics.VelocityField.poly(coeffs)
        for sp in dynamics.stationary_points(v):
            if sp.multiplicity > 2:
                continue
            x0 = float(np.real(sp.x0))
            seeds = x0 + np.linspace(-0.5, 0.5, 5)
            F = dynamics.integrate_reflection(v, seeds, t_span=(-1, 1), num=a.num, tol=a.tol)
            m = dynamics.rate_measurement(F, sp)
            print(f"{name:<10s} {x0:8.4f} {sp.multiplicity:2d} {sp.lam.real:9.4f} {m.kind:<8s} "
                  f"{m.rate:12.8f} {m.predicted:12.8f} {m.spread:9.1e}")


if __name__ == "__main__":
    main()
