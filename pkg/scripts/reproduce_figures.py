"""Render every bundled figure scenario to SVG and CSV."""

import argparse
import time

from schwarzgeom.scenario import Overrides, bundled, load_scenario, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("names", nargs="*", help="scenario names (default: all figure scenarios)")
    a = ap.parse_args()
    names = a.names or [n for n in bundled() if load_scenario(n).kind != "check-suite"]
    for name in names:
        t0 = time.perf_counter()
        res = run_scenario(name, Overrides(out_dir=a.out_dir))
        print(f"{name:<20s} {time.perf_counter() - t0:6.2f} s  " + "  ".join(res.artifacts))


if __name__ == "__main__":
    main()
