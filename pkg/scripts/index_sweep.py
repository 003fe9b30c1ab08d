"""Rotation index of h(|z| = r) across radii, by zero/pole count and by winding number."""

import argparse
import csv
import sys

import numpy as np

from schwarzgeom import geodesics, suites
from schwarzgeom.cli import parse_h
from schwarzgeom.errors import BoundaryRoot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", help="map such as '5/(z^5-5*z)' (default: the gallery maps)")
    ap.add_argument("--log-r", default="-1:1.5:51", help="LO:HI:NUM grid of log r")
    ap.add_argument("--csv", help="write rows to this file instead of stdout")
    a = ap.parse_args()
    maps = {"h": parse_h(a.h)} if a.h else suites.GALLERY
    lo, hi, num = a.log_r.split(":")
    logs = np.linspace(float(lo), float(hi), int(num))
    fh = open(a.csv, "w", newline="") if a.csv else sys.stdout
    wr = csv.writer(fh)
    wr.writerow(["map", "log_r", "index", "zeros", "poles", "winding", "exceptional"])
    bad = 0
    for name, h in maps.items():
        ts = geodesics.exceptional_times(geodesics.HoloFamily(h))
        for s in logs:
            try:
                rep = geodesics.rotation_index(h, float(np.exp(s)))
            except BoundaryRoot:
                wr.writerow([name, "%.6g" % s, "", "", "", "", "boundary"])
                continue
            bad += rep.index != rep.winding
            near = any(abs(s - e) < (logs[1] - logs[0]) / 2 for e in ts) if len(logs) > 1 else False
            wr.writerow([name, "%.6g" % s, rep.index, rep.zeros, rep.poles, rep.winding, int(near)])
    if a.csv:
        fh.close()
    print(f"mismatches: {bad}", file=sys.stderr)
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
