"""Curve families to SVG polylines and CSV tables."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import IoFailure, Validation

PAD = 0.05


@dataclass
class CurveSet:
    """Sampled curves ``w[i, j]`` at times ``t[i]`` and curve parameters ``param[j]``.

    ``w_x``, ``w_xx`` (derivatives along the curve) enable the optional
    curvature and clinant columns.  ``closed`` marks periodic parameters.
    """

    t: np.ndarray
    param: np.ndarray
    w: np.ndarray
    param_name: str = "x"
    w_x: np.ndarray = None
    w_xx: np.ndarray = None
    closed: bool = False
    markers: list = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.param = np.asarray(self.param, dtype=float)
        self.w = np.asarray(self.w, dtype=complex)
        if self.w.shape != (len(self.t), len(self.param)):
            raise Validation(f"sample array has shape {self.w.shape}, expected {(len(self.t), len(self.param))}")

    def kappa(self):
        if self.w_x is None or self.w_xx is None:
            raise Validation("curvature needs first and second parameter derivatives")
        wx = np.asarray(self.w_x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.conj(wx) * np.asarray(self.w_xx)).imag / np.abs(wx) ** 3

    def clinant_angle(self):
        """``arg S'`` along the curve, from ``S'(w) w_x = conj(w_x)``."""
        if self.w_x is None:
            raise Validation("clinant angle needs the parameter derivative")
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.angle(np.conj(self.w_x) / self.w_x)


def curves_from_flow(F, markers=()):
    return CurveSet(F.t, np.asarray(F.x).real, F.gamma, "x", F.gamma_x, F.gamma_xx, markers=list(markers))


def curves_from_holo(F, t, theta):
    samples = [F.evaluate(s, theta) for s in t]
    return CurveSet(t, theta, [s.w for s in samples], "theta", [s.w_x for s in samples],
                    [s.w_xx for s in samples], closed=not F.planar)


# ---------------------------------------------------------------------------
# CSV

EXTRA_COLUMNS = ("kappa", "clinant_angle")


def _fmt(v):
    return "%.17g" % v


def csv_text(curves, extras=()):
    """Rows ``t, param, re_w, im_w[, extras]`` in t-major order."""
    bad = [e for e in extras if e not in EXTRA_COLUMNS]
    if bad:
        raise Validation(f"unknown CSV columns {bad}")
    cols = [getattr(curves, e)() for e in extras]
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["t", curves.param_name, "re_w", "im_w", *extras])
    for i, t in enumerate(curves.t):
        for j, p in enumerate(curves.param):
            w = curves.w[i, j]
            wr.writerow([_fmt(t), _fmt(p), _fmt(w.real), _fmt(w.imag), *(_fmt(c[i, j]) for c in cols)])
    return buf.getvalue()


def export_csv(curves, path, extras=()):
    text = csv_text(curves, extras)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# SVG

@dataclass(frozen=True)
class RenderStyle:
    """``viewport`` is ``None`` (auto) or ``(xmin, xmax, ymin, ymax)``."""

    stroke_width: float = 1.0
    ramp: tuple = ("#1b4f9c", "#c0392b")
    viewport: tuple = None
    width: int = 600
    marker_radius: float = 3.0
    marker_color: str = "#000000"
    background: str = "#ffffff"

    def __post_init__(self):
        if self.viewport is not None:
            x0, x1, y0, y1 = map(float, self.viewport)
            if not (x1 > x0 and y1 > y0):
                raise Validation(f"empty viewport {self.viewport}")
        if self.width <= 0 or self.stroke_width <= 0:
            raise Validation("width and stroke width must be positive")
        for c in self.ramp:
            _hex(c)


def _hex(c):
    if not (isinstance(c, str) and len(c) == 7 and c[0] == "#"):
        raise Validation(f"colour {c!r} is not #rrggbb")
    try:
        return np.array([int(c[k:k + 2], 16) for k in (1, 3, 5)], dtype=float)
    except ValueError as exc:
        raise Validation(f"colour {c!r} is not #rrggbb") from exc


def ramp_colors(ramp, n):
    a, b = _hex(ramp[0]), _hex(ramp[-1])
    s = np.linspace(0, 1, n) if n > 1 else np.zeros(1)
    return ["#%02x%02x%02x" % tuple(int(round(v)) for v in a + (b - a) * u) for u in s]


def auto_viewport(points):
    """Bounding box of the finite samples, padded by 5% on each side."""
    z = np.asarray(points, dtype=complex).ravel()
    z = z[np.isfinite(z)]
    if z.size == 0:
        raise Validation("no finite samples to frame")
    x0, x1, y0, y1 = z.real.min(), z.real.max(), z.imag.min(), z.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-9)
    dx, dy = max(x1 - x0, 1e-3 * span), max(y1 - y0, 1e-3 * span)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    return (cx - dx * (0.5 + PAD), cx + dx * (0.5 + PAD), cy - dy * (0.5 + PAD), cy + dy * (0.5 + PAD))


def _path_data(z, inside, to_px, closed):
    parts, run = [], []
    for k in range(len(z)):
        if inside[k]:
            run.append(k)
        elif run:
            parts.append(run)
            run = []
    if run:
        parts.append(run)
    whole = len(parts) == 1 and len(parts[0]) == len(z)
    if closed and len(parts) > 1 and parts[0][0] == 0 and parts[-1][-1] == len(z) - 1:
        # the periodic parameter wraps: join the last run onto the first
        parts = [parts[-1] + parts[0]] + parts[1:-1]
    out = []
    for run in parts:
        if len(run) < 2:
            continue
        X, Y = to_px(z[run])
        cmd = "M%.3f %.3f" % (X[0], Y[0]) + "".join(" L%.3f %.3f" % (x, y) for x, y in zip(X[1:], Y[1:]))
        out.append(cmd + (" Z" if closed and whole else ""))
    return " ".join(out)


def svg_text(curves, style=RenderStyle()):
    vp = style.viewport if style.viewport is not None else auto_viewport(curves.w)
    x0, x1, y0, y1 = map(float, vp)
    W = style.width
    H = max(1, int(round(W * (y1 - y0) / (x1 - x0))))

    def to_px(z):
        return (z.real - x0) / (x1 - x0) * W, (y1 - z.imag) / (y1 - y0) * H

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="{style.background}"/>',
    ]
    colors = ramp_colors(style.ramp, len(curves.t))
    for i, t in enumerate(curves.t):
        z = curves.w[i]
        inside = np.isfinite(z) & (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)
        d = _path_data(z, inside, to_px, curves.closed)
        lines.append(f'<path data-t="{_fmt(t)}" d="{d}" fill="none" stroke="{colors[i]}" '
                     f'stroke-width="{style.stroke_width:g}"/>')
    for m in curves.markers:
        X, Y = to_px(np.asarray([complex(m)]))
        lines.append(f'<circle cx="{X[0]:.3f}" cy="{Y[0]:.3f}" r="{style.marker_radius:g}" fill="{style.marker_color}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def export_svg(curves, path, style=RenderStyle()):
    text = svg_text(curves, style)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path
