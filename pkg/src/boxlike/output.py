"""CSV, SVG and PGM/PPM writers with no dependencies beyond numpy."""

from __future__ import annotations

import csv
import io
import math
from enum import Enum
from xml.sax.saxutils import escape

import numpy as np

SIG_DIGITS = 12
PALETTE = ("#1f4e79", "#c0504d", "#4f8f3a", "#7f3f98", "#d08a1d", "#333333")


def fmt(x) -> str:
    """Cell formatting: floats at 12 significant digits, enums by value."""
    if isinstance(x, Enum):
        return str(x.value)
    if isinstance(x, (bool, np.bool_)) or x is None:
        return "" if x is None else str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def svg_plot(series, title: str = "", xlabel: str = "", ylabel: str = "", width: int = 640, height: int = 420) -> str:
    """Self-contained SVG line plot.

    Parameters
    ----------
    series : sequence of (label, xs, ys)
    """
    pad_l, pad_r, pad_t, pad_b = 64, 20, 36, 48
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series])
    finite = np.isfinite(xs_all) & np.isfinite(ys_all)
    x0, x1 = float(xs_all[finite].min()), float(xs_all[finite].max())
    y0, y1 = float(ys_all[finite].min()), float(ys_all[finite].max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y):
        return pad_t + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
    ]
    for frac in np.linspace(0, 1, 5):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        out.append(f'<text x="{px(xv):.1f}" y="{pad_t + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    if title:
        out.append(f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{pad_l + pw / 2}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{pad_t + ph / 2}" text-anchor="middle" '
            f'transform="rotate(-90 14 {pad_t + ph / 2})">{escape(ylabel)}</text>'
        )
    for j, (label, xs, ys) in enumerate(series):
        color = PALETTE[j % len(PALETTE)]
        pts = [(px(x), py(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        if not pts:
            continue
        d = "M" + " L".join(f"{a:.2f},{b:.2f}" for a, b in pts)
        out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(
            f'<text x="{pad_l + 8}" y="{pad_t + 16 + 14 * j}" fill="{color}">{escape(str(label))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def pgm_bytes(image: np.ndarray) -> bytes:
    """Binary ``P5`` greymap, brightest pixel at 255, row 0 at the top."""
    img = np.asarray(image, float)
    top = img.max()
    scaled = np.zeros_like(img) if top <= 0 else img / top
    data = np.clip(np.rint(255.0 * np.sqrt(scaled)), 0, 255).astype(np.uint8)
    data = data[::-1]  # y grows upwards in the unit square
    h, w = data.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + data.tobytes()
