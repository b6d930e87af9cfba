"""Minimal SVG rendering of curve overlays.

Output is presentation only; nothing downstream reads these files back.
Curves are drawn in a model chart that keeps each geometry faithful near the
origin: plain polar coordinates for the flat plane, the conformal disk with
Euclidean radius tanh(r/2) for the hyperbolic plane, and the orthographic
projection with radius sin(r) for the hemisphere.
"""

from __future__ import annotations

import numpy as np

from .curve import RadialCurve

_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
_SIZE = 640
_FRAME_FRACTION = 0.44


def projected_xy(curve: RadialCurve) -> tuple[np.ndarray, np.ndarray]:
    """Chart coordinates of the curve for drawing."""
    if curve.sf.K == -1:
        radius = np.tanh(0.5 * curve.rho)
    elif curve.sf.K == 0:
        radius = curve.rho
    else:
        radius = np.sin(curve.rho)
    return radius * np.cos(curve.theta), radius * np.sin(curve.theta)


def _path(xs: np.ndarray, ys: np.ndarray, scale: float, color: str, width: float, dash: str = "") -> str:
    cx = cy = _SIZE / 2
    pts = [
        f"{cx + scale * x:.2f},{cy - scale * y:.2f}" for x, y in zip(xs, ys)
    ]
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<path d="M {pts[0]} L ' + " ".join(pts[1:]) + ' Z" '
        f'fill="none" stroke="{color}" stroke-width="{width}"{dash_attr}/>'
    )


def overlay_svg(curves: list[tuple[str, RadialCurve]]) -> str:
    """SVG document overlaying labelled curves, oldest first."""
    if not curves:
        raise ValueError("need at least one curve to draw")
    sf = curves[0][1].sf
    shapes = [projected_xy(c) for _, c in curves]
    extent = max(max(np.abs(x).max(), np.abs(y).max()) for x, y in shapes)
    if sf.K != 0:
        extent = max(extent, 1.0)  # show the chart boundary circle
    scale = _FRAME_FRACTION * _SIZE / extent

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SIZE}" height="{_SIZE}" viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
    ]
    if sf.K != 0:
        boundary = "ideal boundary" if sf.K == -1 else "equator"
        lines.append(
            f'<circle cx="{_SIZE / 2}" cy="{_SIZE / 2}" r="{scale:.2f}" fill="none" '
            f'stroke="#999999" stroke-width="1" stroke-dasharray="6,4">'
            f"<title>{boundary}</title></circle>"
        )
    lines.append(
        f'<circle cx="{_SIZE / 2}" cy="{_SIZE / 2}" r="2.5" fill="#333333"/>'
    )
    for i, (label, _) in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        xs, ys = shapes[i]
        lines.append(_path(xs, ys, scale, color, 2.0))
        lines.append(
            f'<text x="16" y="{28 + 22 * i}" font-family="sans-serif" '
            f'font-size="16" fill="{color}">{label}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def save_overlay(path, curves: list[tuple[str, RadialCurve]]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(overlay_svg(curves))


def pick_overlay_times(times: np.ndarray, count: int = 4) -> list[int]:
    """Indices of roughly evenly spaced recorded times, always first and last."""
    n = len(times)
    if n <= count:
        return list(range(n))
    idx = {0, n - 1}
    for j in range(1, count - 1):
        idx.add(round(j * (n - 1) / (count - 1)))
    return sorted(idx)
