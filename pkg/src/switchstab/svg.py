"""Dependency-free SVG 1.1 line plots."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = 60


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def line_plot(
    x,
    y,
    title: str,
    xlabel: str,
    ylabel: str,
    hlines: dict[str, float] | None = None,
    equal_aspect: bool = False,
) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xlo, xhi = float(x.min()), float(x.max())
    ylo, yhi = float(y.min()), float(y.max())
    for v in (hlines or {}).values():
        ylo, yhi = min(ylo, v), max(yhi, v)
    if equal_aspect:
        half = 0.5 * max(xhi - xlo, yhi - ylo)
        xc, yc = 0.5 * (xlo + xhi), 0.5 * (ylo + yhi)
        xlo, xhi, ylo, yhi = xc - half, xc + half, yc - half, yc + half
    pad = 0.05 * ((yhi - ylo) or 1.0)
    ylo, yhi = ylo - pad, yhi + pad
    if xhi == xlo:
        xhi = xlo + 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return HEIGHT - MARGIN - (v - ylo) / (yhi - ylo) * ph

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(xlo, xhi):
        parts.append(
            f'<text x="{_fmt(sx(v))}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{v:.3g}</text>'
        )
    for v in _ticks(ylo, yhi):
        parts.append(f'<text x="{MARGIN - 6}" y="{_fmt(sy(v) + 4)}" text-anchor="end">{v:.3g}</text>')
    parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2})">'
        f"{escape(ylabel)}</text>"
    )
    for name, v in (hlines or {}).items():
        parts.append(
            f'<line x1="{MARGIN}" y1="{_fmt(sy(v))}" x2="{WIDTH - MARGIN}" y2="{_fmt(sy(v))}" '
            f'stroke="gray" stroke-dasharray="4 3"/>'
        )
        parts.append(f'<text x="{WIDTH - MARGIN - 4}" y="{_fmt(sy(v) - 4)}" text-anchor="end" fill="gray">'
                     f"{escape(name)}</text>")
    pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def level_set_plot(angles, values, title: str) -> str:
    """The closed curve ``{x : V(x) = 1}``, i.e. radius ``1 / W(theta)``, over the full circle."""
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    full = np.r_[angles, angles + np.pi, angles[:1] + 2 * np.pi]
    radius = 1.0 / np.r_[values, values, values[:1]]
    return line_plot(radius * np.cos(full), radius * np.sin(full), title, "x1", "x2", equal_aspect=True)
