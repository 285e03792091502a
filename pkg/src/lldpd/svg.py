"""Byte-deterministic SVG line charts, emitted by direct text generation.

No plotting dependency: identical input produces identical bytes, which the
simulation-output contracts rely on.  Fixed 800x600 viewport, fixed 11-color
palette, one polyline per series, optional horizontal reference line.
"""
from __future__ import annotations

__all__ = ["PALETTE", "line_chart"]

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
    "#393b79",
)

_W, _H = 800, 600
_ML, _MR, _MT, _MB = 70, 150, 40, 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def line_chart(series, xlabel: str, ylabel: str, ref_y=None, title: str = "") -> str:
    """Render labeled (x, y) series as an SVG document string.

    series: sequence of (label, xs, ys) with equal-length xs/ys.
    """
    series = list(series)
    if not series:
        raise ValueError("no series to plot")
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        raise ValueError("series contain no points")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if ref_y is not None:
        y_lo, y_hi = min(y_lo, ref_y), max(y_hi, ref_y)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else 0.5
    y_lo, y_hi = y_lo - pad, y_hi + pad

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(x: float) -> float:
        return _ML + pw * (x - x_lo) / (x_hi - x_lo)

    def sy(y: float) -> float:
        return _MT + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    if title:
        out.append(
            f'<text x="{_ML + pw / 2:.1f}" y="{_MT - 14}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        out.append(f'<line x1="{_fmt(px)}" y1="{_MT + ph}" x2="{_fmt(px)}" y2="{_MT + ph + 5}" stroke="#333333"/>')
        out.append(
            f'<text x="{_fmt(px)}" y="{_MT + ph + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tx:g}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        out.append(f'<line x1="{_ML - 5}" y1="{_fmt(py)}" x2="{_ML}" y2="{_fmt(py)}" stroke="#333333"/>')
        out.append(
            f'<text x="{_ML - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{ty:.3g}</text>'
        )
    out.append(
        f'<text x="{_ML + pw / 2:.1f}" y="{_H - 16}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{_MT + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 20 {_MT + ph / 2:.1f})">{ylabel}</text>'
    )
    if ref_y is not None:
        py = sy(ref_y)
        out.append(
            f'<line x1="{_ML}" y1="{_fmt(py)}" x2="{_ML + pw}" y2="{_fmt(py)}" '
            f'stroke="#666666" stroke-width="1" stroke-dasharray="6,4"/>'
        )
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 18 * i
        lx = _ML + pw + 12
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" font-size="12">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
