"""Static SVG charts: quantile fans and per-path scatters.

Hand-rolled SVG so identical inputs give byte-identical files (plotting
libraries embed ids and metadata that break that).
"""

from __future__ import annotations

import numpy as np

from .engine import QuantileFan

__all__ = ["emit_fan_chart", "emit_scatter_chart"]

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 64, 16, 16, 44  # margins


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = np.linspace(lo, hi, n)
    return [float(v) for v in raw]


def _step_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    # integer tick marks for the step axis
    ticks = sorted({int(round(v)) for v in np.linspace(lo, hi, n)})
    return [float(t) for t in ticks if lo <= t <= hi] or [lo]


def _scale(lo: float, hi: float, a: float, b: float):
    span = hi - lo
    if span <= 0:
        span = 1.0
        lo -= 0.5
    def f(v):
        return a + (v - lo) / span * (b - a)
    return f, lo, lo + span


def _axes(parts: list[str], xs, ys, x_label: str, y_label: str, fx, fy) -> None:
    parts.append(
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>'
    )
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>')
    for v in xs:
        x = _fmt(fx(v))
        parts.append(f'<line x1="{x}" y1="{_H - _MB}" x2="{x}" y2="{_H - _MB + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{x}" y="{_H - _MB + 16}" font-size="10" text-anchor="middle">{v:g}</text>'
        )
    for v in ys:
        y = _fmt(fy(v))
        parts.append(f'<line x1="{_ML - 4}" y1="{y}" x2="{_ML}" y2="{y}" stroke="black"/>')
        parts.append(
            f'<text x="{_ML - 6}" y="{y}" font-size="10" text-anchor="end" dominant-baseline="middle">{v:.4g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) // 2}" y="{_H - 8}" font-size="11" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="14" y="{(_MT + _H - _MB) // 2}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 14 {(_MT + _H - _MB) // 2})">{y_label}</text>'
    )


def emit_fan_chart(fan: QuantileFan, path, steps=None,
                   x_label: str = "time step", y_label: str = "value (currency)") -> None:
    """Write an SVG fan: shaded band between the lowest and highest
    configured quantiles, all quantile lines, and the mean line."""
    q = np.asarray(fan.quantiles, dtype=np.float64)
    mean = np.asarray(fan.mean, dtype=np.float64)
    if q.size == 0 or mean.size == 0:
        raise ValueError("empty quantile table")
    n_t = mean.shape[0]
    steps = np.arange(n_t) if steps is None else np.asarray(steps)
    order = np.argsort(fan.probs)
    lo_row, hi_row = q[order[0]], q[order[-1]]
    y_min = float(min(lo_row.min(), mean.min()))
    y_max = float(max(hi_row.max(), mean.max()))
    pad = 0.05 * (y_max - y_min if y_max > y_min else max(abs(y_max), 1.0))
    fx, x_lo, x_hi = _scale(float(steps[0]), float(steps[-1]), _ML, _W - _MR)
    fy, y_lo, y_hi = _scale(y_min - pad, y_max + pad, _H - _MB, _MT)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    band = (
        " ".join(f"{_fmt(fx(t))},{_fmt(fy(v))}" for t, v in zip(steps, hi_row))
        + " "
        + " ".join(f"{_fmt(fx(t))},{_fmt(fy(v))}" for t, v in zip(steps[::-1], lo_row[::-1]))
    )
    parts.append(f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>')
    for row in q[order]:
        pts = " ".join(f"{_fmt(fx(t))},{_fmt(fy(v))}" for t, v in zip(steps, row))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#3182bd" stroke-width="1"/>')
    pts = " ".join(f"{_fmt(fx(t))},{_fmt(fy(v))}" for t, v in zip(steps, mean))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    _axes(parts, _step_ticks(x_lo, x_hi), _ticks(y_lo, y_hi), x_label, y_label, fx, fy)
    parts.append("</svg>")
    _write(path, parts)


def emit_scatter_chart(x: np.ndarray, series, path,
                       x_label: str = "asset price", y_label: str = "value (currency)") -> None:
    """Write an SVG scatter. `series` is a list of (label, y, marker) with
    marker 'circle' or 'cross'."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0 or not series:
        raise ValueError("empty scatter input")
    ys = np.concatenate([np.asarray(y, dtype=np.float64) for _, y, _ in series])
    fx, x_lo, x_hi = _scale(float(x.min()), float(x.max()), _ML, _W - _MR)
    pad = 0.05 * (float(ys.max() - ys.min()) or max(abs(float(ys.max())), 1.0))
    fy, y_lo, y_hi = _scale(float(ys.min()) - pad, float(ys.max()) + pad, _H - _MB, _MT)

    colors = ["#3182bd", "#e6550d", "#31a354", "#756bb1"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    for s_idx, (label, y, marker) in enumerate(series):
        color = colors[s_idx % len(colors)]
        yv = np.asarray(y, dtype=np.float64)
        for xi, yi in zip(x, yv):
            cx, cy = _fmt(fx(xi)), _fmt(fy(yi))
            if marker == "cross":
                parts.append(
                    f'<path d="M {float(cx) - 2.5:.2f} {float(cy) - 2.5:.2f} l 5 5 '
                    f'm 0 -5 l -5 5" stroke="{color}" stroke-width="1" fill="none"/>'
                )
            else:
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="2.2" fill="none" stroke="{color}"/>')
        parts.append(
            f'<text x="{_W - _MR - 4}" y="{_MT + 14 + 14 * s_idx}" font-size="11" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )
    _axes(parts, _ticks(x_lo, x_hi), _ticks(y_lo, y_hi), x_label, y_label, fx, fy)
    parts.append("</svg>")
    _write(path, parts)


def _write(path, parts: list[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
