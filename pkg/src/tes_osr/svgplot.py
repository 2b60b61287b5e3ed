"""Tiny SVG writer for loss curves and 2-D scatters. No plotting deps."""
from __future__ import annotations

from pathlib import Path

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 58, 16, 34, 44  # margins


def _finite_span(lo: float, hi: float) -> tuple[float, float]:
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("plot data contains NaN or Inf")
    if hi <= lo:
        pad = 1.0 if lo == 0 else abs(lo) * 0.1
        return lo - pad, lo + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14" '
            f'font-family="sans-serif">{title}</text>',
            f'<text x="{_W / 2}" y="{_H - 8}" text-anchor="middle" font-size="12" '
            f'font-family="sans-serif">{xlabel}</text>',
            f'<text x="14" y="{_H / 2}" text-anchor="middle" font-size="12" '
            f'font-family="sans-serif" transform="rotate(-90 14 {_H / 2})">{ylabel}</text>',
        ]
        self.x0, self.x1 = _ML, _W - _MR
        self.y0, self.y1 = _H - _MB, _MT

    def scales(self, xlo, xhi, ylo, yhi):
        self.xlo, self.xhi = _finite_span(xlo, xhi)
        self.ylo, self.yhi = _finite_span(ylo, yhi)
        self.parts.append(
            f'<rect x="{self.x0}" y="{self.y1}" width="{self.x1 - self.x0}" '
            f'height="{self.y0 - self.y1}" fill="none" stroke="#999"/>'
        )
        for frac in (0.0, 0.5, 1.0):
            xv = self.xlo + frac * (self.xhi - self.xlo)
            yv = self.ylo + frac * (self.yhi - self.ylo)
            xp = self.px(xv)
            yp = self.py(yv)
            self.parts.append(
                f'<text x="{xp:.1f}" y="{self.y0 + 16}" text-anchor="middle" '
                f'font-size="10" font-family="sans-serif">{xv:.4g}</text>'
            )
            self.parts.append(
                f'<text x="{self.x0 - 6}" y="{yp + 3:.1f}" text-anchor="end" '
                f'font-size="10" font-family="sans-serif">{yv:.4g}</text>'
            )

    def px(self, x: float) -> float:
        return self.x0 + (x - self.xlo) / (self.xhi - self.xlo) * (self.x1 - self.x0)

    def py(self, y: float) -> float:
        return self.y0 - (y - self.ylo) / (self.yhi - self.ylo) * (self.y0 - self.y1)

    def legend(self, names: list[str]):
        for i, name in enumerate(names):
            y = _MT + 14 + 14 * i
            c = _COLORS[i % len(_COLORS)]
            self.parts.append(
                f'<rect x="{self.x1 - 130}" y="{y - 8}" width="10" height="10" fill="{c}"/>'
            )
            self.parts.append(
                f'<text x="{self.x1 - 116}" y="{y + 1}" font-size="11" '
                f'font-family="sans-serif">{name}</text>'
            )

    def save(self, path):
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n")


def line_chart(
    path,
    x: np.ndarray,
    series: dict[str, np.ndarray],
    title: str,
    xlabel: str,
    ylabel: str,
) -> None:
    x = np.asarray(x, dtype=np.float64)
    if len(x) == 0 or not series:
        raise ValueError("line chart needs at least one point and one series")
    ys = np.concatenate([np.asarray(v, dtype=np.float64) for v in series.values()])
    canvas = _Canvas(title, xlabel, ylabel)
    canvas.scales(x.min(), x.max(), ys.min(), ys.max())
    for i, (name, y) in enumerate(series.items()):
        y = np.asarray(y, dtype=np.float64)
        if len(y) != len(x):
            raise ValueError(f"series {name!r} length does not match x")
        pts = " ".join(f"{canvas.px(a):.1f},{canvas.py(b):.1f}" for a, b in zip(x, y))
        color = _COLORS[i % len(_COLORS)]
        canvas.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    canvas.legend(list(series))
    canvas.save(path)


def scatter_chart(
    path,
    groups: dict[str, np.ndarray],
    title: str,
    xlabel: str = "f0",
    ylabel: str = "f1",
) -> None:
    """Each group is an (N x 2) array drawn in its own color."""
    if not groups:
        raise ValueError("scatter needs at least one group")
    allpts = np.concatenate([np.asarray(g, dtype=np.float64) for g in groups.values()])
    if allpts.ndim != 2 or allpts.shape[1] != 2:
        raise ValueError("scatter groups must be (N x 2)")
    canvas = _Canvas(title, xlabel, ylabel)
    canvas.scales(allpts[:, 0].min(), allpts[:, 0].max(), allpts[:, 1].min(), allpts[:, 1].max())
    for i, (name, pts) in enumerate(groups.items()):
        pts = np.asarray(pts, dtype=np.float64)
        color = _COLORS[i % len(_COLORS)]
        for a, b in pts:
            canvas.parts.append(
                f'<circle cx="{canvas.px(a):.1f}" cy="{canvas.py(b):.1f}" r="2" '
                f'fill="{color}" fill-opacity="0.6"/>'
            )
    canvas.legend(list(groups))
    canvas.save(path)
