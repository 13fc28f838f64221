"""Minimal deterministic SVG scatter plots."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

MAX_POINTS = 100_000
COLORS = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    stride: int | None = None  # None: pick one so at most MAX_POINTS are drawn

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x)
        self.y = np.asarray(self.y)
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same length")
        if self.stride is not None and self.stride < 1:
            raise ValueError("stride must be >= 1")

    def effective_stride(self) -> int:
        if self.stride is not None:
            return self.stride
        return max(1, math.ceil(len(self.x) / MAX_POINTS))

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        s = self.effective_stride()
        return self.x[::s], self.y[::s]


@dataclass
class PlotSpec:
    series: list[Series]
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    point_size: float = 1.0
    width: int = 800
    height: int = 500
    title: str = ""
    margin: dict = field(default_factory=lambda: {"left": 70, "right": 20, "top": 30, "bottom": 45})


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + step * 1e-9:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    text = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _tick_label(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:g}"


def _bounds(values: list[np.ndarray], fixed: tuple[float, float] | None) -> tuple[float, float]:
    if fixed is not None:
        return float(fixed[0]), float(fixed[1])
    lo = min(float(v.min()) for v in values)
    hi = max(float(v.max()) for v in values)
    if lo == hi:
        lo, hi = lo - 1, hi + 1
    return lo, hi


def render(spec: PlotSpec) -> str:
    if not spec.series or any(len(s.x) == 0 for s in spec.series):
        raise ValueError("every series needs at least one point")
    pts = [s.points() for s in spec.series]
    x0, x1 = _bounds([p[0] for p in pts], spec.x_range)
    y0, y1 = _bounds([p[1] for p in pts], spec.y_range)
    m = spec.margin
    pw = spec.width - m["left"] - m["right"]
    ph = spec.height - m["top"] - m["bottom"]

    def sx(x):
        return m["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return m["top"] + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]
    if spec.title:
        out.append(
            f'<text x="{spec.width / 2:.0f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{escape(spec.title)}</text>'
        )
    left, top, bottom, right = m["left"], m["top"], m["top"] + ph, m["left"] + pw
    out.append('<g stroke="#000000" stroke-width="1" fill="none">')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}"/>')
    out.append("</g>")
    out.append('<g font-family="sans-serif" font-size="11" fill="#000000">')
    for t in nice_ticks(x0, x1):
        x = sx(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{bottom}" x2="{_fmt(x)}" y2="{bottom + 5}" stroke="#000000"/>')
        out.append(f'<text x="{_fmt(x)}" y="{bottom + 18}" text-anchor="middle">{_tick_label(t)}</text>')
    for t in nice_ticks(y0, y1):
        y = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" stroke="#000000"/>')
        out.append(f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end">{_tick_label(t)}</text>')
    out.append("</g>")

    r = _fmt(spec.point_size)
    for idx, (s, (xs, ys)) in enumerate(zip(spec.series, pts)):
        color = COLORS[idx % len(COLORS)]
        keep = (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
        out.append(f'<g fill="{color}" stroke="none"><title>{escape(s.label)}</title>')
        for x, y in zip(xs[keep].tolist(), ys[keep].tolist()):
            out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="{r}"/>')
        out.append("</g>")
    if len(spec.series) > 1:
        for idx, s in enumerate(spec.series):
            y = top + 14 + 14 * idx
            color = COLORS[idx % len(COLORS)]
            out.append(f'<circle cx="{right - 120}" cy="{y - 4}" r="4" fill="{color}"/>')
            out.append(
                f'<text x="{right - 110}" y="{y}" font-family="sans-serif" font-size="11">'
                f"{escape(s.label)}</text>"
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(spec: PlotSpec, path: Path | str) -> None:
    Path(path).write_text(render(spec), newline="")


def scatter(x: Sequence[float], y: Sequence[float], path: Path | str, label: str = "", **kwargs) -> None:
    write_svg(PlotSpec([Series(label, np.asarray(x), np.asarray(y))], **kwargs), path)
