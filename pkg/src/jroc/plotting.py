"""Hand-assembled SVG 1.1 charts: cost evolution over the lattice and JROC plots.

Output is a pure function of the inputs. Coordinates are written with two
decimals and the data-to-canvas transform is recorded in a ``<metadata>``
element so readers can map drawn coordinates back to data.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .analysis import Hull, best_point_for_alpha, isometric_slope
from .costs import CostContext, CostPoint

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2")
GLYPHS = ("circle", "square", "triangle", "diamond", "cross", "plus", "star")
SERIES_COLORS = {"MC": "#d62728", "TC": "#1f77b4", "JC": "#2ca02c"}


def fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


@dataclass(frozen=True)
class Viewport:
    """Affine map from data space to canvas space (y axis flipped)."""

    x0: float
    x1: float
    y0: float
    y1: float
    left: float
    top: float
    width: float
    height: float

    def to_canvas(self, x: float, y: float) -> tuple[float, float]:
        return (self.left + (x - self.x0) / (self.x1 - self.x0) * self.width,
                self.top + (self.y1 - y) / (self.y1 - self.y0) * self.height)

    def to_data(self, px: float, py: float) -> tuple[float, float]:
        return (self.x0 + (px - self.left) / self.width * (self.x1 - self.x0),
                self.y1 - (py - self.top) / self.height * (self.y1 - self.y0))

    def metadata(self) -> str:
        keys = ("x0", "x1", "y0", "y1", "left", "top", "width", "height")
        return ";".join(f"{k}={getattr(self, k)!r}" for k in keys)

    @classmethod
    def from_metadata(cls, text: str) -> Viewport:
        kv = dict(item.split("=", 1) for item in text.strip().split(";"))
        return cls(**{k: float(v) for k, v in kv.items()})


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    out = []
    v = first
    while v <= hi + step * 1e-9:
        out.append(round(v, 12))
        v += step
    return out


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo <= 0:
        pad = abs(lo) * 0.1 or 0.5
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Doc:
    def __init__(self, width: float, height: float, title: str):
        self.width, self.height = width, height
        self.parts: list[str] = []
        self.title = title

    def add(self, s: str) -> None:
        self.parts.append(s)

    def render(self, vp: Viewport) -> str:
        head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{fmt(self.width)}" height="{fmt(self.height)}" '
                f'viewBox="0 0 {fmt(self.width)} {fmt(self.height)}">\n'
                f'<title>{escape(self.title)}</title>\n'
                f'<metadata id="viewport">{vp.metadata()}</metadata>\n'
                f'<rect x="0" y="0" width="{fmt(self.width)}" height="{fmt(self.height)}" fill="white"/>\n')
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _axes(doc: _Doc, vp: Viewport, xlabel: str, ylabel: str, xticks=True) -> None:
    x_lo, y_lo = vp.left, vp.top + vp.height
    doc.add(f'<g id="axes" stroke="black" stroke-width="1" fill="none">'
            f'<rect x="{fmt(vp.left)}" y="{fmt(vp.top)}" width="{fmt(vp.width)}" height="{fmt(vp.height)}"/></g>')
    ticks = ['<g id="ticks" font-family="sans-serif" font-size="10" fill="black">']
    if xticks:
        for t in nice_ticks(vp.x0, vp.x1):
            px, _ = vp.to_canvas(t, vp.y0)
            ticks.append(f'<line x1="{fmt(px)}" y1="{fmt(y_lo)}" x2="{fmt(px)}" y2="{fmt(y_lo + 4)}" stroke="black"/>'
                         f'<text x="{fmt(px)}" y="{fmt(y_lo + 15)}" text-anchor="middle">{t:g}</text>')
    for t in nice_ticks(vp.y0, vp.y1):
        _, py = vp.to_canvas(vp.x0, t)
        ticks.append(f'<line x1="{fmt(x_lo - 4)}" y1="{fmt(py)}" x2="{fmt(x_lo)}" y2="{fmt(py)}" stroke="black"/>'
                     f'<text x="{fmt(x_lo - 6)}" y="{fmt(py + 3)}" text-anchor="end">{t:g}</text>')
    ticks.append("</g>")
    doc.add("".join(ticks))
    doc.add(f'<text x="{fmt(vp.left + vp.width / 2)}" y="{fmt(doc.height - 8)}" font-family="sans-serif" '
            f'font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    cy = vp.top + vp.height / 2
    doc.add(f'<text x="14" y="{fmt(cy)}" font-family="sans-serif" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 14 {fmt(cy)})">{escape(ylabel)}</text>')


def _legend(doc: _Doc, x: float, y: float, entries: Sequence[tuple[str, str, str]]) -> None:
    out = ['<g id="legend" font-family="sans-serif" font-size="11">']
    for i, (label, color, glyph) in enumerate(entries):
        yy = y + 14 * i
        out.append(_glyph(glyph, x + 5, yy - 4, color) if glyph else
                   f'<line x1="{fmt(x)}" y1="{fmt(yy - 4)}" x2="{fmt(x + 12)}" y2="{fmt(yy - 4)}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{fmt(x + 16)}" y="{fmt(yy)}">{escape(label)}</text>')
    out.append("</g>")
    doc.add("".join(out))


def _glyph(kind: str, x: float, y: float, color: str, r: float = 3.5) -> str:
    if kind == "circle":
        return f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="{fmt(r)}" fill="none" stroke="{color}"/>'
    if kind == "square":
        return f'<rect x="{fmt(x - r)}" y="{fmt(y - r)}" width="{fmt(2 * r)}" height="{fmt(2 * r)}" fill="none" stroke="{color}"/>'
    if kind == "triangle":
        pts = [(x, y - r), (x - r, y + r), (x + r, y + r)]
    elif kind == "diamond":
        pts = [(x, y - r), (x + r, y), (x, y + r), (x - r, y)]
    elif kind == "star":
        pts = []
        for i in range(10):
            ang = math.pi / 2 + i * math.pi / 5
            rr = r * 1.3 if i % 2 == 0 else r * 0.55
            pts.append((x + rr * math.cos(ang), y - rr * math.sin(ang)))
    elif kind == "cross":
        return (f'<path d="M{fmt(x - r)},{fmt(y - r)}L{fmt(x + r)},{fmt(y + r)}'
                f'M{fmt(x - r)},{fmt(y + r)}L{fmt(x + r)},{fmt(y - r)}" stroke="{color}"/>')
    else:  # plus
        return (f'<path d="M{fmt(x - r)},{fmt(y)}L{fmt(x + r)},{fmt(y)}'
                f'M{fmt(x)},{fmt(y - r)}L{fmt(x)},{fmt(y + r)}" stroke="{color}"/>')
    return f'<polygon points="{" ".join(f"{fmt(a)},{fmt(b)}" for a, b in pts)}" fill="none" stroke="{color}"/>'


def render_cost_evolution(points: Sequence[CostPoint], ctx: CostContext | float,
                          labels: Sequence[str] | None = None,
                          title: str = "MC, TC and JC per feature configuration",
                          width: float = 720, height: float = 420) -> str:
    """Three polylines (MC, TC, JC) over configurations in lattice order.

    ``ctx`` supplies the alpha for the JC series; a bare float is taken as alpha.
    Tick labels default to ``ALL`` / removed-attribute lists such as ``-1-3``.
    """
    alpha = ctx.alpha if isinstance(ctx, CostContext) else float(ctx)
    if not points:
        raise ValueError("no points to plot")
    if labels is None:
        labels = [p.config.label() for p in points]
    if len(labels) != len(points):
        raise ValueError(f"{len(labels)} labels for {len(points)} points")
    series = {
        "MC": [p.mc for p in points],
        "TC": [p.tc for p in points],
        "JC": [p.jc(alpha) for p in points],
    }
    vals = [v for s in series.values() for v in s]
    y0, y1 = _padded(min(0.0, min(vals)), max(vals))
    n = len(points)
    x0, x1 = (-0.5, 0.5) if n == 1 else (-0.5, n - 0.5)
    vp = Viewport(x0, x1, y0, y1, 60.0, 30.0, width - 160.0, height - 110.0)
    doc = _Doc(width, height, title)
    _axes(doc, vp, "feature configuration", "cost", xticks=False)

    ticks = ['<g id="config-ticks" font-family="sans-serif" font-size="8" fill="black">']
    base = vp.top + vp.height
    for i, lab in enumerate(labels):
        px, _ = vp.to_canvas(i, y0)
        ticks.append(f'<line x1="{fmt(px)}" y1="{fmt(base)}" x2="{fmt(px)}" y2="{fmt(base + 3)}" stroke="black"/>'
                     f'<text x="{fmt(px)}" y="{fmt(base + 8)}" text-anchor="end" '
                     f'transform="rotate(-60 {fmt(px)} {fmt(base + 8)})">{escape(lab)}</text>')
    ticks.append("</g>")
    doc.add("".join(ticks))

    for name, ys in series.items():
        coords = [vp.to_canvas(i, v) for i, v in enumerate(ys)]
        color = SERIES_COLORS[name]
        if len(coords) > 1:
            doc.add(f'<polyline id="series-{name}" fill="none" stroke="{color}" stroke-width="1.5" points="'
                    + " ".join(f"{fmt(a)},{fmt(b)}" for a, b in coords) + '"/>')
        else:
            a, b = coords[0]
            doc.add(f'<g id="series-{name}"><circle cx="{fmt(a)}" cy="{fmt(b)}" r="2.5" fill="{color}"/></g>')
    _legend(doc, vp.left + vp.width + 12, vp.top + 12,
            [(f"{k}" if k != "JC" else f"JC (alpha={alpha:g})", c, "") for k, c in SERIES_COLORS.items()])
    return doc.render(vp)


def _clip_line(vp: Viewport, x: float, y: float, slope: float):
    """Segment of the line through (x, y) with ``slope`` inside the data window."""
    if math.isinf(slope):
        return (x, vp.y0), (x, vp.y1)
    cands = []
    for xx in (vp.x0, vp.x1):
        yy = y + slope * (xx - x)
        if vp.y0 - 1e-12 <= yy <= vp.y1 + 1e-12:
            cands.append((xx, yy))
    if slope != 0:
        for yy in (vp.y0, vp.y1):
            xx = x + (yy - y) / slope
            if vp.x0 - 1e-12 <= xx <= vp.x1 + 1e-12:
                cands.append((xx, yy))
    if len(cands) < 2:
        return None
    cands.sort()
    return cands[0], cands[-1]


def render_jroc(point_sets: Mapping[str, Sequence[CostPoint]], hulls: Mapping[str, Hull] | None = None,
                isometric_alphas: Sequence[float] = (), title: str = "JROC plot",
                width: float = 640, height: float = 480) -> str:
    """Scatter of (TC, MC) per model with optional hulls and isometrics.

    Each isometric passes through the point of minimum joint cost over all
    plotted points (its leftmost intercept) with slope -(1-alpha)/alpha.
    """
    models = list(point_sets)
    if not models or not any(point_sets[m] for m in models):
        raise ValueError("no points to plot")
    if any(not 0.0 <= a <= 1.0 for a in isometric_alphas):
        raise ValueError("isometric alphas must lie in [0, 1]")
    allpts = [p for m in models for p in point_sets[m]]
    x0, x1 = _padded(min(0.0, min(p.tc for p in allpts)), max(p.tc for p in allpts))
    y0, y1 = _padded(min(0.0, min(p.mc for p in allpts)), max(p.mc for p in allpts))
    vp = Viewport(x0, x1, y0, y1, 60.0, 30.0, width - 200.0, height - 80.0)
    doc = _Doc(width, height, title)
    _axes(doc, vp, "TC", "MC")

    legend = []
    for i, m in enumerate(models):
        color, glyph = PALETTE[i % len(PALETTE)], GLYPHS[i % len(GLYPHS)]
        marks = [_glyph(glyph, *vp.to_canvas(p.tc, p.mc), color) for p in point_sets[m]]
        doc.add(f'<g id="points-{i}" class="model">' + "".join(marks) + "</g>")
        legend.append((m, color, glyph))
        if hulls and m in hulls:
            coords = [vp.to_canvas(p.tc, p.mc) for p in hulls[m].vertices]
            doc.add(f'<polyline id="hull-{i}" fill="none" stroke="{color}" stroke-width="1.2" points="'
                    + " ".join(f"{fmt(a)},{fmt(b)}" for a, b in coords) + '"/>')

    for k, a in enumerate(isometric_alphas):
        best = best_point_for_alpha(allpts, a)
        seg = _clip_line(vp, best.tc, best.mc, isometric_slope(a))
        if seg is None:
            continue
        (ax, ay), (bx, by) = seg
        p1, p2 = vp.to_canvas(ax, ay), vp.to_canvas(bx, by)
        doc.add(f'<line id="isometric-{k}" class="isometric" x1="{fmt(p1[0])}" y1="{fmt(p1[1])}" '
                f'x2="{fmt(p2[0])}" y2="{fmt(p2[1])}" stroke="gray" stroke-dasharray="4 3">'
                f'<title>alpha={a:g}</title></line>')
        legend.append((f"alpha={a:g}", "gray", ""))
    _legend(doc, vp.left + vp.width + 12, vp.top + 12, legend)
    return doc.render(vp)


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
