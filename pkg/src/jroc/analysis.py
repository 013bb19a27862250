"""JROC space: isometrics, best-point selection, convex hulls, dominance.

A point's joint cost is alpha*MC + (1-alpha)*TC, so lines of equal cost in
(TC, MC) coordinates have slope -(1-alpha)/alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .costs import CostPoint, joint_cost


@dataclass(frozen=True)
class Hull:
    """Lower-left convex frontier, ascending TC and strictly descending MC."""

    vertices: tuple[CostPoint, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def jc(self, alpha: float) -> float:
        return min(p.jc(alpha) for p in self.vertices)


@dataclass(frozen=True)
class DominanceRegion:
    alpha_lo: float
    alpha_hi: float
    model_id: str


def isometric_slope(alpha: float) -> float:
    """Slope of equal-JC lines in (TC, MC) space; ``-inf`` (vertical) at alpha = 0."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return -math.inf
    return -(1.0 - alpha) / alpha


def _points(points) -> list[CostPoint]:
    return list(points.points if hasattr(points, "points") else points)


def selection_key(p: CostPoint, alpha: float) -> tuple:
    # alpha 0 / 1 select directly on TC / MC instead of going through the slope
    if alpha == 0.0:
        return (p.tc, p.mc, p.config.bitstring, p.model_id)
    if alpha == 1.0:
        return (p.mc, p.tc, p.config.bitstring, p.model_id)
    return (joint_cost(p.mc, p.tc, alpha), p.tc, p.config.bitstring, p.model_id)


def best_point_for_alpha(points, alpha: float) -> CostPoint:
    """Point of minimum joint cost; ties go to smaller TC, then config bitstring."""
    pts = _points(points)
    if not pts:
        raise ValueError("no points to choose from")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return min(pts, key=lambda p: selection_key(p, alpha))


def leftmost_intercept(points, slope: float) -> tuple[float, CostPoint]:
    """Smallest MC-intercept ``mc - slope*tc`` over the points and the point attaining it."""
    pts = _points(points)
    best = min(pts, key=lambda p: (p.mc - slope * p.tc, p.tc, p.config.bitstring, p.model_id))
    return best.mc - slope * best.tc, best


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> Hull:
    """Lower-left convex hull of a point cloud in JROC space.

    The cloud is augmented with three far sentinels (straight up from the
    leftmost point, straight right of the lowest point, and the far corner)
    before running a monotone-chain hull; the real vertices of that hull
    are exactly the frontier that can be optimal for some alpha in [0, 1].
    Sentinels never appear in the result. Coincident points keep the one
    with the smaller config bitstring.
    """
    pts = _points(points)
    if not pts:
        raise ValueError("no points")
    unique: dict[tuple[float, float], CostPoint] = {}
    for p in sorted(pts, key=lambda p: (p.tc, p.mc, p.config.bitstring, p.model_id)):
        unique.setdefault((p.tc, p.mc), p)
    if len(unique) == 1:
        return Hull(tuple(unique.values()))

    min_tc = min(k[0] for k in unique)
    min_mc = min(k[1] for k in unique)
    scale = max(max(abs(v) for k in unique for v in k), 1.0)
    big = 1e4 * scale
    sentinels = {(min_tc, big), (big, min_mc), (big, big)}
    coords = sorted(set(unique) | sentinels)

    lower: list[tuple[float, float]] = []
    for q in coords:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list[tuple[float, float]] = []
    for q in reversed(coords):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    ring = lower[:-1] + upper[:-1]
    chain = [unique[q] for q in ring if q in unique and q not in sentinels]
    chain.sort(key=lambda p: p.tc)
    return Hull(tuple(chain))


def dominance_regions(hulls: Sequence[tuple[str, Hull]] | dict) -> list[DominanceRegion]:
    """Split alpha in [0, 1] into maximal intervals won by a single model.

    Each model's cost as a function of alpha is the lower envelope of the
    lines tc + alpha*(mc - tc) of its hull vertices. Candidate interval
    ends are all pairwise intersections of those lines inside (0, 1).
    Exact ties, including at interval boundaries, go to the
    lexicographically smaller model id; a shared endpoint belongs to the
    region of the smaller id.
    """
    items = list(hulls.items()) if isinstance(hulls, dict) else list(hulls)
    if not items:
        raise ValueError("need at least one hull")
    lines = [(p.tc, p.mc - p.tc) for _, h in items for p in h.vertices]
    cuts = {0.0, 1.0}
    for i in range(len(lines)):
        for k in range(i + 1, len(lines)):
            (a0, a1), (b0, b1) = lines[i], lines[k]
            if a1 != b1:
                x = (b0 - a0) / (a1 - b1)
                if 0.0 < x < 1.0:
                    cuts.add(x)
    cuts = sorted(cuts)

    def winner(alpha: float) -> str:
        vals = [(h.jc(alpha), mid) for mid, h in items]
        best = min(v for v, _ in vals)
        tol = 1e-12 * max(1.0, abs(best))
        return min(mid for v, mid in vals if v - best <= tol)

    regions: list[DominanceRegion] = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = winner((lo + hi) / 2.0)
        if regions and regions[-1].model_id == mid:
            regions[-1] = DominanceRegion(regions[-1].alpha_lo, hi, mid)
        else:
            regions.append(DominanceRegion(lo, hi, mid))
    return regions


def model_for_alpha(regions: Iterable[DominanceRegion], alpha: float) -> str:
    """Model owning ``alpha``; on a shared endpoint, the smaller id."""
    owners = [r.model_id for r in regions if r.alpha_lo <= alpha <= r.alpha_hi]
    if not owners:
        raise ValueError(f"alpha {alpha} not covered")
    return min(owners)
