"""Exploring the lattice of feature configurations of a trained model.

``full_enumeration`` visits all 2**m configurations. The backward searches
(guided by MC, TC or JC) start from the full attribute set and, round by
round, evaluate every single-attribute removal from the current pivot and
move to the best one, visiting m(m+1)/2 + 1 configurations. ``monte_carlo``
draws the same number of configurations uniformly without replacement.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, MutableMapping

from .costs import CostContext, CostPoint, avg_misclassification_cost, test_cost_of_config
from .dataset import Dataset, FeatureConfig, mask_features
from .predictors import Predictor, evaluate_confusion
from .rng import Rng

DEFAULT_FULL_CAP = 20
METHODS = ("Full", "BMC", "BTC", "BJC", "RND")
GUIDES = ("MC", "TC", "JC")


@dataclass(frozen=True)
class SearchMethod:
    name: str  # one of METHODS
    sample_size: int | None = None  # RND only; None means the backward-size default
    seed: int = 0

    def __post_init__(self):
        if self.name not in METHODS:
            raise ValueError(f"unknown search method {self.name!r}")
        if self.sample_size is not None and self.sample_size < 1:
            raise ValueError("sample size must be at least 1")

    @classmethod
    def parse(cls, text: str, sample_size: int | None = None, seed: int = 0) -> SearchMethod:
        lookup = {m.lower(): m for m in METHODS}
        if text.lower() not in lookup:
            raise ValueError(f"unknown search method {text!r} (expected one of {', '.join(lookup)})")
        return cls(lookup[text.lower()], sample_size, seed)


@dataclass(frozen=True)
class PointSet:
    points: tuple[CostPoint, ...]
    method: SearchMethod
    model_id: str

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[CostPoint]:
        return iter(self.points)

    def configs(self) -> list[FeatureConfig]:
        return [p.config for p in self.points]


def backward_size(m: int) -> int:
    return m * (m + 1) // 2 + 1


def lattice_configs(m: int) -> list[FeatureConfig]:
    """All 2**m configs: by number of removed attributes, then combination order."""
    out = []
    for r in range(m + 1):
        for removed in itertools.combinations(range(m), r):
            out.append(FeatureConfig.without(m, removed))
    return out


def lattice_key(cfg: FeatureConfig) -> tuple:
    return (len(cfg.removed), cfg.removed)


def evaluate_config(p: Predictor, validation: Dataset, cfg: FeatureConfig, ctx: CostContext) -> CostPoint:
    """(TC, MC) of ``p`` on ``validation`` with the inactive attributes masked."""
    cm = evaluate_confusion(p, mask_features(validation, cfg))
    return CostPoint(test_cost_of_config(cfg, ctx), avg_misclassification_cost(cm, ctx), p.model_id, cfg)


class _Evaluator:
    # memoises evaluations per bitstring; callers may share the dict across searches
    def __init__(self, p, validation, ctx, cache, jobs):
        p.check_schema(validation)
        if validation.m != ctx.m or validation.c != ctx.c:
            raise ValueError("context does not match the dataset's attributes/classes")
        self.p, self.validation, self.ctx = p, validation, ctx
        self.cache = {} if cache is None else cache
        self.jobs = jobs

    def many(self, cfgs: list[FeatureConfig]) -> list[CostPoint]:
        todo = [c for c in dict.fromkeys(cfgs) if c.bitstring not in self.cache]
        if self.jobs > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                done = list(pool.map(self._eval, todo))
        else:
            done = [self._eval(c) for c in todo]
        for c, pt in zip(todo, done):
            self.cache[c.bitstring] = pt
        return [self.cache[c.bitstring] for c in cfgs]

    def _eval(self, cfg):
        return evaluate_config(self.p, self.validation, cfg, self.ctx)


def full_enumeration(p: Predictor, validation: Dataset, ctx: CostContext, *,
                     cap: int = DEFAULT_FULL_CAP, jobs: int = 1,
                     cache: MutableMapping | None = None) -> PointSet:
    if validation.m > cap:
        raise ValueError(f"m={validation.m} exceeds the full-enumeration cap of {cap}; "
                         "use an approximation (bmc, btc, bjc or rnd)")
    ev = _Evaluator(p, validation, ctx, cache, jobs)
    return PointSet(tuple(ev.many(lattice_configs(validation.m))), SearchMethod("Full"), p.model_id)


def backward_guided(p: Predictor, validation: Dataset, ctx: CostContext, guide: str, *,
                    alpha: float | None = None, jobs: int = 1,
                    cache: MutableMapping | None = None) -> PointSet:
    """Greedy backward elimination guided by MC, TC or JC.

    Each round removes the attribute whose removal gives the lowest guide
    value; ties remove the lowest attribute index. The JC guide uses
    ``alpha`` if given, else the context's alpha.
    """
    guide = guide.upper()
    if guide not in GUIDES:
        raise ValueError(f"guide must be one of {GUIDES}, got {guide!r}")
    a = ctx.alpha if alpha is None else alpha
    score = {
        "MC": lambda pt: pt.mc,
        "TC": lambda pt: pt.tc,
        "JC": lambda pt: pt.jc(a),
    }[guide]
    ev = _Evaluator(p, validation, ctx, cache, jobs)
    pivot = FeatureConfig.all_active(validation.m)
    points = ev.many([pivot])
    for _ in range(validation.m):
        candidates = [pivot.deactivate(j) for j in range(validation.m) if pivot.active[j]]
        evaluated = ev.many(candidates)
        points.extend(evaluated)
        best = evaluated[0]
        for pt in evaluated[1:]:
            if score(pt) < score(best):
                best = pt
        pivot = best.config
    return PointSet(tuple(points), SearchMethod("B" + guide), p.model_id)


def sample_configs(m: int, sample_size: int, seed: int) -> list[FeatureConfig]:
    """Distinct configs drawn uniformly from the lattice, returned in lattice order."""
    if not 1 <= sample_size <= 2 ** m:
        raise ValueError(f"sample size {sample_size} must lie in [1, 2**{m}]")
    codes = Rng(seed).sample_indices(2 ** m, sample_size)
    cfgs = [FeatureConfig(tuple(bool(code >> j & 1) for j in range(m))) for code in codes]
    return sorted(cfgs, key=lattice_key)


def monte_carlo(p: Predictor, validation: Dataset, ctx: CostContext, sample_size: int | None = None,
                seed: int = 0, *, jobs: int = 1, cache: MutableMapping | None = None) -> PointSet:
    m = validation.m
    size = backward_size(m) if sample_size is None else sample_size
    cfgs = sample_configs(m, size, seed)
    ev = _Evaluator(p, validation, ctx, cache, jobs)
    return PointSet(tuple(ev.many(cfgs)), SearchMethod("RND", size, seed), p.model_id)


def search(p: Predictor, validation: Dataset, ctx: CostContext, method: SearchMethod, *,
           alpha: float | None = None, jobs: int = 1, cap: int = DEFAULT_FULL_CAP,
           cache: MutableMapping | None = None) -> PointSet:
    """Dispatch on ``method``."""
    if method.name == "Full":
        return full_enumeration(p, validation, ctx, cap=cap, jobs=jobs, cache=cache)
    if method.name == "RND":
        return monte_carlo(p, validation, ctx, method.sample_size, method.seed, jobs=jobs, cache=cache)
    return backward_guided(p, validation, ctx, method.name[1:], alpha=alpha, jobs=jobs, cache=cache)


POINTS_HEADER = ("model_id", "config_bitstring", "tc", "mc")


def points_to_csv(points: Iterable[CostPoint]) -> str:
    """``# schema=1`` then ``model_id,config_bitstring,tc,mc`` rows (floats via repr)."""
    buf = io.StringIO()
    buf.write("# schema=1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POINTS_HEADER)
    for p in points:
        w.writerow([p.model_id, p.config.bitstring, repr(float(p.tc)), repr(float(p.mc))])
    return buf.getvalue()


def read_points_csv(text: str) -> list[CostPoint]:
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), 1) if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("points file is empty")
    head = next(csv.reader([lines[0][1]]))
    if tuple(h.strip() for h in head[:4]) != POINTS_HEADER:
        raise ValueError(f"line {lines[0][0]}: expected header {','.join(POINTS_HEADER)}")
    out = []
    for lineno, ln in lines[1:]:
        row = next(csv.reader([ln]))
        if len(row) < 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(row)}")
        try:
            cfg = FeatureConfig.from_bitstring(row[1].strip())
            tc, mc = float(row[2]), float(row[3])
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
        if not (math.isfinite(tc) and math.isfinite(mc)):
            raise ValueError(f"line {lineno}: tc and mc must be finite")
        out.append(CostPoint(tc, mc, row[0], cfg))
    if not out:
        raise ValueError("points file has no rows")
    return out
