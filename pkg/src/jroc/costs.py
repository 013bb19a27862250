"""Operating contexts and the misclassification / test / joint cost measures.

Cost matrices are indexed ``[predicted][actual]`` throughout.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import FeatureConfig
from .predictors import ConfusionMatrix
from .rng import Rng


@dataclass(frozen=True)
class CostContext:
    test_costs: tuple[float, ...]
    misclass: tuple[tuple[float, ...], ...]
    alpha: float = 0.5

    def __post_init__(self):
        t = tuple(float(v) for v in self.test_costs)
        M = tuple(tuple(float(v) for v in row) for row in self.misclass)
        object.__setattr__(self, "test_costs", t)
        object.__setattr__(self, "misclass", M)
        object.__setattr__(self, "alpha", float(self.alpha))
        c = len(M)
        if len(t) < 1:
            raise ValueError("need at least one test cost")
        if c < 2 or any(len(row) != c for row in M):
            raise ValueError("misclassification matrix must be square with c >= 2")
        if any(not math.isfinite(v) or v < 0 for v in t):
            raise ValueError("test costs must be finite and non-negative")
        for i, row in enumerate(M):
            for j, v in enumerate(row):
                if not math.isfinite(v) or v < 0:
                    raise ValueError("misclassification costs must be finite and non-negative")
                if i == j and v != 0:
                    raise ValueError("misclassification matrix diagonal must be zero")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def m(self) -> int:
        return len(self.test_costs)

    @property
    def c(self) -> int:
        return len(self.misclass)

    @property
    def t(self) -> np.ndarray:
        return np.array(self.test_costs)

    @property
    def M(self) -> np.ndarray:
        return np.array(self.misclass)

    def with_alpha(self, alpha: float) -> CostContext:
        return CostContext(self.test_costs, self.misclass, alpha)

    def to_json(self) -> str:
        return json.dumps({"test_costs": list(self.test_costs),
                           "misclass": [list(r) for r in self.misclass],
                           "alpha": self.alpha})

    @classmethod
    def from_json(cls, text: str) -> CostContext:
        obj = json.loads(text)
        try:
            return cls(obj["test_costs"], obj["misclass"], obj.get("alpha", 0.5))
        except (KeyError, TypeError) as e:
            raise ValueError(f"malformed context: {e}") from None


@dataclass(frozen=True)
class CostPoint:
    """Average (TC, MC) of one model under one feature configuration."""

    tc: float
    mc: float
    model_id: str
    config: FeatureConfig

    def jc(self, alpha: float) -> float:
        return joint_cost(self.mc, self.tc, alpha)


def uniform_context(m: int, c: int) -> CostContext:
    """Test costs 1/m each, off-diagonal costs c/(c-1), alpha 0.5."""
    if m < 1 or c < 2:
        raise ValueError("need m >= 1 and c >= 2")
    off = c / (c - 1)
    M = [[0.0 if i == j else off for j in range(c)] for i in range(c)]
    return CostContext((1.0 / m,) * m, M, 0.5)


def random_context(m: int, c: int, beta: float, seed: int) -> CostContext:
    """Uniform context with every cost scaled by exp(beta * (u - 0.5)).

    Draw order: the m test-cost multipliers, then one multiplier per
    off-diagonal matrix entry in row-major order (diagonal entries draw
    nothing and stay 0). Afterwards test costs are normalised to sum to 1
    and matrix entries to sum to c**2.
    """
    if m < 1 or c < 2:
        raise ValueError("need m >= 1 and c >= 2")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    rng = Rng(seed)
    kt = [math.exp(beta * (rng.random() - 0.5)) for _ in range(m)]
    km = [[0.0] * c for _ in range(c)]
    for i in range(c):
        for j in range(c):
            if i != j:
                km[i][j] = math.exp(beta * (rng.random() - 0.5))
    # the uniform base value cancels in the normalisation, so divide the
    # multipliers directly; with beta = 0 this reproduces uniform_context exactly
    st = math.fsum(kt)
    sm = math.fsum(v for row in km for v in row)
    t = [k / st for k in kt]
    M = [[(c * c) * v / sm if i != j else 0.0 for j, v in enumerate(row)] for i, row in enumerate(km)]
    return CostContext(t, M, 0.5)


def avg_misclassification_cost(cm: ConfusionMatrix, ctx: CostContext) -> float:
    """Frobenius product of confusion counts and cost matrix, divided by n."""
    if cm.c != ctx.c:
        raise ValueError(f"confusion matrix is {cm.c}x{cm.c}, context has {ctx.c} classes")
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    return float((cm.counts * ctx.M).sum() / cm.total)


def test_cost_of_config(cfg: FeatureConfig, ctx: CostContext) -> float:
    if cfg.m != ctx.m:
        raise ValueError(f"config has {cfg.m} entries, context has {ctx.m} test costs")
    return math.fsum(t for t, a in zip(ctx.test_costs, cfg.active) if a)


def joint_cost(mc: float, tc: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * mc + (1.0 - alpha) * tc


def load_context(path: str | os.PathLike) -> CostContext:
    return CostContext.from_json(Path(path).read_text(encoding="utf-8"))


def parse_context_spec(spec: str, m: int, c: int, seed: int = 0) -> CostContext:
    """``uniform`` | ``random:beta=10[,seed=S]`` | ``file:PATH``."""
    kind, _, rest = spec.partition(":")
    if kind == "uniform" and not rest:
        return uniform_context(m, c)
    if kind == "random":
        opts = parse_kv(rest)
        unknown = set(opts) - {"beta", "seed"}
        if unknown:
            raise ValueError(f"unknown random-context option(s): {', '.join(sorted(unknown))}")
        beta = float(opts.get("beta", 10.0))
        return random_context(m, c, beta, int(opts.get("seed", seed)))
    if kind == "file" and rest:
        ctx = load_context(rest)
        if ctx.m != m or ctx.c != c:
            raise ValueError(f"context file is for m={ctx.m}, c={ctx.c}; data has m={m}, c={c}")
        return ctx
    raise ValueError(f"bad context spec {spec!r} (use uniform, random:beta=B,seed=S or file:PATH)")


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for tok in filter(None, (t.strip() for t in text.split(","))):
        key, eq, val = tok.partition("=")
        if not eq:
            raise ValueError(f"expected key=value, got {tok!r}")
        out[key.strip()] = val.strip()
    return out
