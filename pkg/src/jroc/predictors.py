"""Classifiers that keep predicting when attributes are withheld.

Every built-in predictor accepts any pattern of missing cells at prediction
time, including an instance with nothing observed. Votes and ties always
resolve to the lowest class index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset, DatasetError, FeatureMeta, encode_instance
from .rng import Rng


class SchemaError(DatasetError):
    """Predictor and dataset disagree on features or labels."""


def _argmax_lowest(counts: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(counts))


class Predictor:
    """Base class: ``fit`` on a dataset, then ``predict`` rows or single instances."""

    model_id = "predictor"

    def __init__(self):
        self.features: tuple[FeatureMeta, ...] | None = None
        self.class_labels: tuple[str, ...] | None = None

    def fit(self, d: Dataset) -> Predictor:
        self.features = d.features
        self.class_labels = d.class_labels
        self._fit(d)
        return self

    def _fit(self, d: Dataset) -> None:
        raise NotImplementedError

    def check_schema(self, d: Dataset) -> None:
        if self.features is None:
            raise RuntimeError(f"{self.model_id} has not been trained")
        if d.features != self.features or d.class_labels != self.class_labels:
            raise SchemaError(f"dataset schema does not match the one {self.model_id} was trained on")

    def predict(self, d: Dataset) -> np.ndarray:
        self.check_schema(d)
        return self._predict_arrays(d.values, d.missing)

    def predict_one(self, instance: Sequence) -> int:
        """Predict a single instance given as a sequence of cells (None = missing)."""
        if self.features is None:
            raise RuntimeError(f"{self.model_id} has not been trained")
        if len(instance) != len(self.features):
            raise SchemaError(f"instance has {len(instance)} cells, expected {len(self.features)}")
        vals, miss = encode_instance(self.features, instance)
        return int(self._predict_arrays(vals, miss)[0])

    def _predict_arrays(self, values: np.ndarray, missing: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class MajorityPredictor(Predictor):
    model_id = "majority"

    def _fit(self, d):
        self.majority = _argmax_lowest(d.class_counts())

    def _predict_arrays(self, values, missing):
        return np.full(values.shape[0], self.majority, dtype=np.int64)


class KNNPredictor(Predictor):
    """k nearest neighbours with a distance that skips missing dimensions.

    Numeric differences are scaled by the training range (zero-range features
    contribute 0), nominal ones count 0/1. The sum over dimensions observed on
    both sides is rescaled by ``m / used`` so sparse instances are not
    favoured. A query sharing no observed dimension with any training row
    falls back to the majority class.
    """

    def __init__(self, k: int = 1):
        super().__init__()
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = k
        self.model_id = f"knn:k={k}"

    def _fit(self, d):
        if self.k > d.n:
            raise ValueError(f"k={self.k} exceeds the {d.n} training rows")
        self.X = d.values
        self.M = d.missing
        self.y = d.y
        self.c = d.c
        self.majority = _argmax_lowest(d.class_counts())
        self.nominal = np.array([f.is_nominal for f in d.features])
        span = np.zeros(d.m)
        for j in range(d.m):
            col = d.values[~d.missing[:, j], j]
            if col.size and not self.nominal[j]:
                span[j] = col.max() - col.min()
        with np.errstate(divide="ignore"):
            self.inv_span = np.where(span > 0, 1.0 / np.where(span > 0, span, 1.0), 0.0)

    def distances(self, values: np.ndarray, missing: np.ndarray) -> np.ndarray:
        """(q, n) distance matrix; ``inf`` where no dimension is shared."""
        m = self.X.shape[1]
        diff = np.abs(values[:, None, :] - self.X[None, :, :])
        diff = np.where(self.nominal, (diff > 0).astype(float), diff * self.inv_span)
        used = ~missing[:, None, :] & ~self.M[None, :, :]
        count = used.sum(axis=2)
        total = np.where(used, diff, 0.0).sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(count > 0, total * m / np.maximum(count, 1), np.inf)

    def _predict_arrays(self, values, missing):
        out = np.empty(values.shape[0], dtype=np.int64)
        n, m = self.X.shape
        chunk = max(1, 2_000_000 // max(1, n * m))
        for start in range(0, values.shape[0], chunk):
            dist = self.distances(values[start:start + chunk], missing[start:start + chunk])
            for r, row in enumerate(dist):
                order = np.argsort(row, kind="stable")[: self.k]
                order = order[np.isfinite(row[order])]
                if order.size == 0:
                    out[start + r] = self.majority
                else:
                    out[start + r] = _argmax_lowest(np.bincount(self.y[order], minlength=self.c))
        return out


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) along the last axis of a count array."""
    counts = np.asarray(counts, dtype=float)
    tot = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tot > 0, counts / np.where(tot > 0, tot, 1), 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1)), 0.0)
    return -(p * logs).sum(axis=-1)


@dataclass
class _Node:
    prediction: int
    feature: int = -1
    threshold: float = 0.0  # numeric: left branch is value <= threshold
    children: list | None = None
    default: int = 0  # branch that received the most training rows

    @property
    def is_leaf(self) -> bool:
        return self.children is None


def best_numeric_split(x: np.ndarray, y: np.ndarray, c: int) -> tuple[float, float]:
    """Best binary midpoint split of one numeric column by information gain.

    Returns ``(gain, threshold)``; gain is 0 when no split exists. Ties keep
    the smallest threshold.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.size
    onehot = np.zeros((n, c))
    onehot[np.arange(n), ys] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    cut = np.nonzero(xs[1:] > xs[:-1])[0]
    if cut.size == 0:
        return 0.0, 0.0
    left = left[cut]
    right = onehot.sum(axis=0) - left
    nl = (cut + 1).astype(float)
    child = (nl * _entropy(left) + (n - nl) * _entropy(right)) / n
    gains = _entropy(onehot.sum(axis=0)) - child
    b = int(np.argmax(gains))
    return float(gains[b]), float((xs[cut[b]] + xs[cut[b] + 1]) / 2.0)


class TreePredictor(Predictor):
    """Greedy information-gain tree, depth capped.

    Numeric attributes get binary midpoint splits, nominal ones a branch per
    category. Split quality is measured on rows where the attribute is known
    (scaled by the known fraction); training rows missing the split value
    join the branch with the most known rows, and at prediction time a
    missing split value follows the branch that received the most rows.
    """

    def __init__(self, max_depth: int = 6, min_split: int = 2):
        super().__init__()
        if max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        self.max_depth = max_depth
        self.min_split = min_split
        self.model_id = f"tree:depth={max_depth}"

    def _fit(self, d):
        self.c = d.c
        self.nominal = [f.is_nominal for f in d.features]
        self.n_categories = [len(f.categories) for f in d.features]
        self.root = self._grow(d.values, d.missing, d.y, np.arange(d.n), 0, None)

    def _grow(self, X, M, y, idx, depth, parent_majority):
        if idx.size == 0:
            return _Node(parent_majority)
        counts = np.bincount(y[idx], minlength=self.c)
        majority = _argmax_lowest(counts)
        if depth >= self.max_depth or idx.size < self.min_split or np.count_nonzero(counts) == 1:
            return _Node(majority)

        best = (1e-12, -1, 0.0)
        for j in range(X.shape[1]):
            known = idx[~M[idx, j]]
            if known.size < 2:
                continue
            frac = known.size / idx.size
            if self.nominal[j]:
                cats = X[known, j].astype(np.int64)
                table = np.zeros((self.n_categories[j], self.c))
                np.add.at(table, (cats, y[known]), 1.0)
                sizes = table.sum(axis=1)
                if np.count_nonzero(sizes) < 2:
                    continue
                gain = _entropy(table.sum(axis=0)) - (sizes * _entropy(table)).sum() / known.size
                thr = 0.0
            else:
                gain, thr = best_numeric_split(X[known, j], y[known], self.c)
            gain *= frac
            if gain > best[0]:
                best = (gain, j, thr)
        if best[1] < 0:
            return _Node(majority)

        _, j, thr = best
        branch = self._branch_of(X[idx, j], j, thr)
        known = ~M[idx, j]
        n_branches = self.n_categories[j] if self.nominal[j] else 2
        sizes = np.bincount(branch[known], minlength=n_branches)
        default = _argmax_lowest(sizes)
        branch = np.where(known, branch, default)
        children = [self._grow(X, M, y, idx[branch == b], depth + 1, majority)
                    for b in range(n_branches)]
        return _Node(majority, j, thr, children, default)

    def _branch_of(self, col, j, thr):
        if self.nominal[j]:
            return col.astype(np.int64)
        return np.where(col <= thr, 0, 1)

    def _predict_arrays(self, values, missing):
        out = np.empty(values.shape[0], dtype=np.int64)
        stack = [(self.root, np.arange(values.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue
            if node.is_leaf:
                out[rows] = node.prediction
                continue
            branch = self._branch_of(values[rows, node.feature], node.feature, node.threshold)
            branch = np.where(missing[rows, node.feature], node.default, branch)
            for b, child in enumerate(node.children):
                stack.append((child, rows[branch == b]))
        return out

    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(ch) for ch in node.children)
        return walk(self.root)


class BaggingPredictor(Predictor):
    """Plurality vote over trees grown on seeded bootstrap resamples."""

    def __init__(self, rounds: int = 10, max_depth: int = 6, seed: int = 0):
        super().__init__()
        if rounds < 1:
            raise ValueError("rounds must be at least 1")
        self.rounds = rounds
        self.max_depth = max_depth
        self.seed = seed
        self.model_id = f"bag:rounds={rounds};depth={max_depth}"

    def _fit(self, d):
        rng = Rng(self.seed)
        self.c = d.c
        self.samples = []
        self.members = []
        for _ in range(self.rounds):
            idx = [rng.randbelow(d.n) for _ in range(d.n)]
            self.samples.append(idx)
            self.members.append(TreePredictor(self.max_depth).fit(d.take(idx)))

    def _predict_arrays(self, values, missing):
        votes = np.zeros((values.shape[0], self.c), dtype=np.int64)
        rows = np.arange(values.shape[0])
        for tree in self.members:
            votes[rows, tree._predict_arrays(values, missing)] += 1
        return np.argmax(votes, axis=1).astype(np.int64)


def train_majority(d: Dataset) -> MajorityPredictor:
    return MajorityPredictor().fit(d)


def train_knn(d: Dataset, k: int) -> KNNPredictor:
    return KNNPredictor(k).fit(d)


def train_tree(d: Dataset, max_depth: int) -> TreePredictor:
    return TreePredictor(max_depth).fit(d)


def train_bagging(d: Dataset, rounds: int, seed: int, max_depth: int = 6) -> BaggingPredictor:
    return BaggingPredictor(rounds, max_depth, seed).fit(d)


@dataclass(frozen=True)
class ConfusionMatrix:
    """c x c counts; rows are predicted classes, columns actual classes."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def c(self) -> int:
        return self.counts.shape[0]

    @classmethod
    def from_predictions(cls, predicted, actual, c: int) -> ConfusionMatrix:
        counts = np.zeros((c, c), dtype=np.int64)
        np.add.at(counts, (np.asarray(predicted), np.asarray(actual)), 1)
        return cls(counts)


def evaluate_confusion(p: Predictor, d: Dataset) -> ConfusionMatrix:
    return ConfusionMatrix.from_predictions(p.predict(d), d.y, d.c)


# --- predictor spec strings: majority | knn:k=5 | tree:depth=6 | bag:rounds=10,depth=6

_KINDS = {
    "majority": set(),
    "knn": {"k"},
    "tree": {"depth"},
    "bag": {"rounds", "depth", "seed"},
}


@dataclass(frozen=True)
class PredictorSpec:
    kind: str
    params: tuple[tuple[str, int], ...] = ()

    @property
    def model_id(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + ":" + ";".join(f"{k}={v}" for k, v in self.params)

    def param(self, key: str, default: int) -> int:
        return dict(self.params).get(key, default)

    def train(self, d: Dataset, seed: int = 0) -> Predictor:
        if self.kind == "majority":
            p = train_majority(d)
        elif self.kind == "knn":
            p = train_knn(d, self.param("k", 1))
        elif self.kind == "tree":
            p = train_tree(d, self.param("depth", 6))
        else:
            p = train_bagging(d, self.param("rounds", 10), self.param("seed", seed), self.param("depth", 6))
        p.model_id = self.model_id
        return p


def parse_predictor_spec(text: str) -> PredictorSpec:
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r} (expected one of {', '.join(_KINDS)})")
    params = []
    for tok in filter(None, re.split(r"[,;]", rest)):
        key, eq, val = tok.partition("=")
        key = key.strip()
        if not eq or key not in _KINDS[kind]:
            raise ValueError(f"bad parameter {tok!r} for model {kind!r}")
        try:
            ival = int(val)
        except ValueError:
            raise ValueError(f"parameter {key!r} of {kind!r} must be an integer") from None
        if ival < 1 and key != "seed":
            raise ValueError(f"parameter {key!r} of {kind!r} must be positive")
        params.append((key, ival))
    return PredictorSpec(kind, tuple(params))


def split_model_list(text: str) -> list[PredictorSpec]:
    """Parse a comma-separated model list.

    Commas also separate parameters (``bag:rounds=10,depth=6``), so a token
    of the form ``key=value`` without a kind prefix attaches to the model
    before it.
    """
    groups: list[str] = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if "=" in tok and ":" not in tok and groups:
            groups[-1] += "," + tok
        else:
            groups.append(tok)
    if not groups:
        raise ValueError("no models given")
    return [parse_predictor_spec(g) for g in groups]
