"""Tabular datasets with first-class missing cells, splitting and masking.

Cells are stored as two parallel ``(n, m)`` arrays: ``values`` (float for
numeric features, category index for nominal ones) and a boolean
``missing`` mask. A missing cell's entry in ``values`` carries no meaning.
The public cell accessor returns ``None`` for a missing cell.

CSV contract: UTF-8, header line first, comma separated, ``?`` marks a
missing cell and the last column is the class label. No quoting.

Canonical numeric formatting on output: integral values are written
without a decimal point (``6``), everything else with Python's shortest
round-trip ``repr`` (``0.627``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .rng import Rng

MISSING = "?"


class DatasetError(ValueError):
    """Malformed dataset file or inconsistent dataset contents."""


@dataclass(frozen=True)
class FeatureMeta:
    name: str
    kind: str  # "numeric" | "nominal"
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "nominal"):
            raise DatasetError(f"unknown feature kind {self.kind!r}")
        if (self.kind == "nominal") != bool(self.categories):
            raise DatasetError(f"feature {self.name!r}: categories must be non-empty iff nominal")

    @property
    def is_nominal(self) -> bool:
        return self.kind == "nominal"


@dataclass(frozen=True)
class FeatureConfig:
    """Which attributes are available ("purchased") at prediction time."""

    active: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "active", tuple(bool(a) for a in self.active))

    @classmethod
    def all_active(cls, m: int) -> FeatureConfig:
        return cls((True,) * m)

    @classmethod
    def none_active(cls, m: int) -> FeatureConfig:
        return cls((False,) * m)

    @classmethod
    def from_bitstring(cls, bits: str) -> FeatureConfig:
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid config bitstring {bits!r}")
        return cls(tuple(b == "1" for b in bits))

    @classmethod
    def without(cls, m: int, removed: Iterable[int]) -> FeatureConfig:
        gone = set(removed)
        return cls(tuple(j not in gone for j in range(m)))

    @property
    def m(self) -> int:
        return len(self.active)

    @property
    def bitstring(self) -> str:
        return "".join("1" if a else "0" for a in self.active)

    @property
    def removed(self) -> tuple[int, ...]:
        return tuple(j for j, a in enumerate(self.active) if not a)

    @property
    def n_active(self) -> int:
        return sum(self.active)

    def deactivate(self, j: int) -> FeatureConfig:
        act = list(self.active)
        act[j] = False
        return FeatureConfig(tuple(act))

    def label(self) -> str:
        """Tick label: ``ALL`` or the removed 1-based indices, e.g. ``-1-2-3``."""
        if all(self.active):
            return "ALL"
        return "".join(f"-{j + 1}" for j in self.removed)

    def __and__(self, other: FeatureConfig) -> FeatureConfig:
        if self.m != other.m:
            raise ValueError("config lengths differ")
        return FeatureConfig(tuple(a and b for a, b in zip(self.active, other.active)))

    def as_array(self) -> np.ndarray:
        return np.array(self.active, dtype=bool)

    def __str__(self) -> str:
        return self.bitstring


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    features: tuple[FeatureMeta, ...]
    class_labels: tuple[str, ...]
    values: np.ndarray  # (n, m) float64
    missing: np.ndarray  # (n, m) bool
    y: np.ndarray  # (n,) int class indices
    class_name: str = "class"
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "class_labels", tuple(self.class_labels))
        values = np.asarray(self.values, dtype=float)
        missing = np.asarray(self.missing, dtype=bool)
        y = np.asarray(self.y, dtype=np.int64)
        m, c = len(self.features), len(self.class_labels)
        if m < 1:
            raise DatasetError("a dataset needs at least one feature")
        # a one-class file (e.g. a single row) still loads; costing it needs c >= 2
        if c < 1:
            raise DatasetError("a dataset needs at least one class label")
        if y.ndim != 1 or y.size < 1:
            raise DatasetError("a dataset needs at least one row")
        if values.shape != (y.size, m) or missing.shape != (y.size, m):
            raise DatasetError("cell arrays do not match the feature/row counts")
        if y.min() < 0 or y.max() >= c:
            raise DatasetError("class index out of range")
        for j, f in enumerate(self.features):
            if f.is_nominal:
                col = values[~missing[:, j], j]
                if col.size and (col.min() < 0 or col.max() >= len(f.categories)
                                 or np.any(col != np.round(col))):
                    raise DatasetError(f"feature {f.name!r}: category index out of range")
        values = np.where(missing, 0.0, values)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "missing", _frozen(missing))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def c(self) -> int:
        return len(self.class_labels)

    @property
    def schema(self) -> tuple:
        return (self.features, self.class_labels)

    def cell(self, i: int, j: int) -> float | int | None:
        if self.missing[i, j]:
            return None
        v = self.values[i, j]
        return int(v) if self.features[j].is_nominal else float(v)

    def row(self, i: int) -> list[float | int | None]:
        return [self.cell(i, j) for j in range(self.m)]

    def take(self, indices: Sequence[int]) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise DatasetError("cannot build an empty dataset")
        return Dataset(self.features, self.class_labels, self.values[idx], self.missing[idx],
                       self.y[idx], self.class_name, self.name)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.c)

    def same_cells(self, other: Dataset) -> bool:
        return (self.schema == other.schema
                and np.array_equal(self.missing, other.missing)
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.y, other.y))

    def encode_instance(self, instance: Sequence) -> tuple[np.ndarray, np.ndarray]:
        """One instance (None = missing) as ``(values, missing)`` row arrays."""
        if len(instance) != self.m:
            raise DatasetError(f"instance has {len(instance)} cells, expected {self.m}")
        return encode_instance(self.features, instance)


def encode_instance(features: Sequence[FeatureMeta], instance: Sequence) -> tuple[np.ndarray, np.ndarray]:
    vals = np.zeros((1, len(features)))
    miss = np.zeros((1, len(features)), dtype=bool)
    for j, (f, v) in enumerate(zip(features, instance)):
        if v is None or (isinstance(v, str) and v == MISSING):
            miss[0, j] = True
        elif f.is_nominal and isinstance(v, str):
            vals[0, j] = f.categories.index(v)
        else:
            vals[0, j] = float(v)
    return vals, miss


def _parse_float(s: str) -> float | None:
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def dataset_from_table(header: Sequence[str], rows: Sequence[Sequence[str]], name: str = "") -> Dataset:
    """Build a dataset from string cells; the last column is the class.

    Numeric kind is inferred when every non-missing cell of a column parses
    as a finite real; categories and class labels keep first-appearance order.
    """
    if len(header) < 2:
        raise DatasetError("need at least one feature column and a class column")
    m = len(header) - 1
    features = []
    n = len(rows)
    values = np.zeros((n, m))
    missing = np.zeros((n, m), dtype=bool)
    for j in range(m):
        col = [r[j] for r in rows]
        present = [s for s in col if s != MISSING]
        parsed = [_parse_float(s) for s in present]
        if all(p is not None for p in parsed):
            features.append(FeatureMeta(header[j], "numeric"))
            for i, s in enumerate(col):
                if s == MISSING:
                    missing[i, j] = True
                else:
                    values[i, j] = float(s)
        else:
            cats = list(dict.fromkeys(present))
            lookup = {s: k for k, s in enumerate(cats)}
            features.append(FeatureMeta(header[j], "nominal", tuple(cats)))
            for i, s in enumerate(col):
                if s == MISSING:
                    missing[i, j] = True
                else:
                    values[i, j] = lookup[s]
    labels = list(dict.fromkeys(r[m] for r in rows))
    lookup = {s: k for k, s in enumerate(labels)}
    y = np.array([lookup[r[m]] for r in rows], dtype=np.int64)
    return Dataset(tuple(features), tuple(labels), values, missing, y, header[m], name)


def parse_dataset(text: str, name: str = "") -> Dataset:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DatasetError("empty dataset file")
    header = [h.strip() for h in lines[0].split(",")]
    width = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [s.strip() for s in line.split(",")]
        if len(cells) != width:
            raise DatasetError(f"line {lineno}: expected {width} cells, found {len(cells)}")
        if cells[-1] in ("", MISSING):
            raise DatasetError(f"line {lineno}: missing class label")
        rows.append(cells)
    if not rows:
        raise DatasetError("dataset file has a header but no rows")
    return dataset_from_table(header, rows, name)


def load_dataset(path: str | os.PathLike) -> Dataset:
    path = Path(path)
    return parse_dataset(path.read_text(encoding="utf-8"), name=path.stem)


def format_number(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def dataset_to_csv(d: Dataset) -> str:
    out = [",".join([f.name for f in d.features] + [d.class_name])]
    for i in range(d.n):
        cells = []
        for j, f in enumerate(d.features):
            if d.missing[i, j]:
                cells.append(MISSING)
            elif f.is_nominal:
                cells.append(f.categories[int(d.values[i, j])])
            else:
                cells.append(format_number(d.values[i, j]))
        cells.append(d.class_labels[d.y[i]])
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def save_dataset(d: Dataset, path: str | os.PathLike) -> None:
    Path(path).write_text(dataset_to_csv(d), encoding="utf-8")


def split_dataset(d: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Shuffle rows with a seeded Fisher-Yates permutation and cut at floor(fraction*n)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if d.n < 2:
        raise DatasetError("need at least two rows to split")
    perm = list(range(d.n))
    Rng(seed).shuffle(perm)
    # small epsilon keeps e.g. 150 * (2/3) from flooring to 99
    k = math.floor(fraction * d.n + 1e-9)
    if k < 1 or k >= d.n:
        raise DatasetError(f"split of {d.n} rows at fraction {fraction} leaves an empty part")
    return d.take(perm[:k]), d.take(perm[k:])


def mask_features(d: Dataset, cfg: FeatureConfig) -> Dataset:
    """Copy of ``d`` with every cell of each inactive feature set missing."""
    if cfg.m != d.m:
        raise ValueError(f"config has {cfg.m} entries, dataset has {d.m} features")
    missing = d.missing | ~cfg.as_array()[None, :]
    return Dataset(d.features, d.class_labels, d.values, missing, d.y, d.class_name, d.name)


def bundled_path(name: str) -> Path:
    """Path of a dataset shipped with the package (``iris``, ``diabetes``, ``glass``)."""
    p = Path(__file__).parent / "data" / f"{name}.csv"
    if not p.exists():
        raise FileNotFoundError(f"no bundled dataset named {name!r}")
    return p
