"""Method comparison protocol: Full vs. BMC/BTC/BJC/RND on held-out data.

Per dataset and repetition the rows are split into work (2/3) and test
(1/3) parts, and work is split again into train and validation halves.
Every model is trained on the train half; each search method gathers its
points over all models on validation; for each alpha the method picks its
best (model, configuration) there and is scored by the joint cost of that
choice on the test part.

Seeds: each (dataset, repetition) gets ``derive_seed(master, d, r)``; the
split, bagging and sampling seeds descend from it, so results do not depend
on execution order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import best_point_for_alpha
from .costs import CostContext, avg_misclassification_cost, joint_cost, random_context, \
    test_cost_of_config, uniform_context
from .dataset import Dataset, load_dataset, mask_features, split_dataset
from .lattice import METHODS, backward_guided, full_enumeration, monte_carlo
from .predictors import PredictorSpec, evaluate_confusion, split_model_list
from .rng import derive_seed

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
SCHEMA_LINE = "# schema=1"
VALIDATION_TOL = 1e-12

# sub-seed tags below a run seed
_SPLIT, _WORK, _MODEL, _RND, _CONTEXT = 1, 2, 3, 4, 5


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContextKind:
    kind: str = "uniform"  # "uniform" | "random"
    beta: float = 10.0
    seed: int | None = None  # fixed context seed; None derives one from the run
    redraw: str = "per-rep"  # "per-rep" | "per-plan"

    @classmethod
    def parse(cls, text: str, redraw: str = "per-rep") -> ContextKind:
        from .costs import parse_kv
        kind, _, rest = text.partition(":")
        if kind == "uniform" and not rest:
            return cls("uniform", redraw=redraw)
        if kind == "random":
            opts = parse_kv(rest)
            if set(opts) - {"beta", "seed"}:
                raise ValueError(f"unknown random-context option in {text!r}")
            seed = int(opts["seed"]) if "seed" in opts else None
            return cls("random", float(opts.get("beta", 10.0)), seed, redraw)
        raise ValueError(f"bad experiment context {text!r} (use uniform or random:beta=B[,seed=S])")

    def build(self, m: int, c: int, master: int, d_idx: int, rep: int) -> CostContext:
        if self.kind == "uniform":
            return uniform_context(m, c)
        if self.seed is not None:
            seed = derive_seed(self.seed, d_idx, rep) if self.redraw == "per-rep" else self.seed
        elif self.redraw == "per-rep":
            seed = derive_seed(master, d_idx, rep, _CONTEXT)
        else:
            seed = derive_seed(master, d_idx, _CONTEXT)
        return random_context(m, c, self.beta, seed)


@dataclass
class ExperimentPlan:
    dataset_paths: list
    predictor_specs: list
    alphas: tuple = DEFAULT_ALPHAS
    repetitions: int = 4
    context_kind: ContextKind = field(default_factory=ContextKind)
    master_seed: int = 2

    def __post_init__(self):
        if not self.dataset_paths:
            raise ValueError("plan needs at least one dataset")
        if not self.predictor_specs:
            raise ValueError("plan needs at least one model")
        if not self.alphas or any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ValueError("alphas must be a non-empty subset of [0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        self.predictor_specs = [parse_spec(s) for s in self.predictor_specs]


def parse_spec(s) -> PredictorSpec:
    if isinstance(s, PredictorSpec):
        return s
    specs = split_model_list(s)
    if len(specs) != 1:
        raise ValueError(f"expected a single model spec, got {s!r}")
    return specs[0]


@dataclass(frozen=True)
class RunLabel:
    dataset: str
    alpha: float
    repetition: int


@dataclass
class MethodResultMatrix:
    """Test joint costs: one row per method, one column per run."""

    values: np.ndarray
    labels: list
    methods: tuple = METHODS

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.methods), len(self.labels)):
            raise ValueError("matrix shape does not match methods x runs")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("joint costs must be finite and non-negative")

    @property
    def datasets(self) -> list[str]:
        return list(dict.fromkeys(lab.dataset for lab in self.labels))

    @property
    def alphas(self) -> list[float]:
        return list(dict.fromkeys(lab.alpha for lab in self.labels))


@dataclass(frozen=True)
class RepetitionResult:
    alphas: tuple
    test_jc: np.ndarray  # (len(alphas), 5)
    validation_jc: np.ndarray  # (len(alphas), 5)
    choices: tuple  # per alpha, per method: (model_id, bitstring)


def unique_model_ids(specs: Sequence[PredictorSpec]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for s in specs:
        k = seen.get(s.model_id, 0)
        seen[s.model_id] = k + 1
        out.append(s.model_id if k == 0 else f"{s.model_id}#{k + 1}")
    return out


def run_repetition(dataset: Dataset, predictor_specs, ctx: CostContext, alphas: Sequence[float],
                   seed: int) -> RepetitionResult:
    """One split of ``dataset``; every alpha reuses the same trained models and points."""
    specs = [parse_spec(s) for s in predictor_specs]
    if dataset.n < 3:
        raise ExperimentError(f"dataset {dataset.name!r} has {dataset.n} rows; need at least 3 "
                              "for a train/validation/test split")
    if ctx.m != dataset.m or ctx.c != dataset.c:
        raise ExperimentError("context does not match the dataset")
    work, test = split_dataset(dataset, 2.0 / 3.0, derive_seed(seed, _SPLIT))
    train, validation = split_dataset(work, 0.5, derive_seed(seed, _WORK))

    models = []
    for k, (spec, mid) in enumerate(zip(specs, unique_model_ids(specs))):
        p = spec.train(train, seed=derive_seed(seed, _MODEL, k))
        p.model_id = mid
        models.append(p)
    by_id = {p.model_id: p for p in models}
    caches = {p.model_id: {} for p in models}
    rnd_seed = derive_seed(seed, _RND)

    full = [pt for p in models for pt in full_enumeration(p, validation, ctx, cache=caches[p.model_id])]
    bmc = [pt for p in models for pt in backward_guided(p, validation, ctx, "MC", cache=caches[p.model_id])]
    btc = [pt for p in models for pt in backward_guided(p, validation, ctx, "TC", cache=caches[p.model_id])]
    rnd = [pt for p in models for pt in monte_carlo(p, validation, ctx, None, rnd_seed, cache=caches[p.model_id])]

    test_jc = np.zeros((len(alphas), len(METHODS)))
    val_jc = np.zeros((len(alphas), len(METHODS)))
    choices = []
    for a_idx, alpha in enumerate(alphas):
        bjc = [pt for p in models
               for pt in backward_guided(p, validation, ctx, "JC", alpha=alpha, cache=caches[p.model_id])]
        row = []
        for k, pts in enumerate((full, bmc, btc, bjc, rnd)):
            best = best_point_for_alpha(pts, alpha)
            val_jc[a_idx, k] = best.jc(alpha)
            cm = evaluate_confusion(by_id[best.model_id], mask_features(test, best.config))
            mc = avg_misclassification_cost(cm, ctx)
            test_jc[a_idx, k] = joint_cost(mc, test_cost_of_config(best.config, ctx), alpha)
            row.append((best.model_id, best.config.bitstring))
        choices.append(tuple(row))
        if np.any(val_jc[a_idx, 0] > val_jc[a_idx, 1:] + VALIDATION_TOL):
            raise ExperimentError(f"Full lost on validation at alpha={alpha}: {val_jc[a_idx]}")
    return RepetitionResult(tuple(alphas), test_jc, val_jc, tuple(choices))


def run_single(dataset: Dataset, predictor_specs, ctx: CostContext, alpha: float, seed: int) -> np.ndarray:
    """Test joint costs of the five methods (Full, BMC, BTC, BJC, RND) for one alpha."""
    return run_repetition(dataset, predictor_specs, ctx, [alpha], seed).test_jc[0]


def run_plan(plan: ExperimentPlan, jobs: int = 1, datasets: Sequence[Dataset] | None = None) -> MethodResultMatrix:
    if datasets is None:
        datasets = [load_dataset(p) for p in plan.dataset_paths]
    tasks = [(d_idx, rep) for d_idx in range(len(datasets)) for rep in range(plan.repetitions)]

    def work(task):
        d_idx, rep = task
        d = datasets[d_idx]
        ctx = plan.context_kind.build(d.m, d.c, plan.master_seed, d_idx, rep)
        try:
            return run_repetition(d, plan.predictor_specs, ctx, plan.alphas,
                                  derive_seed(plan.master_seed, d_idx, rep))
        except Exception as e:
            raise ExperimentError(f"run dataset={d.name!r} repetition={rep}: {e}") from e

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = dict(zip(tasks, pool.map(work, tasks)))
    else:
        results = {t: work(t) for t in tasks}

    columns, labels = [], []
    for d_idx, d in enumerate(datasets):
        name = d.name or f"dataset{d_idx + 1}"
        for a_idx, alpha in enumerate(plan.alphas):
            for rep in range(plan.repetitions):
                columns.append(results[(d_idx, rep)].test_jc[a_idx])
                labels.append(RunLabel(name, float(alpha), rep))
        log.info("finished %s", name)
    return MethodResultMatrix(np.array(columns).T, labels)


@dataclass(frozen=True)
class SummaryTable:
    keys: list  # row keys (dataset names or alphas)
    mean: np.ndarray  # (rows, methods)
    sd: np.ndarray
    methods: tuple = METHODS


def _group(mrm: MethodResultMatrix, keyfn) -> SummaryTable:
    keys = list(dict.fromkeys(keyfn(lab) for lab in mrm.labels))
    mean = np.zeros((len(keys), len(mrm.methods)))
    sd = np.zeros_like(mean)
    for r, key in enumerate(keys):
        cols = [i for i, lab in enumerate(mrm.labels) if keyfn(lab) == key]
        block = mrm.values[:, cols]
        mean[r] = block.mean(axis=1)
        sd[r] = block.std(axis=1, ddof=1) if len(cols) > 1 else 0.0
    return SummaryTable(keys, mean, sd, mrm.methods)


def aggregate_by_dataset(mrm: MethodResultMatrix) -> SummaryTable:
    return _group(mrm, lambda lab: lab.dataset)


def aggregate_by_alpha(mrm: MethodResultMatrix) -> SummaryTable:
    return _group(mrm, lambda lab: lab.alpha)


@dataclass(frozen=True)
class CellTable:
    keys: list  # (dataset, alpha) per row
    means: np.ndarray  # (cells, methods)
    avg: np.ndarray  # column means
    methods: tuple = METHODS


def per_cell_means(mrm: MethodResultMatrix) -> CellTable:
    """Mean over repetitions per (dataset, alpha) cell, plus the column averages."""
    keys = list(dict.fromkeys((lab.dataset, lab.alpha) for lab in mrm.labels))
    means = np.zeros((len(keys), len(mrm.methods)))
    for r, key in enumerate(keys):
        cols = [i for i, lab in enumerate(mrm.labels) if (lab.dataset, lab.alpha) == key]
        means[r] = mrm.values[:, cols].mean(axis=1)
    return CellTable(keys, means, means.mean(axis=0), mrm.methods)


# --- CSV output ------------------------------------------------------------

def fmt(v: float) -> str:
    return repr(float(v))


def _csv(rows) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def run_column(lab: RunLabel) -> str:
    return f"{lab.dataset}|{fmt(lab.alpha)}|{lab.repetition}"


def mdat_csv(mrm: MethodResultMatrix) -> str:
    """Raw matrix: one row per method, one column per (dataset, alpha, repetition) run."""
    rows = [["method", *(run_column(lab) for lab in mrm.labels)]]
    for k, m in enumerate(mrm.methods):
        rows.append([m, *(fmt(v) for v in mrm.values[k])])
    return _csv(rows)


def summary_csv(table: SummaryTable, key_name: str) -> str:
    head = [key_name]
    for m in table.methods:
        head += [f"{m}_mean", f"{m}_sd"]
    rows = [head]
    for r, key in enumerate(table.keys):
        row = [fmt(key) if isinstance(key, float) else key]
        for k in range(len(table.methods)):
            row += [fmt(table.mean[r, k]), fmt(table.sd[r, k])]
        rows.append(row)
    return _csv(rows)


def cells_csv(cells: CellTable) -> str:
    rows = [["dataset", "alpha", *cells.methods]]
    for (d, a), vals in zip(cells.keys, cells.means):
        rows.append([d, fmt(a), *(fmt(v) for v in vals)])
    rows.append(["Avg", "", *(fmt(v) for v in cells.avg)])
    return _csv(rows)


def read_mdat_csv(text: str) -> MethodResultMatrix:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or rows[0][0] != "method":
        raise ValueError("mdat file must start with a method column")
    labels = []
    for col in rows[0][1:]:
        d, a, r = col.rsplit("|", 2)
        labels.append(RunLabel(d, float(a), int(r)))
    methods = tuple(r[0] for r in rows[1:])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return MethodResultMatrix(values, labels, methods)


def read_cells_csv(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Row labels, method names and the (cells x methods) matrix; the Avg row is dropped."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(lines)
    head = next(reader)
    if len(head) < 3 or head[:2] != ["dataset", "alpha"]:
        raise ValueError("cells file must start with dataset,alpha columns")
    names, rows = [], []
    for row in reader:
        if row[0] in ("Avg", "AR"):
            continue
        if len(row) != len(head):
            raise ValueError(f"cells row {row!r} has {len(row)} fields, expected {len(head)}")
        names.append(f"{row[0]}@{row[1]}")
        vals = [float(v) for v in row[2:]]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite value in cells row {row!r}")
        rows.append(vals)
    if not rows:
        raise ValueError("cells file has no data rows")
    return names, head[2:], np.array(rows)


def write_outputs(mrm: MethodResultMatrix, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "mdat.csv": mdat_csv(mrm),
        "by_dataset.csv": summary_csv(aggregate_by_dataset(mrm), "dataset"),
        "by_alpha.csv": summary_csv(aggregate_by_alpha(mrm), "alpha"),
        "cells.csv": cells_csv(per_cell_means(mrm)),
    }
    written = []
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
        written.append(out / name)
    return written
