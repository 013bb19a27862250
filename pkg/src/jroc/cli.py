"""``jroc`` command line: search, choose, hull, experiment, stats, plot.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Tabular files are CSV with a leading ``# schema=1`` line.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .analysis import best_point_for_alpha, convex_hull, dominance_regions
from .costs import parse_context_spec
from .dataset import Dataset, DatasetError, bundled_path, load_dataset, split_dataset
from .lattice import DEFAULT_FULL_CAP, SearchMethod, lattice_key, points_to_csv, read_points_csv, search
from .predictors import split_model_list
from .rng import derive_seed

log = logging.getLogger("jroc")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
DEFAULT_MODELS = "majority,knn:k=5,tree:depth=6,bag:rounds=10,depth=6"
SEED_ENV = "JROC_SEED"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= a <= 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {a}")
    return a


def _alphas(text: str) -> list[float]:
    vals = _floats(text)
    for a in vals:
        if not 0.0 <= a <= 1.0:
            raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {a}")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def resolve_seed(seed: int | None, default: int = 0) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return default
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def resolve_data_path(name: str) -> Path:
    """A file path, or the name of a bundled dataset (iris, diabetes, glass)."""
    p = Path(name)
    if p.exists():
        return p
    if not p.suffix and os.sep not in name:
        try:
            return bundled_path(name)
        except FileNotFoundError:
            pass
    raise DataError(f"dataset not found: {name}")


def _load(name: str) -> Dataset:
    path = resolve_data_path(name)
    try:
        return load_dataset(path)
    except (DatasetError, OSError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: {e}") from None


def _models(text: str):
    try:
        return split_model_list(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read_points(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror or e}") from None
    try:
        return read_points_csv(text)
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        from .plotting import write_atomic
        write_atomic(out, text)


def _by_model(points) -> dict:
    groups: dict = {}
    for p in points:
        groups.setdefault(p.model_id, []).append(p)
    return groups


# --- subcommands -------------------------------------------------------------

def cmd_search(args) -> int:
    seed = resolve_seed(args.seed)
    specs = _models(args.models)
    try:
        method = SearchMethod.parse(args.method, args.sample_size, derive_seed(seed, 4))
    except ValueError as e:
        raise UsageError(str(e)) from None
    data = _load(args.data)
    try:
        ctx = parse_context_spec(args.context, data.m, data.c, seed)
    except OSError as e:
        raise DataError(f"context file: {e.strerror or e}") from None
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.alpha is not None:
        ctx = ctx.with_alpha(args.alpha)
    try:
        train, validation = split_dataset(data, args.train_fraction, derive_seed(seed, 1))
    except DatasetError as e:
        raise DataError(str(e)) from None
    except ValueError as e:
        raise UsageError(str(e)) from None
    if method.name == "Full" and data.m > args.max_full:
        raise UsageError(f"m={data.m} exceeds --max-full {args.max_full}; use bmc, btc, bjc or rnd")
    if method.name == "RND" and method.sample_size is not None and method.sample_size > 2 ** data.m:
        raise UsageError(f"--sample-size {method.sample_size} exceeds the 2**{data.m} configurations")

    from .experiment import unique_model_ids
    points = []
    for k, (spec, mid) in enumerate(zip(specs, unique_model_ids(specs))):
        p = spec.train(train, seed=derive_seed(seed, 3, k))
        p.model_id = mid
        ps = search(p, validation, ctx, method, alpha=ctx.alpha, jobs=args.jobs, cap=args.max_full)
        points.extend(ps.points)
        log.info("%s: %d points", p.model_id, len(ps))
    _emit(points_to_csv(points), args.out)
    return EXIT_OK


def cmd_choose(args) -> int:
    points = _read_points(args.points)
    best = best_point_for_alpha(points, args.alpha)
    sys.stdout.write("model_id,config_bitstring,tc,mc,jc\n")
    sys.stdout.write(f"{best.model_id},{best.config.bitstring},{best.tc!r},{best.mc!r},{best.jc(args.alpha)!r}\n")
    return EXIT_OK


def cmd_hull(args) -> int:
    groups = _by_model(_read_points(args.points))
    hulls = {m: convex_hull(pts) for m, pts in groups.items()}
    _emit(points_to_csv([v for h in hulls.values() for v in h.vertices]), args.out)
    if args.regions:
        lines = ["# schema=1", "alpha_lo,alpha_hi,model_id"]
        lines += [f"{r.alpha_lo!r},{r.alpha_hi!r},{r.model_id}" for r in dominance_regions(hulls)]
        _emit("\n".join(lines) + "\n", args.regions)
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiment import ContextKind, ExperimentPlan, run_plan, write_outputs
    seed = resolve_seed(args.seed, default=2)
    specs = _models(args.models)
    try:
        ctx_kind = ContextKind.parse(args.context, args.context_redraw)
    except ValueError as e:
        raise UsageError(str(e)) from None
    names = [t.strip() for t in args.data.split(",") if t.strip()]
    if not names:
        raise UsageError("--data lists no datasets")
    datasets = [_load(n) for n in names]
    plan = ExperimentPlan([str(resolve_data_path(n)) for n in names], specs, tuple(args.alphas),
                          args.reps, ctx_kind, seed)
    mrm = run_plan(plan, jobs=args.jobs, datasets=datasets)
    written = write_outputs(mrm, args.out)
    if not args.no_figures:
        from .report import write_experiment_figures
        written += write_experiment_figures(mrm, args.out)
    for p in written:
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_stats(args) -> int:
    from .experiment import read_cells_csv
    from .rank_stats import nemenyi_q, significance_report
    try:
        text = Path(args.cells).read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {args.cells}: {e.strerror or e}") from None
    try:
        _, methods, values = read_cells_csv(text)
    except ValueError as e:
        raise DataError(f"{args.cells}: {e}") from None
    q = args.q
    if q is None:
        try:
            q = nemenyi_q(len(methods), args.significance)
        except ValueError as e:
            raise UsageError(f"{e}; pass --q explicitly") from None
    report = significance_report(values, methods, q, args.critical)
    if args.format in ("text", "both"):
        sys.stdout.write(report.to_text())
    if args.format == "both":
        sys.stdout.write("\n")
    if args.format in ("csv", "both"):
        sys.stdout.write(report.to_csv())
    if args.figure:
        from .report import plot_critical_difference
        Path(args.figure).parent.mkdir(parents=True, exist_ok=True)
        plot_critical_difference(report, args.figure)
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import render_cost_evolution, render_jroc, write_atomic
    points = _read_points(args.points)
    groups = _by_model(points)
    if args.kind == "evolution":
        model = args.model or next(iter(groups))
        if model not in groups:
            raise UsageError(f"model {model!r} not in {args.points} (have: {', '.join(groups)})")
        pts = sorted(groups[model], key=lambda p: lattice_key(p.config))
        title = args.title or f"MC, TC and JC for {model}"
        svg = render_cost_evolution(pts, args.alpha, title=title)
    else:
        hulls = {m: convex_hull(pts) for m, pts in groups.items()} if args.hulls else None
        svg = render_jroc(groups, hulls, args.iso or (), title=args.title or "JROC plot")
    write_atomic(args.out, svg)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="jroc", formatter_class=fmt,
                     description="Reframe classifiers to test/misclassification cost contexts "
                                 "by masking feature subsets, and pick models in JROC space.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    seed_help = f"random seed (falls back to ${SEED_ENV}, then 0)"

    p = sub.add_parser("search", formatter_class=fmt, help="evaluate feature configurations, write a points CSV",
                       description="Train models on a seeded split and write one (TC, MC) point per "
                                   "model and visited feature configuration.")
    p.add_argument("--data", required=True, help="dataset CSV (class in the last column) or bundled name")
    p.add_argument("--models", default=DEFAULT_MODELS, help="comma-separated model specs")
    p.add_argument("--context", default="uniform", help="uniform | random:beta=B[,seed=S] | file:PATH")
    p.add_argument("--method", default="full", help="full | bmc | btc | bjc | rnd")
    p.add_argument("--seed", type=int, default=None, help=seed_help)
    p.add_argument("--sample-size", type=_positive, default=None,
                   help="rnd sample size (default m(m+1)/2+1)")
    p.add_argument("--alpha", type=_alpha, default=None, help="alpha override for the context (guides bjc)")
    p.add_argument("--train-fraction", type=float, default=2.0 / 3.0,
                   help="share of rows used for training; the rest is validation")
    p.add_argument("--out", default="-", help="output points CSV (- for stdout)")
    p.add_argument("--jobs", type=_positive, default=1, help="concurrent configuration evaluations")
    p.add_argument("--max-full", type=_positive, default=DEFAULT_FULL_CAP,
                   help="largest m allowed for full enumeration")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("choose", formatter_class=fmt, help="print the min-JC point for an alpha")
    p.add_argument("--points", required=True, help="points CSV")
    p.add_argument("--alpha", type=_alpha, required=True, help="weight of MC in JC")
    p.set_defaults(func=cmd_choose)

    p = sub.add_parser("hull", formatter_class=fmt, help="per-model JROC convex hulls")
    p.add_argument("--points", required=True, help="points CSV")
    p.add_argument("--out", default="-", help="hull vertices as a points CSV (- for stdout)")
    p.add_argument("--regions", default=None, help="also write alpha dominance regions to this CSV")
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("experiment", formatter_class=fmt, help="compare Full/BMC/BTC/BJC/RND across datasets",
                       description="Run the method comparison and write mdat.csv, by_dataset.csv, "
                                   "by_alpha.csv, cells.csv and summary figures.")
    p.add_argument("--data", required=True, help="comma-separated dataset CSVs or bundled names")
    p.add_argument("--models", default=DEFAULT_MODELS, help="comma-separated model specs")
    p.add_argument("--alphas", type=_alphas, default=[0.1, 0.3, 0.5, 0.7, 0.9], help="comma-separated alphas")
    p.add_argument("--reps", type=_positive, default=4, help="repetitions per dataset")
    p.add_argument("--context", default="uniform", help="uniform | random:beta=B[,seed=S]")
    p.add_argument("--context-redraw", choices=("per-rep", "per-plan"), default="per-rep",
                   help="draw a random context per repetition or once per dataset")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (falls back to ${SEED_ENV}, then 2)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--jobs", type=_positive, default=1, help="concurrent (dataset, repetition) runs")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG summary figures")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", formatter_class=fmt, help="Friedman and Nemenyi tests on a cells CSV")
    p.add_argument("--cells", required=True, help="cells CSV (dataset,alpha,method columns...)")
    p.add_argument("--q", type=float, default=None, help="Nemenyi q_alpha (default: bundled table value)")
    p.add_argument("--significance", type=float, choices=(0.05, 0.10), default=0.05,
                   help="level used to look up q when --q is absent")
    p.add_argument("--critical", type=float, default=None, help="Friedman critical value to test against")
    p.add_argument("--format", choices=("text", "csv", "both"), default="both", help="report format")
    p.add_argument("--figure", default=None, help="write a critical-difference PNG here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plot", formatter_class=fmt, help="render a points CSV as SVG")
    p.add_argument("--points", required=True, help="points CSV")
    p.add_argument("--kind", choices=("jroc", "evolution"), default="jroc", help="chart type")
    p.add_argument("--hulls", action="store_true", help="draw per-model convex hulls (jroc)")
    p.add_argument("--iso", type=_alphas, default=None, help="comma-separated isometric alphas (jroc)")
    p.add_argument("--model", default=None, help="model to plot (evolution; default first in file)")
    p.add_argument("--alpha", type=_alpha, default=0.5, help="alpha of the JC series (evolution)")
    p.add_argument("--title", default=None, help="chart title")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"jroc {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"jroc {args.command}: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (DatasetError, OSError) as e:
        print(f"jroc {args.command}: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"jroc {args.command}: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
