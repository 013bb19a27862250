"""Cost-context reframing of classifiers by masking feature subsets, with JROC analysis."""

from .analysis import Hull, best_point_for_alpha, convex_hull, dominance_regions, isometric_slope
from .costs import CostContext, CostPoint, joint_cost, random_context, uniform_context
from .dataset import (Dataset, DatasetError, FeatureConfig, bundled_path, load_dataset, mask_features,
                      split_dataset)
from .lattice import backward_guided, full_enumeration, monte_carlo, search
from .predictors import parse_predictor_spec
from .rank_stats import friedman_statistic, nemenyi_cd, significance_report

__version__ = "0.1.0"

__all__ = [
    "CostContext", "CostPoint", "Dataset", "DatasetError", "FeatureConfig", "Hull",
    "backward_guided", "best_point_for_alpha", "bundled_path", "convex_hull", "dominance_regions",
    "friedman_statistic", "full_enumeration", "isometric_slope", "joint_cost", "load_dataset",
    "mask_features", "monte_carlo", "nemenyi_cd", "parse_predictor_spec", "random_context",
    "search", "significance_report", "split_dataset", "uniform_context",
]
