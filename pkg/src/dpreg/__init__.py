"""Differentially private simple linear and polynomial regression.

The package releases regression fits under pure epsilon-DP in the add/remove
model. Its core mechanism privatizes two simplex-transformed query groups
whose per-record contributions each sum to exactly 1, then recombines the
noisy sums into lower-variance refined sufficient statistics; baseline
mechanisms (noisy sufficient statistics, private Theil-Sen) and a Monte
Carlo evaluation harness round it out.
"""

from .data import Bounds, Dataset, Record, as_dataset, normalize
from .evaluate import (
    ExperimentGrid,
    ExperimentRow,
    METHOD_NAMES,
    RSS_VARIANCES,
    SS_VARIANCES,
    STATISTIC_ORDER,
    MetricResult,
    SetupConfig,
    VarianceRow,
    generate_setup,
    l1_error,
    l2_error,
    line_errors,
    reference_setup,
    run_experiment,
    simulate_baseline_stats,
    simulate_refined_stats,
    verify_variances,
)
from .mechanisms import (
    FALLBACK_ALPHA,
    FALLBACK_BETA,
    FitResult,
    PrivacyBudget,
    TheilSenHyper,
    denormalize_fit,
    dp_rss_fit,
    dp_ss_fit,
    dp_theil_sen_fit,
)
from .median import DegenerateInputWarning, dp_median, median_interval_probs
from .noise import (
    LaplaceScale,
    NoiseEvent,
    NoiseLedger,
    RandomStream,
    ZeroNoiseStream,
    laplace_sample,
)
from .polynomial import (
    PolyFitResult,
    dp_rss_poly_fit,
    poly_exact_groups,
    poly_group1_contribution,
    poly_group2_contribution,
    poly_refined_estimates,
)
from .simplex import (
    Group1Stats,
    Group2Stats,
    NoisyGroupStats,
    RefinedStats,
    added_record_delta,
    exact_group_stats,
    optimal_weights,
    privatize_groups,
    refine,
    sensitivity_oracle,
    simplex_transform_x,
    simplex_transform_xy,
)

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "Dataset",
    "DegenerateInputWarning",
    "ExperimentGrid",
    "ExperimentRow",
    "FALLBACK_ALPHA",
    "FALLBACK_BETA",
    "FitResult",
    "Group1Stats",
    "Group2Stats",
    "LaplaceScale",
    "METHOD_NAMES",
    "MetricResult",
    "NoiseEvent",
    "NoiseLedger",
    "NoisyGroupStats",
    "PolyFitResult",
    "PrivacyBudget",
    "RSS_VARIANCES",
    "RandomStream",
    "Record",
    "RefinedStats",
    "STATISTIC_ORDER",
    "SS_VARIANCES",
    "SetupConfig",
    "TheilSenHyper",
    "VarianceRow",
    "ZeroNoiseStream",
    "added_record_delta",
    "as_dataset",
    "denormalize_fit",
    "dp_median",
    "dp_rss_fit",
    "dp_rss_poly_fit",
    "dp_ss_fit",
    "dp_theil_sen_fit",
    "exact_group_stats",
    "generate_setup",
    "l1_error",
    "l2_error",
    "laplace_sample",
    "line_errors",
    "median_interval_probs",
    "normalize",
    "optimal_weights",
    "poly_exact_groups",
    "poly_group1_contribution",
    "poly_group2_contribution",
    "poly_refined_estimates",
    "privatize_groups",
    "reference_setup",
    "refine",
    "run_experiment",
    "sensitivity_oracle",
    "simplex_transform_x",
    "simplex_transform_xy",
    "simulate_baseline_stats",
    "simulate_refined_stats",
    "verify_variances",
]
