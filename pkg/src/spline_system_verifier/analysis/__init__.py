"""Analysis operators on orthonormal spline expansions."""

from .operators import (
    DEFAULT_SUBDIVISION,
    LAMBDA_POINTS,
    SystemSampler,
    analysis_grid,
    cell_nodes,
    domination_check,
    expansion_values,
    guarded_ratio,
    hardy_littlewood,
    lambda_sweep,
    level_sets,
    maximal_partial_sum,
    sample_function,
    square_function,
)
from .remez import remez_check, remez_random_trials, sup_norm
from .technical import (
    FAR_FACTORS,
    lemma_techn_inequalities,
    polynomial_projection,
    tripled,
)

__all__ = [
    "DEFAULT_SUBDIVISION",
    "LAMBDA_POINTS",
    "FAR_FACTORS",
    "SystemSampler",
    "analysis_grid",
    "cell_nodes",
    "domination_check",
    "expansion_values",
    "guarded_ratio",
    "hardy_littlewood",
    "lambda_sweep",
    "level_sets",
    "maximal_partial_sum",
    "sample_function",
    "square_function",
    "remez_check",
    "remez_random_trials",
    "sup_norm",
    "lemma_techn_inequalities",
    "polynomial_projection",
    "tripled",
]
