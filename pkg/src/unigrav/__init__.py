"""General-equilibrium counterfactuals for universal gravity trade models."""

__version__ = "0.1.0"

from .domain import (  # noqa: E402
    Elasticities,
    LocationIndex,
    Marginals,
    Mode,
    ShiftVectors,
    Solution,
    SolverConfig,
    StaticsBundle,
    validate_inputs,
)
from .solver import compute_marginals, residuals, solve  # noqa: E402
from .statics import compute_statics  # noqa: E402
from .report import growth_table, render_table  # noqa: E402

__all__ = [
    "Elasticities", "LocationIndex", "Marginals", "Mode", "ShiftVectors", "Solution",
    "SolverConfig", "StaticsBundle", "validate_inputs", "compute_marginals", "residuals",
    "solve", "compute_statics", "growth_table", "render_table",
]
