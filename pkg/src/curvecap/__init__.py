"""Directional Chebyshev constants and transfinite diameter of compact sets on algebraic curves."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceeded,
    CurvecapError,
    EmptyVarietyError,
    HypothesisViolation,
    InputError,
    NotACurveError,
    NumericFailure,
    RankDeficiencyError,
)

__all__ = [
    "__version__",
    "CurvecapError",
    "InputError",
    "EmptyVarietyError",
    "NotACurveError",
    "BudgetExceeded",
    "HypothesisViolation",
    "NumericFailure",
    "RankDeficiencyError",
]
