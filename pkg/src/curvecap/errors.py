"""Exception hierarchy.  Each class carries the CLI exit code it maps to."""


class CurvecapError(Exception):
    exit_code = 4


class InputError(CurvecapError, ValueError):
    """Malformed or unusable input (bad spec, parse failure, invalid sample)."""

    exit_code = 1


class EmptyVarietyError(InputError):
    """The ideal is the unit ideal."""


class NotACurveError(InputError):
    """The Hilbert function does not stabilise to a positive constant slope."""


class BudgetExceeded(CurvecapError):
    """Buchberger pair/element budget exhausted."""

    exit_code = 1


class HypothesisViolation(CurvecapError):
    """A structural assumption on the curve at infinity fails.

    ``check`` names the failed check, e.g. ``"z1_identity"`` or ``"simple_eigenvalues"``.
    """

    exit_code = 2

    def __init__(self, check: str, message: str):
        super().__init__(f"{check}: {message}")
        self.check = check


class NumericFailure(CurvecapError, ArithmeticError):
    """Non-convergence, rank deficiency or another floating-point breakdown."""

    exit_code = 4


class RankDeficiencyError(NumericFailure):
    def __init__(self, column: int, message: str = ""):
        super().__init__(message or f"rank deficient at column {column}")
        self.column = column
