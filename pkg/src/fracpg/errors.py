"""Exception hierarchy shared by all modules.

The CLI maps these classes onto disjoint exit codes, so library code raises
the most specific class available instead of a bare ``ValueError``.
"""


class FracPGError(Exception):
    """Base class for all package errors."""


class DomainError(FracPGError, ValueError):
    """Argument outside the domain of a special function (e.g. a Gamma pole)."""


class AccuracyError(FracPGError, ArithmeticError):
    """A series failed to reach its tolerance within the hard term cap."""


class GridMismatchError(FracPGError, ValueError):
    """Series arithmetic between incompatible grids, or an off-grid shift."""


class ProblemValidationError(FracPGError, ValueError):
    """A problem document violates the model constraints.

    ``issues`` holds ``(field_path, message)`` pairs, one per violation.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        text = "; ".join(f"{path}: {msg}" for path, msg in self.issues)
        super().__init__(text or "invalid problem")


class NumericError(FracPGError, ArithmeticError):
    """Numerical breakdown (zero pivot, non-finite coefficient, no convergence)."""
