"""Exception hierarchy for driftcluster.

Every error the package raises deliberately derives from DriftclusterError so
callers can catch one base class.  The CLI maps ConfigError and usage problems
to exit code 1; failed verification checks are not exceptions (exit code 2).
"""


class DriftclusterError(Exception):
    """Base class for all package errors."""


class ValidationError(DriftclusterError, ValueError):
    """A parameter or argument is outside its documented range."""


class StructuralError(DriftclusterError, ValueError):
    """Array shapes or lengths are inconsistent with the grid."""


class SingularSystemError(DriftclusterError, ArithmeticError):
    """A tridiagonal solve hit a zero pivot."""


class CflViolationError(DriftclusterError, RuntimeError):
    """A step was attempted with dt above the positivity/stability limit."""


class DivergenceError(DriftclusterError, RuntimeError):
    """The solution became non-finite or the step size collapsed."""


class ConfigError(DriftclusterError, ValueError):
    """One or more problems in a run configuration.

    Collects every problem found in a single pass so a bad file is reported
    at once rather than key by key.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        msg = "invalid configuration:\n" + "\n".join(
            f"  - {p}" for p in self.problems
        )
        super().__init__(msg)
