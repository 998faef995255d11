"""Exception types shared across the package.

The CLI maps these onto process exit codes: InfeasibleBudgetError (and its
subclasses) exits with 2, input and validation problems exit with 3, and
anything unexpected propagates as an ordinary traceback.
"""


class EncError(Exception):
    """Base class for all package errors."""


class NetworkFormatError(EncError):
    """A network description file or weight blob could not be parsed."""


class ValidationError(EncError):
    """An invariant on inputs or configuration is violated."""


class InfeasibleBudgetError(EncError):
    """The requested budget lies outside the achievable complexity range."""


class EmptyCandidateError(InfeasibleBudgetError):
    """Candidate extraction found no configuration inside the budget window."""


class EvaluatorError(EncError):
    """An accuracy evaluator failed while scoring a configuration."""
