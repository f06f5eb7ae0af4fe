"""Exception hierarchy.

The CLI maps these onto exit statuses: usage problems exit 1, bad data
exits 2, numeric/training failures exit 3.
"""


class ChanpredError(Exception):
    """Base class for all errors raised by chanpred."""


class InvalidInputError(ChanpredError, ValueError):
    """An argument or data series violates an operation's preconditions."""


class DataFormatError(InvalidInputError):
    """A trace, transfer-function or model file could not be parsed."""


class SingularFitError(InvalidInputError):
    """The log-distance regression has no unique solution."""


class DegenerateRangeError(InvalidInputError):
    """Samples with zero spread were passed where a range is needed."""


class ModelStateError(ChanpredError, RuntimeError):
    """A model was used before it was trained."""


class NumericError(ChanpredError, ArithmeticError):
    """A linear solve produced non-finite output."""


class TrainingDivergedError(NumericError):
    """Back-propagation produced a non-finite loss."""
