"""Exception hierarchy.

Data problems derive from :class:`DataError`, solver trouble from
:class:`SolverError`, and model-level refusals from :class:`ModelError`.
The CLI maps these families onto its exit codes.
"""


class MaxRgmError(Exception):
    """Base class for every error raised by this package."""


class DataError(MaxRgmError, ValueError):
    pass


class NonFiniteValue(DataError):
    pass


class NegativeValue(DataError):
    pass


class ZeroVector(DataError):
    pass


class DuplicateName(DataError):
    pass


class EmptyDataset(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class InvalidIds(DataError):
    pass


class SolverError(MaxRgmError, RuntimeError):
    pass


class NumericalBreakdown(SolverError):
    pass


class NotConverged(SolverError):
    pass


class ModelError(MaxRgmError):
    pass


class NotInTechnology(ModelError):
    pass


class UnboundedExpansion(ModelError):
    """An output can be expanded without limit; the frontier assumption fails."""


class AssumptionViolated(ModelError):
    pass


class AssumptionUnverified(ModelError):
    """The sufficient facet-positivity condition did not pass."""


class Unbounded(ModelError):
    pass


class ZeroOutputIndex(ModelError, IndexError):
    pass


class ZeroInputIndex(ModelError, IndexError):
    pass


class NoOptimum(ModelError):
    pass


class OutOfRange(ModelError, ValueError):
    pass


class InstanceTooLarge(ModelError):
    pass


class DivisionByZeroNormal(ModelError, ZeroDivisionError):
    pass
