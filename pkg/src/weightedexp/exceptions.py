"""Exception hierarchy shared by every module of the package."""


class WeightedExpError(Exception):
    """Base class for all package errors."""


class DomainError(WeightedExpError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class MomentUndefined(DomainError):
    """A requested population moment does not exist for these parameters."""


class EmptySample(DomainError):
    """The sample is empty or too small for the requested computation."""


class NonPositiveData(DomainError):
    """The sample contains a value that is not a positive finite real."""

    def __init__(self, index, value):
        self.index = int(index)
        self.value = value
        super().__init__(f"observation {self.index} is not a positive finite real: {value!r}")


class UnknownModel(DomainError):
    """No named distribution with this name is available."""


class NamedMismatch(DomainError):
    """The (spec, params) pair is not in the image of a named distribution."""


class EstimationFailed(WeightedExpError, ArithmeticError):
    """Closed-form estimation broke down on this sample.

    Attributes
    ----------
    reason : str
        Short tag naming the inequality that failed.
    quantity : float or None
        The offending value (discriminant, denominator, ...).
    """

    def __init__(self, message, reason="", quantity=None):
        super().__init__(message)
        self.reason = reason
        self.quantity = quantity


class BootstrapDegenerate(EstimationFailed):
    """Too few bootstrap replicates could be fitted."""


class OptimizationFailed(EstimationFailed):
    """The numerical likelihood maximizer did not converge.

    ``last`` holds the final iterate as a ``Params`` instance.
    """

    def __init__(self, message, last=None):
        super().__init__(message, reason="optimizer")
        self.last = last
