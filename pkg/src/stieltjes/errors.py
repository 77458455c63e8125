"""Exception hierarchy shared by all modules."""


class StieltjesError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(StieltjesError, ValueError):
    pass


class InvalidSubsetError(StieltjesError, ValueError):
    pass


class DomainError(StieltjesError, ValueError):
    pass


class LimitDivergenceError(StieltjesError, ArithmeticError):
    """An iterated one-sided limit did not stabilize.

    Attributes
    ----------
    residual : float
        Last observed difference between successive limit evaluations.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class MarginalDivergenceError(LimitDivergenceError):
    pass


class CornerDivergenceError(LimitDivergenceError):
    pass


class OrderSensitivityError(LimitDivergenceError):
    pass


class EvaluationError(StieltjesError, ArithmeticError):
    pass


class TagRequiredError(StieltjesError, ValueError):
    pass


class MarginalMeasureError(StieltjesError, ValueError):
    pass


class TransformError(StieltjesError, ValueError):
    pass


class HypothesisError(StieltjesError, ValueError):
    """Declared properties required by the operation are missing."""


class SpecError(StieltjesError, ValueError):
    """A function-spec document could not be parsed."""
