"""Exception types raised across the package."""


class TensorAlignError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TensorAlignError, ValueError):
    pass


class DegenerateStepError(TensorAlignError, ArithmeticError):
    """A retraction was asked to normalize a zero row or a rank-deficient matrix."""


class DivergenceError(TensorAlignError, ArithmeticError):
    def __init__(self, iteration, value):
        self.iteration = iteration
        self.value = value
        super().__init__(f"objective became non-finite ({value}) at iteration {iteration}")


class FormatError(TensorAlignError, ValueError):
    pass


class CorruptionError(TensorAlignError, ValueError):
    pass
