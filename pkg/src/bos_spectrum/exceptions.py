"""Exception types shared across the package."""


class ResonantEpsilonError(ValueError):
    """1/epsilon lies within tolerance of an integer where that is disallowed."""

    def __init__(self, epsilon, integer):
        self.epsilon = epsilon
        self.integer = integer
        super().__init__(
            f"1/ε ∈ Z: epsilon={epsilon!r} gives 1/epsilon = {integer} "
            "(within 1e-9 of an integer)"
        )


class ConvergenceError(RuntimeError):
    """An iterative method exhausted its budget.

    Attributes
    ----------
    index : int or None
        The offending row/eigenvalue/entry index, when one exists.
    """

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"{message} (index {index})")


class QuadratureError(ConvergenceError):
    """Quadrature did not reach the requested accuracy."""


class SingularNormalizationError(ArithmeticError):
    """A normalizing entry is numerically zero; the caller must not divide."""


class FitError(ValueError):
    """A regression or envelope fit has too little usable data."""


class FactorizationError(ArithmeticError):
    """A matrix that should be positive definite failed to factor."""
