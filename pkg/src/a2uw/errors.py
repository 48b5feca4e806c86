"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function (pole, nonpositive x, ...)."""


class ConfigurationError(ValueError):
    """Parameters that cannot be evaluated as given (bad contour, bad preset)."""


class NumericalFailure(ArithmeticError):
    """A computed quantity left its sanity window (negative density, P > 1)."""


class AccuracyWarning(UserWarning):
    """Quadrature could not certify the requested tolerance."""


class InsufficientSamplesWarning(UserWarning):
    """Monte Carlo estimate is zero but the sample size cannot resolve p."""
