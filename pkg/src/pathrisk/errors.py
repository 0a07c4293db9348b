"""Exception hierarchy shared by the library and the CLI."""


class PathRiskError(Exception):
    """Base class for every error raised by this package."""


class InvalidShapeError(PathRiskError, ValueError):
    """A disk with a non-positive or non-finite radius or center."""


class CovarianceError(PathRiskError, ValueError):
    """A covariance matrix that is not symmetric positive definite."""


class DomainError(PathRiskError, ValueError):
    """A curve parameter outside [0, 1] or outside a scenario's range."""


class RegularityError(PathRiskError, ValueError):
    """The curve tangent vanishes where a unit normal is needed."""


class QuadratureError(PathRiskError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance.

    The best available estimate and its error bound travel with the
    exception so callers can decide whether it is good enough.
    """

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class ResourceError(PathRiskError, MemoryError):
    """A discretization would exceed its configured size cap."""


class ConfigError(PathRiskError, ValueError):
    """A configuration file is malformed or inconsistent."""
