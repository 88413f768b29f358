"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A family or engine parameter is outside its allowed range."""


class DegenerateCurveError(ValueError):
    """A trade-off curve cannot support the requested operation."""


class DegenerateVarianceError(ValueError):
    """The log-likelihood ratio has non-positive variance."""


class AsymmetricCurveError(ValueError):
    """An operation defined for symmetric curves received an asymmetric one."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested absolute error."""


class BracketingError(RuntimeError):
    """No sign change was found when bracketing a root."""


class GridTruncationWarning(UserWarning):
    """The dual grid misses probability mass large enough to matter."""
