"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid parameters, configuration or observation data."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or lost all precision.

    The message names the quantity (and, for nested quadratures, the axis)
    that failed, so callers never receive a silently wrong value.
    """
