"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2 (usage),
DataError -> 3, the numerical family -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration or unsupported option combination."""


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(ArithmeticError):
    """A numerical routine failed or produced non-finite values."""


class NotSpdError(NumericalError):
    """Matrix expected to be symmetric positive definite is not."""


class IdentifiabilityError(NumericalError):
    """Columns required to be linearly independent are not."""
