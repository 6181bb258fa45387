"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Tensor axes passed to a contraction do not line up."""


class NumericError(ArithmeticError):
    """Non-finite values encountered where finite data is required."""


class DataError(ValueError):
    """Input data set is incomplete or inconsistent."""


class ConfigError(ValueError):
    """Run configuration is invalid; message names the offending field."""


class SizeError(ValueError):
    """System size exceeds what a dense reference computation allows."""


class TruncationOverflowError(RuntimeError):
    """Accumulated truncation weight exceeded the configured abort threshold.

    Carries the last time stamp at which the evolved operator was still
    within budget.
    """

    def __init__(self, message, last_valid_time):
        super().__init__(message)
        self.last_valid_time = last_valid_time
