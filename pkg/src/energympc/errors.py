"""Exception types shared across the library."""


class ShapeError(ValueError):
    """Array dimensions do not match what an operation requires."""


class NumericError(ArithmeticError):
    """A value that must be finite contains NaN or Inf, or a computation diverged."""


class ContractError(ValueError):
    """An operation was called in a way that violates its contract (empty batch,
    non-scalar output where a scalar is required, and similar)."""


class ConfigError(ValueError):
    """A configuration value or file is invalid (unknown key, bad range, bad kind)."""
