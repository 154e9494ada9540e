"""Exception hierarchy.

The CLI maps each class onto a distinct exit code, so library code should
raise the most specific one that applies.
"""


class DephasingLabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DephasingLabError, ValueError):
    """Malformed or schema-violating run configuration."""


class ValidationError(DephasingLabError, ValueError):
    """An input object breaks a structural invariant (hermiticity, norm, shape)."""


class NumericalPreconditionError(DephasingLabError, ValueError):
    """A numerical routine was called outside its domain of validity."""
