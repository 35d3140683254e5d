"""Package-wide error types, kept separate so every layer can import them."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""


class NumericalGuardError(RuntimeError):
    """A runtime sanity check on the numerics failed (e.g. a metric that is
    not positive semidefinite within tolerance)."""
