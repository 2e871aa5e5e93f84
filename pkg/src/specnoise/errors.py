"""Exception types shared across the package."""


class SpecnoiseError(ValueError):
    """Base class for domain errors raised by this package."""


class IsolatedVertexError(SpecnoiseError):
    """A graph row has no weight anywhere it is required to."""


class RankDeficiencyError(SpecnoiseError):
    """An unregularized solve hit a numerically singular Gram matrix."""


class ConfigError(SpecnoiseError):
    """An experiment configuration failed schema validation."""
