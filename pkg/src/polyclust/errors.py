class ConfigError(ValueError):
    """Invalid or unsupported configuration."""


class InfeasibleError(ValueError):
    """The constraints admit no solution (e.g. cardinality bounds)."""
