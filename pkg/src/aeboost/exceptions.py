"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A model, ensemble or run was configured with invalid settings."""


class DataError(ValueError):
    """Input data violates a contract (ingestion failure, bad shape, bad range)."""


class MetricUndefinedError(ValueError):
    """The requested metric has no defined value for the given input."""
