"""Error taxonomy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
ProviderError -> 3.
"""


class TopicflowError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 2


class ConfigError(TopicflowError):
    """Invalid configuration or parameters (caught before any data work)."""

    exit_code = 1


class DataError(TopicflowError):
    """Input data violates a contract (bad records, empty slices, ...)."""

    exit_code = 2


class ProviderError(TopicflowError):
    """An embedding provider failed (missing keyword, bad dim, unreachable)."""

    exit_code = 3
