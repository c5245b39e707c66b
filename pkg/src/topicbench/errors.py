"""Exception types shared across the toolkit."""


class TopicbenchError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TopicbenchError):
    """Invalid configuration value (CLI maps this to exit code 1)."""


class DataFormatError(TopicbenchError):
    """Malformed or inconsistent input data (CLI maps this to exit code 2)."""
