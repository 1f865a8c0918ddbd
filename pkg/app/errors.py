class PondwatchError(Exception):
    """Base class for every error raised by pondwatch services."""


class DomainError(PondwatchError, ValueError):
    """A numeric input lies outside the domain of the operation."""


class ValidationError(PondwatchError, ValueError):
    """A request or data set is malformed or empty."""


class NotFoundError(PondwatchError, LookupError):
    """A channel, fixture or class name does not exist."""


class AuthenticationError(PondwatchError):
    """A write key does not match any channel."""
