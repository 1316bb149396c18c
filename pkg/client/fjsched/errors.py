"""Exceptions raised by the scheduling library."""


class SchedulingError(Exception):
    """Base class for all errors of the library."""


class InstanceError(SchedulingError, ValueError):
    """Instance or schedule does not satisfy the model invariants."""


class DocumentError(SchedulingError, ValueError):
    """JSON document could not be parsed.

    Args:
        message (str): Human readable reason.
        location (str, optional): Line or field where the problem was found.

    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super(DocumentError, self).__init__(message)


class PreconditionError(SchedulingError, ValueError):
    """Algorithm was called on an instance it does not support."""


class LimitExceededError(SchedulingError):
    """An explicit search cap was hit.

    Never used for infeasibility: the search was cut short and the answer
    is unknown.
    """

    def __init__(self, limit_name, limit):
        self.limit_name = limit_name
        self.limit = limit
        super(LimitExceededError, self).__init__(
            f"Limit '{limit_name}' ({limit}) exceeded")


class ReconstructionError(SchedulingError):
    """Internal inconsistency while turning a solution into a schedule."""
