"""Exception hierarchy shared across the package."""


class RepsegError(Exception):
    """Base class for all repseg errors."""


class InputError(RepsegError):
    """Invalid input data or configuration (CLI exit code 2)."""


class NumericalError(RepsegError):
    """Unrecoverable numerical failure, e.g. a covariance that cannot be
    repaired (CLI exit code 3)."""


class NoPeriodicityError(RepsegError):
    """The parameter tracks carry no usable periodic content."""


class StageError(RepsegError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
