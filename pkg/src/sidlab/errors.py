"""Exception types raised across the package."""


class SidlabError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SidlabError, ValueError):
    pass


class DegenerateStateError(SidlabError):
    pass


class InvalidStateError(SidlabError):
    pass


class ResolutionError(SidlabError):
    pass


class PreconditionError(SidlabError):
    pass


class EmptyLevelSetError(SidlabError):
    pass


class UnsupportedModelError(SidlabError):
    pass


class IntegratorError(SidlabError):
    def __init__(self, message, drift=None):
        super().__init__(message)
        self.drift = drift


class OutOfDomainError(SidlabError):
    pass


class StageError(SidlabError):
    """Wraps an error raised inside a pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class ExportError(SidlabError):
    """File could not be written or read; the message names the path."""
