"""Exception hierarchy shared by all modules."""


class NovikovError(Exception):
    pass


class InputError(NovikovError, ValueError):
    """Malformed input: dimension mismatch, bad config, rank deficiency."""


class ResourceError(NovikovError, RuntimeError):
    """A grid or enumeration would exceed the configured budget."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConsistencyError(NovikovError, RuntimeError):
    """A spanning level line without boundary-touching regions of both signs."""


class ContradictionError(NovikovError, RuntimeError):
    """A level assumed outside the critical interval produced an open verdict."""


class UndeterminedError(NovikovError, RuntimeError):
    """A probe could not decide the sign of the adjoining region."""
