"""Exception hierarchy shared by every module."""


class KerntractError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(KerntractError, ValueError):
    pass


class NumericalDomainError(KerntractError, ArithmeticError):
    pass


class NotPositiveDefiniteError(NumericalDomainError):
    pass


class ConvergenceError(KerntractError, RuntimeError):
    pass


class KernelError(InvalidArgumentError):
    """A user kernel failed its registration self-checks."""


class TailDivergenceError(NumericalDomainError):
    pass


class InsufficientDataError(KerntractError, ValueError):
    pass


class TruncationError(KerntractError):
    """Fewer products exist above the floor than were requested.

    ``values`` holds everything that was delivered before the stream ran dry.
    """

    def __init__(self, message, values=()):
        super().__init__(message)
        self.values = list(values)

    @property
    def count(self):
        return len(self.values)


class ResourceLimitError(KerntractError):
    def __init__(self, message, partial_count=0):
        super().__init__(message)
        self.partial_count = partial_count
