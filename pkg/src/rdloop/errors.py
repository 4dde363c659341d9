"""Exception types shared across the package."""


class RdLoopError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RdLoopError):
    """A configuration violates a structural invariant.

    ``violations`` collects every violated invariant so the CLI can
    report all of them at once instead of the first one found.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class PreconditionError(RdLoopError):
    """An operation was called with arguments outside its contract."""


class NumericalError(RdLoopError):
    """A numerical procedure failed (e.g. linear solver stagnation).

    Carries the achieved residual when available.
    """

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
