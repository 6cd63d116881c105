"""Exception hierarchy shared by all modules."""


class HodgeScatterError(Exception):
    """Base class for all library errors."""


class DomainError(HodgeScatterError, ValueError):
    """Argument outside the mathematical domain (e.g. the origin of the log cover)."""


class RangeError(HodgeScatterError, ValueError):
    """Argument outside the supported numerical range."""


class UnsupportedError(HodgeScatterError, NotImplementedError):
    """Requested dimension / form degree / geometry is not implemented."""


class ResonancePoleError(HodgeScatterError, ArithmeticError):
    """A boundary-matching denominator vanished (numerically) at the given lambda."""

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class IllConditionedError(HodgeScatterError, ArithmeticError):
    """A least-squares or linear system is too ill-conditioned to trust."""


class RefineGridError(HodgeScatterError, ArithmeticError):
    """Phase unwrapping failed because the grid is too coarse."""


class ConfigurationError(HodgeScatterError, ValueError):
    """Missing or inconsistent configuration (also used by the CLI, exit code 2)."""
