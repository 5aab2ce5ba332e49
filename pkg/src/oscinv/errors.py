"""Exception types shared across the package."""


class OscInvError(Exception):
    """Base class for package errors."""


class ScheduleParseError(OscInvError, ValueError):
    """Raised when an expression string cannot be parsed or compiled."""


class DomainError(OscInvError, ValueError):
    """Raised when a time lies outside the declared domain."""


class NonPositiveRhoError(OscInvError, ValueError):
    """Raised when an auxiliary-equation solution is or becomes nonpositive."""


class IntegrationError(OscInvError, RuntimeError):
    """Raised when the adaptive integrator cannot meet its tolerance."""


class NotPositiveDefiniteError(OscInvError, ValueError):
    """Raised when a decoupled mode frequency squared is not positive."""


class GridTooCoarseError(OscInvError, ValueError):
    """Raised when an evaluation grid is too small or too coarse to trust."""
