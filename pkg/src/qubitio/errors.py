"""Exception hierarchy shared by every module."""


class QubitIOError(Exception):
    """Base class for all package errors."""


class InvalidChannel(QubitIOError, ValueError):
    """Kraus list or Choi matrix fails channel validation (completeness, shape, PSD)."""


class NotIncoherentChannel(QubitIOError, ValueError):
    """The channel admits no decomposition into incoherent Kraus operators."""


class ConstraintViolation(QubitIOError, ArithmeticError):
    """A numerical constraint required by the decomposition does not hold."""


class NoValidRoot(QubitIOError, ArithmeticError):
    """Neither root of the mixing-parameter quadratic passes substitution."""
