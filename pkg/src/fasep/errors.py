"""Exception hierarchy shared across the package."""


class FasepError(Exception):
    """Base class for all package errors."""


class SpecError(FasepError, ValueError):
    """Invalid experiment specification or malformed input."""


class InvalidCount(SpecError):
    pass


class DomainError(SpecError):
    """A real parameter lies outside the domain where a formula is valid."""


class InvalidWindow(SpecError):
    pass


class InconsistentGaps(SpecError):
    pass


class NotInImage(SpecError):
    pass


class BadAnchor(SpecError):
    pass


class NoRecords(FasepError, ValueError):
    """Raised when a ring has N >= L/2, so its height profile has no records."""


class MaxEventsExceeded(FasepError, RuntimeError):
    """The dynamics did not reach a frozen configuration within the event budget."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class TooLarge(FasepError):
    """Problem exceeds a configured capacity (state-space or lattice size cap)."""


class NotAbsorbing(FasepError):
    """Some transient state cannot reach an absorbing state."""


class Reducible(FasepError):
    """The chain has more than one closed (recurrent) class.

    ``classes`` holds the recurrent classes as lists of state indices; when every
    class is a singleton these are exactly the absorbing states.
    """

    def __init__(self, message, classes):
        super().__init__(message)
        self.classes = classes


class EmptyDistribution(FasepError, ValueError):
    pass


class InsufficientSamples(FasepError, ValueError):
    pass
