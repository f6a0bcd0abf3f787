"""Exception hierarchy shared by all lognormlab modules."""


class LognormlabError(Exception):
    """Base class for errors raised by this package."""


class SpecError(LognormlabError, ValueError):
    """A norm, pairing or system description is malformed or violates its invariants."""


class InputError(LognormlabError, ValueError):
    """Arguments are well-formed specs but incompatible with each other (e.g. dimensions)."""


class NumericError(LognormlabError, ArithmeticError):
    """A numerical limit did not settle.

    ``estimates`` carries the last values seen so the caller can judge how
    far off the result was.
    """

    def __init__(self, msg, estimates=()):
        super().__init__(msg)
        self.estimates = tuple(estimates)


class ResourceError(LognormlabError):
    """A size or iteration guard tripped."""


class DivergenceError(LognormlabError):
    """Integration produced a non-finite state."""

    def __init__(self, msg, time):
        super().__init__(msg)
        self.time = time


class InternalConsistencyError(LognormlabError, AssertionError):
    """A computed result failed its own post-condition check."""
