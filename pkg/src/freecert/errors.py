"""Exception hierarchy shared by all freecert modules."""


class FreecertError(Exception):
    """Base class for all library errors."""


class InputError(FreecertError):
    """Malformed or inconsistent input data (bad matrix file, wrong flags, ...)."""


class UndecidedError(FreecertError):
    """A validated computation could not be decided at the requested precision.

    Carries a human-readable description of the blocking quantity (e.g. a
    root cluster that would not separate).
    """


class NotCertifiedError(FreecertError):
    """A certification predicate failed.

    This is *not* a claim that the mathematical property is false -- the
    criteria are sufficient, not necessary.  ``clause`` names the first
    failed condition.
    """

    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        self.detail = detail
        msg = clause if not detail else f"{clause}: {detail}"
        super().__init__(msg)


class BudgetExceededError(FreecertError):
    """An enumeration hit its node cap.  ``partial`` holds whatever was
    completed (e.g. ball sizes up to the last full radius)."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class SearchNotFoundError(FreecertError):
    """A search exhausted its budget without producing a certificate.

    Honest budget-bounded answer; never a claim of impossibility.  The
    pipeline trace accumulated so far is attached.
    """

    def __init__(self, message: str, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)
