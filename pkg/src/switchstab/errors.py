"""Exception hierarchy shared by all modules."""


class SwitchStabError(Exception):
    """Base class for every error raised by this package."""


class HorizonTooLarge(SwitchStabError):
    """A product enumeration or graph exploration would exceed its size cap."""


class MethodInapplicable(SwitchStabError):
    """The requested method's preconditions do not hold for this input."""


class ConeInapplicable(MethodInapplicable):
    """Some product has a negative entry, so the orthant cone is not invariant."""


class NotCertifiable(SwitchStabError):
    """A requested decrease factor cannot be certified from the given table."""


class LambdaNotCertifiable(SwitchStabError):
    """Value iteration diverged; lambda is probably below the stabilization radius.

    This is a diagnostic, never a proof that lambda is too small.
    """


class MatrixFileError(SwitchStabError):
    """Malformed matrix-set input."""
