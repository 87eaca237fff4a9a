"""Exception hierarchy shared by all modules."""


class PreimError(Exception):
    """Base class for every error raised by :mod:`preimdyn`."""


class InvalidPrime(PreimError, ValueError):
    pass


class Undefined(PreimError, ValueError):
    """Operation undefined for the given input (e.g. roots of the zero polynomial)."""


class NeedsExtension(PreimError):
    """A square root needs either doubled ramification or a new radicand.

    ``kind`` is ``"odd"`` when the leading exponent is odd and
    ``"nonsquare"`` when the leading coefficient is not a square;
    ``coefficient`` carries the offending leading coefficient.
    """

    def __init__(self, kind, coefficient=None):
        super().__init__(f"square root needs extension ({kind})")
        self.kind = kind
        self.coefficient = coefficient


class DegreeDrop(PreimError, ValueError):
    """The resultant vanishes: common factor or collapse of both leading terms."""


class ExtensionUnsupported(PreimError):
    pass


class ChainBroken(PreimError, ValueError):
    pass


class ZeroElement(PreimError, ValueError):
    pass


class CapExceeded(PreimError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class HypothesisViolated(PreimError, ValueError):
    pass


class DegenerateRelation(PreimError):
    pass


class PrecisionExhausted(PreimError):
    pass


class NotApplicable(PreimError):
    pass


class InvariantFailure(PreimError, AssertionError):
    """An engine invariant that is a proved theorem failed: this is a bug."""
