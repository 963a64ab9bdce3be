"""Exception hierarchy.

Every domain failure raised by prismkit derives from :class:`PrismkitError`;
the CLI maps these to exit code 1 and prints the class name on stderr.
"""


class PrismkitError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# base rings
class BadPrecision(PrismkitError):
    pass


class UnsupportedRelationSet(PrismkitError):
    pass


class SpecMismatch(PrismkitError):
    pass


class NotAUnit(PrismkitError):
    pass


class NotDivisible(PrismkitError):
    pass


class RelationViolated(PrismkitError):
    pass


class UnsupportedQuery(PrismkitError):
    pass


class PrecisionExhausted(PrismkitError):
    pass


class ParseError(PrismkitError):
    pass


# witt
class IntegralityFailure(PrismkitError):
    pass


class CapExceeded(PrismkitError):
    pass


class LengthUnderflow(PrismkitError):
    pass


class NonIntegralGhost(PrismkitError):
    pass


# delta
class DepthExceeded(PrismkitError):
    pass


class UnsupportedCarrier(PrismkitError):
    pass


# prism
class NotDistinguished(PrismkitError):
    pass


class NotEisenstein(PrismkitError):
    pass


class NonOrientable(PrismkitError):
    pass


class VerdictMismatch(PrismkitError):
    """The ideal-membership and delta-unit tests disagreed."""


class EnumerationBudgetExceeded(PrismkitError):
    pass


# hodge_tate
class NotCharP(PrismkitError):
    pass


class InsufficientTerms(PrismkitError):
    pass


class UnramifiedInput(PrismkitError):
    pass


# harness
class NotSquareZeroInput(PrismkitError):
    pass
