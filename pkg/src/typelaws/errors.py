"""Exception hierarchy shared across the package."""


class TypeLawsError(Exception):
    """Base class for all package errors."""


class ValidationError(TypeLawsError, ValueError):
    """Malformed input: bad pmf, bad type, bad configuration."""


class ExactUnavailable(TypeLawsError):
    """Exact rational arithmetic was requested for irrational/float data."""


class DomainTooSmall(TypeLawsError, ValueError):
    pass


class MismatchedTypes(TypeLawsError, ValueError):
    pass


class AlphabetMismatch(TypeLawsError, ValueError):
    pass


class BudgetExceeded(TypeLawsError):
    """Enumeration would exceed the configured candidate budget."""


class EmptyFeasibleSet(TypeLawsError):
    """Pi_n is empty, so a conditional probability is undefined."""


class NoConvergence(TypeLawsError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InfeasibleMoment(TypeLawsError, ValueError):
    pass


class FeasibilityError(TypeLawsError, ValueError):
    pass


class EmptyIntersection(TypeLawsError, ValueError):
    pass


class BallOverlap(TypeLawsError, ValueError):
    pass


class PrefixTooLong(TypeLawsError, ValueError):
    pass


class PreconditionViolated(TypeLawsError, ValueError):
    pass
