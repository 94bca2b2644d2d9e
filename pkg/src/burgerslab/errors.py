"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: regime / precondition / contract
violations exit 1, numerical failures exit 2.
"""


class BurgersLabError(Exception):
    """Base class for all library errors."""


class DomainError(BurgersLabError):
    """An input value is outside the mathematical domain (non-finite, N0 <= 0, ...)."""


class ContractError(BurgersLabError):
    """An operation was called in a way its contract forbids (wrong p, mismatched grids)."""


class PreconditionError(BurgersLabError):
    """A stated precondition of the invoked operation does not hold."""


class RegimeError(PreconditionError):
    """The requested (bc, p, lambda, sign) combination is outside every covered regime,
    or is covered by a nonexistence result."""


class NumericalError(BurgersLabError):
    """A numerical procedure failed (step-size underflow, shooting bracket not found, ...)."""


class TruncationError(PreconditionError):
    """A half-line truncation is too short for the requested tolerance."""


class ConsistencyError(NumericalError):
    """Numerical evidence contradicts a closed-form certificate.

    This is always a bug somewhere and should surface as a test failure,
    never be silently overridden.
    """
