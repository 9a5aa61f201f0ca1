"""Exception types shared across the package.

Every error raised on purpose derives from MultitrekError so callers
(and the CLI) can distinguish domain failures from genuine bugs.
"""

from __future__ import annotations


class MultitrekError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(MultitrekError):
    """A JSON document does not match the expected schema.

    Carries the JSON-pointer-style path of the offending element.
    """

    def __init__(self, path: str, message: str = "") -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if message else path)


class CycleError(MultitrekError):
    """The directed part of a graph contains a cycle.

    ``cycle`` is a vertex sequence that starts and ends at the same vertex.
    """

    def __init__(self, cycle: tuple[int, ...]) -> None:
        self.cycle = cycle
        super().__init__(f"directed cycle: {list(cycle)}")


class BudgetExceeded(MultitrekError):
    """An enumeration would exceed its configured cap; never truncate silently."""

    def __init__(self, what: str, budget: int) -> None:
        self.what = what
        self.budget = budget
        super().__init__(f"{what} exceeds budget of {budget}")


class DimMismatch(MultitrekError):
    """Tensor/matrix dimensions are incompatible for the requested operation."""


class NotCubical(MultitrekError):
    """The hyperdeterminant needs a cubical tensor (all dims equal, order >= 2)."""


class IndexOutOfRange(MultitrekError):
    """A subtensor index falls outside the tensor's dimensions."""


class MissingOrder(MultitrekError):
    """A model instance has no noise cumulants at the requested order."""


class InternalInconsistency(MultitrekError):
    """The two decision routes disagree where agreement is guaranteed.

    Raised when a verified witness system coexists with an exactly
    zero determinant (impossible at any order), or when the routes
    split at order 2 (where their equivalence is a theorem).  Either
    way it is an implementation fault and should be reported with the
    offending inputs.  The known odd-order blind spot — no witness
    system yet a nonzero determinant at orders >= 3 — is NOT this
    error; the oracle reports it as a NotVanishes decision with a
    "gap" marker in the certificate.
    """


class OrderUnsupported(MultitrekError):
    """Sample cumulants are implemented for orders 2..4 only."""


class InvalidBootstrapCount(MultitrekError):
    """Bootstrap requires at least one replicate."""
