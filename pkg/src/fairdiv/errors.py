"""Exception hierarchy for the fairdiv library."""

from __future__ import annotations


class FairDivisionError(Exception):
    """Base class for all fairdiv errors."""


class InstanceError(FairDivisionError):
    """Invalid instance description."""


class TooFewAgentsError(InstanceError):
    pass


class NonPositiveWeightError(InstanceError):
    pass


class NegativeUtilityError(InstanceError):
    pass


class DimensionMismatchError(InstanceError):
    pass


class AllocationError(FairDivisionError):
    """Bundles do not form a partition of the item set."""


class ParameterError(FairDivisionError):
    """Parameter outside its allowed range."""


class BudgetExceededError(FairDivisionError):
    """An enumeration would visit more states than the configured budget."""

    def __init__(self, message: str, required: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class SearchBudgetExceededError(BudgetExceededError):
    """A partition search visited more states than the configured budget."""


class TooManyItemsError(FairDivisionError):
    """Item count exceeds the cap for subset-based computations."""


class NotIdenticalItemsError(FairDivisionError):
    """Operation requires an instance where all items are identical."""


class NotBinaryError(FairDivisionError):
    """Operation requires an instance with 0/1 utilities."""


class NotWastelessError(FairDivisionError):
    """Operation requires an allocation where every item goes to an agent valuing it."""


class DivisorRangeError(FairDivisionError):
    """Divisor function value outside the band [t, t+1]."""


class PreconditionViolatedError(FairDivisionError):
    """Algorithm-specific precondition does not hold for the instance."""
