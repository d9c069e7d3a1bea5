"""Exception types shared across the package."""


class UsageError(ValueError):
    """An operation was called outside its contract (bad arguments, model mismatch)."""


class DomainError(ValueError):
    """The input is outside the mathematical domain of the operation."""


class DistributionError(UsageError):
    """A step distribution violates its invariants."""


class UncertifiedError(RuntimeError):
    """A theorem-grade estimator was fed a distribution whose hypotheses
    were not certified and no override was given."""
