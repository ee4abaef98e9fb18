"""Exception types shared across the package."""

#: Largest number of words (``base ** length``) any brute-force enumeration may visit.
ENUMERATION_BUDGET = 2 ** 24


class ValidationError(ValueError):
    """Bad parameters or a violated precondition."""


class BudgetError(ValidationError):
    """An enumeration would exceed :data:`ENUMERATION_BUDGET`."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class PeriodicOrbitError(ConvergenceError):
    """Periodic-point enumeration produced the wrong number of distinct points."""


def check_budget(base, length):
    if length < 1:
        raise ValidationError(f"word length must be >= 1, got {length}")
    if base ** length > ENUMERATION_BUDGET:
        raise BudgetError(
            f"{base}**{length} words exceeds the enumeration budget of 2**24"
        )
