"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract user input (bad edge list, missing labels, ...)."""


class BudgetExceeded(RuntimeError):
    """A computation exceeded its configured wall-clock budget (OOR)."""


class CompatibilityError(InputError):
    """Model / rewiring / task combination ruled out by the compatibility matrix."""
