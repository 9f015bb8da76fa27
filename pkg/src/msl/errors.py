"""Exception types shared across the package."""


class MSLError(Exception):
    """Base class for all errors raised by msl."""


class ParseError(MSLError):
    """Raised when formula or rule text does not match the grammar."""

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class BudgetExceeded(MSLError):
    """An enumeration or search would exceed its configured budget."""

    def __init__(self, what, required, budget):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(f"{what}: needs {required} steps, budget is {budget}")


class PreconditionError(MSLError, ValueError):
    """An operation was called on inputs outside its domain."""


class InvariantViolation(MSLError, AssertionError):
    """A construction failed one of its own postconditions (a bug trap)."""
