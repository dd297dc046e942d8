"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ValidationError(ValueError):
    """An object failed its structural invariants (symmetry, range, shape)."""


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, singular system)."""


class BudgetExceededError(RuntimeError):
    """A brute-force enumeration would exceed its operation budget."""


class MissingDataError(FileNotFoundError):
    """An input dataset that is not shipped with the package was not found."""
