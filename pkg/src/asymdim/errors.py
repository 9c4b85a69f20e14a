"""Exception types shared across the package."""


class AsymdimError(Exception):
    """Base class for all package errors."""


class SpecError(AsymdimError, ValueError):
    """Invalid space specification or configuration; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DomainError(AsymdimError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class BudgetError(AsymdimError, ValueError):
    """Request exceeds a declared radius, size or search budget."""


class UnsupportedOperation(AsymdimError, TypeError):
    """Operation not available for this kind of space."""


class ArityError(AsymdimError, ValueError):
    """Not enough samples (or no overlapping samples) to form an estimate."""


class ConfigurationError(AsymdimError, ValueError):
    """Estimator regime or configuration cannot be satisfied."""
