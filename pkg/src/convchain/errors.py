"""Exception types shared across the package."""


class ConvChainError(Exception):
    """Base class for all package errors."""


class DomainError(ConvChainError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BudgetError(ConvChainError, RuntimeError):
    """A resource budget (table size, enumeration depth, attempts) was exceeded."""


class CalibrationError(ConvChainError, RuntimeError):
    """Parameter calibration failed to converge; carries the last residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
