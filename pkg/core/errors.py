"""
Exception hierarchy for the OWPN laboratory.

Two families, mapped to CLI exit codes by app.py:
- ValidationError: bad input or configuration (exit 1)
- NumericalError: a numerics or invariant failure (exit 2)
"""


class OwpnError(Exception):
    """Base class for all laboratory errors"""


class ValidationError(OwpnError):
    """Invalid parameters, flags or configuration"""


class NonFiniteError(ValidationError):
    """NaN or infinite input where a finite value is required"""


class NegativePowerError(ValidationError):
    """Average power P below zero"""


class ZeroOversamplingError(ValidationError):
    """Oversampling factor L below one"""


class NegativeAlphaError(ValidationError):
    """Oversampling exponent alpha below zero"""


class UndefinedAtZeroPowerError(ValidationError):
    """The P^-1 regime threshold of the WPN bound needs P > 0"""


class PowerBudgetExceededError(ValidationError):
    """Scheme amplitude law violates E[|X|^2] <= P/L"""


class PhaseTooShortError(ValidationError):
    """Phase trajectory does not cover the requested number of blocks"""


class MissingPreviousBlockError(ValidationError):
    """Phase statistic requested for a block with no predecessor"""


class InsufficientSamplesError(ValidationError):
    """Too few samples for a plug-in estimate"""


class InvalidGridError(ValidationError):
    """Sweep grid or P grid violates its invariants"""


class UsageError(ValidationError):
    """Command line or --config file could not be parsed"""


class NumericalError(OwpnError):
    """Numerical failure or violated hard invariant"""


class NonConvergenceError(NumericalError):
    """Fixed-point iteration exceeded its iteration cap"""


class QuadratureFailureError(NumericalError):
    """Adaptive quadrature error estimate above tolerance"""


class InvariantViolationError(NumericalError):
    """A cross-check or hard invariant fired"""
