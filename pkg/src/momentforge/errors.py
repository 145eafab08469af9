"""Exception types shared across the package."""


class MomentForgeError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(MomentForgeError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class DomainError(MomentForgeError, ValueError):
    """Evaluation requested outside the open upper half-plane."""


class NumericFailure(MomentForgeError, RuntimeError):
    """A matrix decomposition failed to converge."""


class SingularLftError(MomentForgeError, RuntimeError):
    """Linear-fractional denominator is numerically singular.

    Carries the offending point and a condition estimate so callers can
    report where the transform broke down.
    """

    def __init__(self, message, z=None, cond=None):
        super().__init__(message)
        self.z = z
        self.cond = cond


class NotExtendableError(MomentForgeError, ValueError):
    """Moment data admits no nonnegative Hankel extension: empty solution set."""


class ContractError(MomentForgeError, ValueError):
    """An operation was called outside its documented contract."""
