"""Exception hierarchy shared by every component."""

from typing import Optional


class QMirrorError(Exception):
    """Base class; `kind` is the stable identifier used in reports and messages."""

    kind = "error"

    def __init__(self, message: str, detail: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class InvalidArgumentError(QMirrorError, ValueError):
    kind = "invalid-argument"


class MalformedRingError(QMirrorError, ValueError):
    kind = "malformed-ring"


class NotInvertibleError(QMirrorError, ArithmeticError):
    kind = "not-invertible"


class NonNilpotentExponentError(QMirrorError, ArithmeticError):
    kind = "non-nilpotent-exponent"


class TargetValidationError(QMirrorError):
    """Raised when a GIT presentation fails validation."""

    kind = "target-invalid"


class EmptyQuotientError(TargetValidationError):
    kind = "empty-quotient"


class ConditionStarViolatedError(TargetValidationError):
    kind = "condition-star-violated"


class NonConvexTwistError(TargetValidationError):
    kind = "non-convex-twist"


class NoDivisorLiftError(QMirrorError):
    kind = "no-divisor-lift"


class SaturatedTruncationError(QMirrorError):
    kind = "saturated-truncation"


class InsufficientTruncationError(QMirrorError):
    kind = "insufficient-truncation"


class InternalInconsistencyError(QMirrorError):
    kind = "internal-inconsistency"


class OracleMismatchError(QMirrorError):
    kind = "oracle-mismatch"


class ConfigurationError(QMirrorError):
    kind = "configuration"
