"""Exception hierarchy.

Every error raised by the library derives from :class:`QCostNASError`, and
each class carries the process exit code the CLI uses when it escapes.
"""

from __future__ import annotations


class QCostNASError(Exception):
    exit_code = 1


class UsageError(QCostNASError):
    exit_code = 2


class InvalidQubitCount(QCostNASError, ValueError):
    exit_code = 4


class InvalidSearchPoint(QCostNASError, ValueError):
    exit_code = 4


class DimensionMismatch(QCostNASError, ValueError):
    exit_code = 4


class InvalidInput(QCostNASError, ValueError):
    exit_code = 4


class InvalidArchitecture(QCostNASError, ValueError):
    exit_code = 4


class CircuitFormatError(QCostNASError, ValueError):
    exit_code = 4


class CalibrationFormatError(QCostNASError, ValueError):
    exit_code = 3


class InvalidBackend(QCostNASError, ValueError):
    exit_code = 3


class InvalidCalibration(QCostNASError, ValueError):
    exit_code = 3


class UnsupportedGate(QCostNASError, ValueError):
    exit_code = 6


class UnsupportedGradient(QCostNASError, ValueError):
    exit_code = 6


class CapacityError(QCostNASError, ValueError):
    exit_code = 7


class ReliabilitySaturated(QCostNASError, ArithmeticError):
    """Raised when the failure probability is so close to 1 that the
    effective time would be a meaningless near-infinite number."""

    exit_code = 5

    def __init__(self, p_fail: float, message: str | None = None):
        self.p_fail = p_fail
        super().__init__(message or f"failure probability {p_fail!r} saturates the reliability model")


class TrainingDiverged(QCostNASError, ArithmeticError):
    exit_code = 8
