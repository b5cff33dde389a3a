# app/core/exceptions.py
from typing import Optional


class EvidenceError(ValueError):
    """Base class for every domain error raised by the toolkit"""


class DomainError(EvidenceError):
    """Argument outside the mathematical domain of an operation"""


class NoEventsError(EvidenceError):
    """Partial likelihood requested on data without a single event"""

    def __init__(self, message: str = "no events"):
        super().__init__(message)


class MLEDivergesError(EvidenceError):
    """Partial likelihood is monotone, so the MLE sits at +inf or -inf"""

    def __init__(self, direction: int, message: str = "MLE diverges"):
        super().__init__(f"{message} (theta -> {'+' if direction > 0 else '-'}inf)")
        self.direction = direction


class BoundDivergesError(EvidenceError):
    """Led-astray bound requested for an unbounded look window"""

    def __init__(self, message: str = "bound diverges"):
        super().__init__(message)


class OrientationError(EvidenceError):
    """Poisson design with p1 < p0 handed to the boundary-crossing formulas"""

    def __init__(
        self,
        message: str = "design is not oriented (p1 < p0); call orient_hypotheses first",
    ):
        super().__init__(message)


class CalibrationError(EvidenceError):
    """Posterior stopping rule cannot be translated into likelihood ratios"""


class SimConfigError(EvidenceError):
    """Inconsistent simulation configuration"""


class IngestionError(EvidenceError):
    """Malformed event data or conflicting duplicate subject"""

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class TrialNotFoundError(EvidenceError):
    """Monitored trial id unknown to the database"""
