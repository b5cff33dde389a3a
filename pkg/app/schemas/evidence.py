# app/schemas/evidence.py
import enum
import math
from typing import List, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.schemas.base import FrozenModel


# Hypotheses on the log hazard ratio scale
class Hypotheses(FrozenModel):
    theta0: float
    theta1: float

    @field_validator("theta0", "theta1")
    @classmethod
    def finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("hypotheses must be finite log hazard ratios")
        return value

    @model_validator(mode="after")
    def distinct(self) -> "Hypotheses":
        if self.theta0 == self.theta1:
            raise ValueError("theta0 and theta1 must differ")
        return self

    @classmethod
    def from_hazard_ratios(cls, psi1: float, psi0: float = 1.0) -> "Hypotheses":
        if psi1 <= 0 or psi0 <= 0:
            raise ValueError("hazard ratios must be positive")
        return cls(theta0=math.log(psi0), theta1=math.log(psi1))

    @property
    def psi0(self) -> float:
        return math.exp(self.theta0)

    @property
    def psi1(self) -> float:
        return math.exp(self.theta1)


class EvidenceThresholds(FrozenModel):
    """Stopping levels: strong evidence for H0 at LR <= k0, for H1 at LR >= k1"""

    k0: float
    k1: float

    @model_validator(mode="after")
    def ordered(self) -> "EvidenceThresholds":
        if not (0 < self.k0 < 1 < self.k1) or not math.isfinite(self.k1):
            raise ValueError("thresholds must satisfy 0 < k0 < 1 < k1 < inf")
        return self

    @classmethod
    def symmetric(cls, k: float) -> "EvidenceThresholds":
        return cls(k0=1.0 / k, k1=k)

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.k0 * self.k1, 1.0, rel_tol=1e-12)


class Classification(str, enum.Enum):
    STRONG_H1 = "strong-for-H1"
    WEAK = "weak"
    STRONG_H0 = "strong-for-H0"


# Event-level data
class SurvivalRecord(FrozenModel):
    subject_id: str
    time: float = Field(ge=0)
    event: int = Field(ge=0, le=1)
    group: int = Field(ge=0, le=1)

    @field_validator("time")
    @classmethod
    def finite_time(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("time must be finite")
        return value


class SurvivalDataset(FrozenModel):
    records: Tuple[SurvivalRecord, ...] = ()

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def d(self) -> int:
        return sum(record.event for record in self.records)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(time, event, group) columns as numpy arrays"""
        time = np.fromiter((r.time for r in self.records), dtype=float, count=self.n)
        event = np.fromiter((r.event for r in self.records), dtype=np.int64, count=self.n)
        group = np.fromiter((r.group for r in self.records), dtype=np.int64, count=self.n)
        return time, event, group

    def with_record(self, record: SurvivalRecord) -> "SurvivalDataset":
        return SurvivalDataset(records=self.records + (record,))

    @classmethod
    def from_arrays(cls, time, event, group) -> "SurvivalDataset":
        records = [
            SurvivalRecord(subject_id=str(i), time=float(t), event=int(e), group=int(z))
            for i, (t, e, z) in enumerate(zip(time, event, group))
        ]
        return cls(records=tuple(records))

    @classmethod
    def from_tuples(cls, rows: List[Tuple[float, int, int]]) -> "SurvivalDataset":
        """Build from (time, event, group) rows; subject ids are row positions"""
        return cls.from_arrays(*zip(*rows)) if rows else cls()


# Evidence summaries
class EvidenceReport(FrozenModel):
    lr: float
    log_lr: float
    classification: Classification
    d_events: int


class SupportInterval(FrozenModel):
    k_level: float
    lower: float
    upper: float
    theta_hat: float

    @model_validator(mode="after")
    def contains_mle(self) -> "SupportInterval":
        if not self.lower <= self.theta_hat <= self.upper:
            raise ValueError("support interval must contain the MLE")
        return self
