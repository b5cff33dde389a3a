# app/schemas/design.py
import enum
import math
from typing import Optional

from pydantic import Field, model_validator

from app.core.config import settings
from app.schemas.base import FrozenModel
from app.schemas.evidence import EvidenceThresholds, Hypotheses


class HypothesisIndex(int, enum.Enum):
    NULL = 0
    ALT = 1


# Normal approximation to the log hazard ratio
class NormalDesign(FrozenModel):
    hyps: Hypotheses
    thresholds: EvidenceThresholds
    rho: float = Field(default=settings.RHO_NORMAL, ge=0)
    allocation: float = Field(default=1.0, gt=0)  # expected treated:control event ratio

    @property
    def delta(self) -> float:
        """Per-event standardised distance; |theta1 - theta0|/2 for balanced arms"""
        share = self.allocation / (1.0 + self.allocation)
        return abs(self.hyps.theta1 - self.hyps.theta0) * math.sqrt(share * (1.0 - share))

    @property
    def a(self) -> float:
        return math.log(self.thresholds.k0) / self.delta

    @property
    def b(self) -> float:
        return math.log(self.thresholds.k1) / self.delta

    @property
    def phi0(self) -> float:
        return -self.delta / 2.0

    @property
    def phi1(self) -> float:
        return self.delta / 2.0


class OperatingCharacteristics(FrozenModel):
    alpha_l: float
    power_l: float
    e_events_null: float
    e_events_alt: float

    @property
    def beta_l(self) -> float:
        return 1.0 - self.power_l


class EventBudget(FrozenModel):
    events: float = Field(gt=0)
    event_probability: float = Field(gt=0, le=1)

    @property
    def subjects(self) -> int:
        # guard against d/p landing a hair above an integer
        return math.ceil(self.events / self.event_probability - 1e-9)


class DesignReport(FrozenModel):
    model: str
    delta: float
    a: float
    b: float
    rho: float
    characteristics: OperatingCharacteristics
    subjects_null: Optional[int] = None
    subjects_alt: Optional[int] = None
    notes: list = []


# Poisson exposure model
class PoissonDesign(FrozenModel):
    psi1: float = Field(gt=0)
    psi0: float = Field(default=1.0, gt=0)
    g: float = Field(default=1.0, gt=0)
    lambda_c: Optional[float] = Field(default=None, gt=0)
    thresholds: EvidenceThresholds
    rho: float = Field(default=settings.RHO_BINOMIAL, ge=0)
    flipped: bool = False

    @model_validator(mode="after")
    def distinct(self) -> "PoissonDesign":
        if self.psi1 == self.psi0:
            raise ValueError("psi1 and psi0 must differ")
        return self

    @property
    def p0(self) -> float:
        return self.psi0 / (self.psi0 + self.g)

    @property
    def p1(self) -> float:
        return self.psi1 / (self.psi1 + self.g)

    @property
    def oriented(self) -> bool:
        return self.p1 > self.p0

    @property
    def delta(self) -> float:
        """ln[p1(1-p0)/((1-p1)p0)], which equals ln(psi1/psi0)"""
        return math.log(self.psi1 / self.psi0)

    def psi(self, under: HypothesisIndex) -> float:
        return self.psi1 if under == HypothesisIndex.ALT else self.psi0


class EventSplit(FrozenModel):
    d_t: int = Field(ge=0)
    d_c: int = Field(ge=0)

    @property
    def d(self) -> int:
        return self.d_t + self.d_c


class ExposureProjection(FrozenModel):
    t_c: float
    t_t: float
    gamma: Optional[float] = Field(default=None, gt=0, lt=1)
    target_events: float
    under: HypothesisIndex
    expected_events: float


class PoissonDesignReport(FrozenModel):
    design: PoissonDesign
    oriented_design: PoissonDesign
    characteristics: OperatingCharacteristics
    projections: list = []
    notes: list = []
