# app/schemas/monitor.py
import enum
from typing import List, Optional, Tuple, Union

from pydantic import Field, model_validator

from app.schemas.base import FrozenModel
from app.schemas.design import NormalDesign, PoissonDesign
from app.schemas.evidence import EvidenceThresholds, SupportInterval, SurvivalDataset


class Verdict(str, enum.Enum):
    CONTINUE = "continue"
    STOP_EFFICACY = "stop-efficacy"
    STOP_INEFFICACY = "stop-inefficacy"
    RESOURCES_EXHAUSTED_WEAK = "resources-exhausted-weak"


class HistoryEntry(FrozenModel):
    d: int
    log_lr: float


class TrialState(FrozenModel):
    design: Union[NormalDesign, PoissonDesign]
    thresholds: EvidenceThresholds
    data: SurvivalDataset = SurvivalDataset()
    burn_in_events: int = Field(default=1, ge=1)
    max_events: Optional[int] = Field(default=None, ge=1)
    history: Tuple[HistoryEntry, ...] = ()

    @model_validator(mode="after")
    def budget_after_burn_in(self) -> "TrialState":
        if self.max_events is not None and self.max_events < self.burn_in_events:
            raise ValueError("event budget must be at least the burn-in")
        return self

    @property
    def d(self) -> int:
        return self.data.d


class MonitorDecision(FrozenModel):
    verdict: Verdict
    lr: float
    log_lr: float
    d_events: int


class RemainingUnit(str, enum.Enum):
    EVENTS = "events"
    PARTICIPANTS = "participants"


class InterimProjection(FrozenModel):
    k_int: float = Field(ge=0)  # 0 once the interim log LR underflows
    k_target: float = Field(gt=1)
    residual_threshold: float
    remaining_budget: float = Field(ge=0)
    remaining_unit: RemainingUnit = RemainingUnit.EVENTS
    remaining_events: float = Field(ge=0)
    prob_under_null: float = Field(ge=0, le=1)
    prob_under_alt: float = Field(ge=0, le=1)
    sequential: bool = False
    achieved: bool = False


class PosthocScan(FrozenModel):
    theta0: float
    k: float
    sup_lr: float
    astray: bool
    astray_bound: Optional[float] = None  # sequential bound for looks at events m0..d


class DecisionRecord(FrozenModel):
    """One line of the monitoring stream"""

    subject_id: str
    d: int
    log_lr: Optional[float] = None
    verdict: Verdict
    intervals: List[SupportInterval] = []
    projection: Optional[InterimProjection] = None
