# app/schemas/trial.py
from pydantic import BaseModel, Field, model_validator
from datetime import datetime
from typing import List, Optional

from app.models.trial import DesignModel
from app.schemas.evidence import SupportInterval
from app.schemas.monitor import MonitorDecision, RemainingUnit


class TrialBase(BaseModel):
    name: str
    model: DesignModel = DesignModel.NORMAL
    theta0: float = 0.0
    theta1: float
    g: Optional[float] = Field(default=None, gt=0)
    rho: Optional[float] = Field(default=None, ge=0)
    k0: float
    k1: float
    burn_in_events: int = Field(default=1, ge=1)
    max_events: Optional[int] = Field(default=None, ge=1)


class TrialCreate(TrialBase):
    @model_validator(mode="after")
    def distinct_hypotheses(self) -> "TrialCreate":
        if self.theta0 == self.theta1:
            raise ValueError("theta0 and theta1 must differ")
        return self


class TrialResponse(TrialBase):
    id: int
    n_records: int = 0
    d_events: int = 0
    created_at: datetime

    class Config:
        from_attributes = True


class RecordCreate(BaseModel):
    subject_id: str
    time: float = Field(ge=0)
    event: int = Field(ge=0, le=1)
    group: int = Field(ge=0, le=1)


class IngestResponse(BaseModel):
    ingested: int
    decision: MonitorDecision


class ProjectionRequest(BaseModel):
    k_target: float = Field(gt=1)
    remaining: float = Field(ge=0)
    unit: RemainingUnit = RemainingUnit.EVENTS
    event_probability: Optional[float] = Field(default=None, gt=0, le=1)
    sequential: bool = False


class IntervalsResponse(BaseModel):
    theta_hat: Optional[float] = None
    intervals: List[SupportInterval] = []
