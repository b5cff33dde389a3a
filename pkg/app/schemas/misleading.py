# app/schemas/misleading.py
import math
from typing import List, Optional

from pydantic import Field, model_validator

from app.core.config import settings
from app.schemas.base import FrozenModel


class EvidenceScale(FrozenModel):
    """Standardised distance between the hypotheses and the overshoot constant"""

    delta: float = Field(gt=0)
    rho: float = Field(default=settings.RHO_NORMAL, ge=0)


class LookWindow(FrozenModel):
    """Data examined after every observation from m0 to m (m=None: unbounded)"""

    m0: int = Field(ge=1)
    m: Optional[float] = None

    @model_validator(mode="after")
    def ordered(self) -> "LookWindow":
        if self.m is not None and self.m < self.m0:
            raise ValueError("window must satisfy m0 <= m")
        return self

    @property
    def bounded(self) -> bool:
        return self.m is not None and math.isfinite(self.m)

    @property
    def constraint_ratio(self) -> float:
        """m0/m; zero for an unbounded window"""
        if not self.bounded:
            return 0.0
        return self.m0 / self.m

    @classmethod
    def from_ratio(cls, ratio: float, m: int = 10_000) -> "LookWindow":
        return cls(m0=max(1, round(ratio * m)), m=m)


class AstrayReport(FrozenModel):
    k: float
    m0: int
    m: float
    sequential_bound: float
    fixed_design: float
    reported: float


class AstrayTable(FrozenModel):
    ks: List[float]
    ratios: List[float]
    cells: List[List[float]]


class CurvePoint(FrozenModel):
    delta: float
    probability: float
