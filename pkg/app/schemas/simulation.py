# app/schemas/simulation.py
from typing import Dict, Optional, Union

from pydantic import Field, model_validator

from app.core.config import settings
from app.schemas.base import FrozenModel
from app.schemas.design import HypothesisIndex, NormalDesign, PoissonDesign
from app.schemas.misleading import LookWindow

QUANTILE_LEVELS = (25, 50, 75, 80, 90, 95)


class SimConfig(FrozenModel):
    replicates: int = Field(default=settings.DEFAULT_REPLICATES, ge=1)
    seed: int = Field(default=settings.EVIDENCE_SEED, ge=0)
    max_events: Optional[int] = Field(default=None, ge=1)
    burn_in_events: int = Field(default=1, ge=1)
    truth: HypothesisIndex = HypothesisIndex.NULL
    workers: int = Field(default=settings.SIM_WORKERS, ge=1)


class SurvivalSimModel(FrozenModel):
    """Two equal arms, uniform staggered entry, exponential event times"""

    lambda_c: float = Field(default=0.25, gt=0)
    psi_true: float = Field(default=1.0, gt=0)
    accrual_years: float = Field(default=2.4, gt=0)
    followup_years: float = Field(default=4.5, ge=0)
    subjects_per_group: int = Field(default=50, ge=1)


class StoppingSummary(FrozenModel):
    replicates: int
    mean_events: float
    quantiles: Dict[str, float]
    max_events: float
    prob_stop_efficacy: float
    prob_stop_inefficacy: float
    prob_non_stop: float
    se_stop_efficacy: float
    se_stop_inefficacy: float
    se_non_stop: float


class ProbabilityEstimate(FrozenModel):
    probability: float
    standard_error: float
    replicates: int


class BayesDesign(FrozenModel):
    """Normal prior on the log hazard ratio with posterior-probability stopping"""

    prior_mean: float = 0.0
    prior_sd: float = Field(default=0.5606, gt=0)
    upper_posterior_stop: float = Field(default=0.95, gt=0, lt=1)
    lower_posterior_stop: Optional[float] = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def ordered(self) -> "BayesDesign":
        lower = self.lower_posterior_stop
        if lower is not None and not lower < self.upper_posterior_stop:
            raise ValueError("posterior stops must satisfy 0 < lower < upper < 1")
        return self


# Request bodies for the simulation endpoints
class WalkRequest(FrozenModel):
    design: Union[NormalDesign, PoissonDesign]
    config: SimConfig = SimConfig()


class SurvivalRequest(FrozenModel):
    design: NormalDesign
    model: SurvivalSimModel = SurvivalSimModel()
    config: SimConfig = SimConfig(burn_in_events=10)


class AstrayRequest(FrozenModel):
    k: float = Field(gt=1)
    window: LookWindow
    config: SimConfig = SimConfig()


class BayesRequest(FrozenModel):
    bayes: BayesDesign = BayesDesign()
    model: SurvivalSimModel = SurvivalSimModel()
    config: SimConfig = SimConfig(burn_in_events=10)
