# app/api/routes/simulate.py
# Simulations are CPU bound, so these are plain def endpoints run in the threadpool
from fastapi import APIRouter

from app.schemas.simulation import (
    AstrayRequest,
    BayesRequest,
    ProbabilityEstimate,
    StoppingSummary,
    SurvivalRequest,
    WalkRequest,
)
from app.services import simulation

router = APIRouter()


@router.post("/walk", response_model=StoppingSummary)
def simulate_walk(request: WalkRequest):
    return simulation.simulate_walk_design(request.design, request.config)


@router.post("/survival", response_model=StoppingSummary)
def simulate_survival(request: SurvivalRequest):
    return simulation.simulate_survival_trial(request.design, request.model, request.config)


@router.post("/astray", response_model=ProbabilityEstimate)
def simulate_astray(request: AstrayRequest):
    return simulation.simulate_led_astray(request.k, request.window, request.config)


@router.post("/bayes", response_model=StoppingSummary)
def simulate_bayes(request: BayesRequest):
    return simulation.simulate_bayes_design(request.bayes, request.model, request.config)
