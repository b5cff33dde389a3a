# app/api/routes/design.py
from fastapi import APIRouter, Query
from typing import Optional

from app.schemas.design import DesignReport, NormalDesign, PoissonDesign, PoissonDesignReport
from app.services.design_normal import design_report
from app.services.design_poisson import poisson_design_report

router = APIRouter()


@router.post("/normal", response_model=DesignReport)
async def design_normal(
    design: NormalDesign,
    event_probability: Optional[float] = Query(default=None, gt=0, le=1),
):
    """Operating characteristics under the normal approximation"""
    return design_report(design, event_probability)


@router.post("/poisson", response_model=PoissonDesignReport)
async def design_poisson(
    design: PoissonDesign,
    gamma: Optional[float] = Query(default=0.8, gt=0, lt=1),
):
    """Operating characteristics and exposure projections under the Poisson model"""
    return poisson_design_report(design, gamma)
