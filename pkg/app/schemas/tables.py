# app/schemas/tables.py
from typing import Dict, List, Optional

from app.schemas.base import FrozenModel


class SimulatedColumns(FrozenModel):
    mean_events: float
    quantiles: Dict[str, float]
    max_events: float
    prob_non_stop: float
    se_non_stop: float


class DesignTableRow(FrozenModel):
    k0: float
    k1: float
    alpha_l: float
    power_l: float
    e_events_null: Optional[float] = None
    e_events_alt: Optional[float] = None
    null: Optional[SimulatedColumns] = None
    alt: Optional[SimulatedColumns] = None
    se_alpha_l: Optional[float] = None
    se_power_l: Optional[float] = None


class DesignTable(FrozenModel):
    table_id: int
    title: str
    model: str
    delta: float
    quantile_levels: List[int]
    rows: List[DesignTableRow]
    simulated: bool = False
    replicates: Optional[int] = None
    seed: Optional[int] = None
