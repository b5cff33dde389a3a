# app/services/tables.py
"""
Regeneration of the reference design tables.

Tables 2-4 are analytic in their operating characteristics and expected
events; their quantile columns are simulated only when a replicate count is
given. Table 5 is entirely simulated on the exponential survival surrogate.
"""
import logging
from typing import Optional, Union

from app.core.config import settings
from app.core.exceptions import DomainError
from app.schemas.design import HypothesisIndex, NormalDesign, PoissonDesign
from app.schemas.evidence import EvidenceThresholds, Hypotheses
from app.schemas.misleading import AstrayTable
from app.schemas.simulation import SimConfig, StoppingSummary, SurvivalSimModel
from app.schemas.tables import DesignTable, DesignTableRow, SimulatedColumns
from app.services.design_normal import operating_characteristics
from app.services.design_poisson import poisson_operating_characteristics
from app.services.misleading import reproduce_table1
from app.services.simulation import simulate_survival_trial, simulate_walk_design

logger = logging.getLogger(__name__)

TABLE_IDS = (1, 2, 3, 4, 5)
DESIGN_ROWS = (
    (1 / 8, 8.0),
    (1 / 10, 20.0),
    (1 / 20, 20.0),
    (1 / 20, 32.0),
    (1 / 32, 32.0),
    (1 / 32, 64.0),
    (1 / 64, 64.0),
)
SURVIVAL_KS = (8.0, 20.0, 32.0, 64.0)
PSI_TABLE2 = 0.415
PSI_TABLE4 = 2.41
# Table 3 is laid out for the rounded distance 0.25, i.e. theta1 = -0.5
THETA1_TABLE3 = -0.5
SURVIVAL_BURN_IN = 10


def _columns(summary: StoppingSummary) -> SimulatedColumns:
    return SimulatedColumns(
        mean_events=summary.mean_events,
        quantiles=summary.quantiles,
        max_events=summary.max_events,
        prob_non_stop=summary.prob_non_stop,
        se_non_stop=summary.se_non_stop,
    )


def _design(table_id: int, thresholds: EvidenceThresholds) -> Union[NormalDesign, PoissonDesign]:
    if table_id == 2:
        return NormalDesign(hyps=Hypotheses.from_hazard_ratios(PSI_TABLE2), thresholds=thresholds)
    if table_id == 3:
        return NormalDesign(hyps=Hypotheses(theta0=0.0, theta1=THETA1_TABLE3), thresholds=thresholds)
    return PoissonDesign(psi1=PSI_TABLE4, g=1.0, lambda_c=0.25, thresholds=thresholds)


def _walk_table(table_id: int, replicates: Optional[int], seed: Optional[int]) -> DesignTable:
    rows = []
    delta = 0.0
    for k0, k1 in DESIGN_ROWS:
        thresholds = EvidenceThresholds(k0=k0, k1=k1)
        design = _design(table_id, thresholds)
        delta = design.delta
        if isinstance(design, PoissonDesign):
            oc = poisson_operating_characteristics(design)
        else:
            oc = operating_characteristics(design)
        null = alt = None
        if replicates:
            base = SimConfig(replicates=replicates, seed=seed if seed is not None else settings.EVIDENCE_SEED)
            null = _columns(simulate_walk_design(design, base))
            alt = _columns(
                simulate_walk_design(design, base.model_copy(update={"truth": HypothesisIndex.ALT}))
            )
        rows.append(
            DesignTableRow(
                k0=k0,
                k1=k1,
                alpha_l=oc.alpha_l,
                power_l=oc.power_l,
                e_events_null=oc.e_events_null,
                e_events_alt=oc.e_events_alt,
                null=null,
                alt=alt,
            )
        )
    titles = {
        2: f"Normal approximation design, H1: psi = {PSI_TABLE2}",
        3: "Normal approximation design, delta = 0.25",
        4: f"Poisson design, H1: psi = {PSI_TABLE4}, g = 1",
    }
    return DesignTable(
        table_id=table_id,
        title=titles[table_id],
        model="poisson" if table_id == 4 else "normal",
        delta=delta,
        quantile_levels=[25, 50, 75] if table_id == 3 else [25, 50, 75, 80, 90, 95],
        rows=rows,
        simulated=bool(replicates),
        replicates=replicates or None,
        seed=seed if replicates else None,
    )


def _survival_table(replicates: int, seed: Optional[int]) -> DesignTable:
    config = SimConfig(
        replicates=replicates,
        seed=seed if seed is not None else settings.EVIDENCE_SEED,
        burn_in_events=SURVIVAL_BURN_IN,
    )
    hyps = Hypotheses.from_hazard_ratios(PSI_TABLE2)
    rows = []
    for k in SURVIVAL_KS:
        design = NormalDesign(hyps=hyps, thresholds=EvidenceThresholds.symmetric(k))
        null = simulate_survival_trial(design, SurvivalSimModel(psi_true=1.0), config)
        alt = simulate_survival_trial(design, SurvivalSimModel(psi_true=PSI_TABLE2), config)
        rows.append(
            DesignTableRow(
                k0=1.0 / k,
                k1=k,
                alpha_l=null.prob_stop_efficacy,
                power_l=alt.prob_stop_efficacy,
                null=_columns(null),
                alt=_columns(alt),
                se_alpha_l=null.se_stop_efficacy,
                se_power_l=alt.se_stop_efficacy,
            )
        )
    return DesignTable(
        table_id=5,
        title="Simulated survival trial, 50 subjects per group, looks from 10 events",
        model="survival",
        delta=abs(hyps.theta1 - hyps.theta0) / 2.0,
        quantile_levels=[25, 50, 75, 80, 90, 95],
        rows=rows,
        simulated=True,
        replicates=replicates,
        seed=config.seed,
    )


def reproduce_table(
    table_id: int,
    replicates: Optional[int] = None,
    seed: Optional[int] = None,
) -> Union[AstrayTable, DesignTable]:
    if table_id not in TABLE_IDS:
        raise DomainError(f"unknown table {table_id}; choose one of {TABLE_IDS}")
    logger.info(f"Reproducing table {table_id} (replicates={replicates}, seed={seed})")
    if table_id == 1:
        return reproduce_table1()
    if table_id == 5:
        if not replicates:
            raise DomainError("table 5 is simulated; a replicate count is required")
        return _survival_table(replicates, seed)
    return _walk_table(table_id, replicates, seed)
