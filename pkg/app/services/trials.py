# app/services/trials.py
"""Persisted trials: storing records and rebuilding monitor state from them"""
import logging
import math
from typing import Iterable, Union

from sqlalchemy import func
from sqlalchemy.orm import Session

from app.core.exceptions import TrialNotFoundError
from app.models.trial import DesignModel, Trial, TrialRecord
from app.schemas.design import NormalDesign, PoissonDesign
from app.schemas.evidence import EvidenceThresholds, Hypotheses, SurvivalRecord
from app.schemas.monitor import TrialState
from app.schemas.trial import TrialCreate, TrialResponse
from app.services import monitor

logger = logging.getLogger(__name__)


def trial_design(trial: Trial) -> Union[NormalDesign, PoissonDesign]:
    thresholds = EvidenceThresholds(k0=trial.k0, k1=trial.k1)
    options = {} if trial.rho is None else {"rho": trial.rho}
    if trial.model == DesignModel.POISSON:
        return PoissonDesign(
            psi1=math.exp(trial.theta1),
            psi0=math.exp(trial.theta0),
            g=trial.g or 1.0,
            thresholds=thresholds,
            **options,
        )
    hyps = Hypotheses(theta0=trial.theta0, theta1=trial.theta1)
    return NormalDesign(hyps=hyps, thresholds=thresholds, **options)


def create_trial(db: Session, trial_data: TrialCreate) -> Trial:
    # validates thresholds and design before anything is stored
    EvidenceThresholds(k0=trial_data.k0, k1=trial_data.k1)
    trial = Trial(**trial_data.model_dump())
    trial_design(trial)
    db.add(trial)
    db.commit()
    db.refresh(trial)
    logger.info(f"Created trial {trial.id} ({trial.name})")
    return trial


def get_trial(db: Session, trial_id: int) -> Trial:
    trial = db.query(Trial).filter(Trial.id == trial_id).first()
    if not trial:
        raise TrialNotFoundError(f"trial {trial_id} not found")
    return trial


def _as_record(row: TrialRecord) -> SurvivalRecord:
    return SurvivalRecord(subject_id=row.subject_id, time=row.time, event=row.event, group=row.arm)


def load_state(trial: Trial) -> TrialState:
    """Replay stored records in ingestion order"""
    state = monitor.new_trial(
        trial_design(trial),
        burn_in_events=trial.burn_in_events,
        max_events=trial.max_events,
    )
    return monitor.replay(state, (_as_record(row) for row in trial.records))


def add_records(db: Session, trial: Trial, records: Iterable[SurvivalRecord]) -> TrialState:
    """
    Ingest records through the monitor and store the new ones. Nothing is
    stored if any record is rejected.
    """
    state = load_state(trial)
    sequence = db.query(func.coalesce(func.max(TrialRecord.sequence), 0)).filter(
        TrialRecord.trial_id == trial.id
    ).scalar()
    try:
        for record in records:
            before = state.data.n
            state = monitor.ingest_event(state, record)
            if state.data.n == before:
                continue
            sequence += 1
            db.add(
                TrialRecord(
                    trial_id=trial.id,
                    sequence=sequence,
                    subject_id=record.subject_id,
                    time=record.time,
                    event=record.event,
                    arm=record.group,
                )
            )
    except Exception:
        db.rollback()
        raise
    db.commit()
    db.refresh(trial)
    return state


def trial_response(trial: Trial) -> TrialResponse:
    return TrialResponse(
        id=trial.id,
        name=trial.name,
        model=trial.model,
        theta0=trial.theta0,
        theta1=trial.theta1,
        g=trial.g,
        rho=trial.rho,
        k0=trial.k0,
        k1=trial.k1,
        burn_in_events=trial.burn_in_events,
        max_events=trial.max_events,
        n_records=len(trial.records),
        d_events=sum(row.event for row in trial.records),
        created_at=trial.created_at,
    )
