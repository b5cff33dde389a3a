# app/api/routes/trials.py
from fastapi import APIRouter, Depends, HTTPException, Query, UploadFile, File, status
from sqlalchemy.orm import Session
from typing import List
import logging

from app.db.session import get_db
from app.models.trial import Trial
from app.schemas.evidence import SurvivalRecord
from app.schemas.monitor import InterimProjection, MonitorDecision, PosthocScan
from app.schemas.trial import (
    IngestResponse,
    IntervalsResponse,
    ProjectionRequest,
    RecordCreate,
    TrialCreate,
    TrialResponse,
)
from app.services import monitor, trials
from app.services.ingestion import read_records

logger = logging.getLogger(__name__)

router = APIRouter()

MAX_UPLOAD_SIZE = 10 * 1024 * 1024  # 10MB


@router.post("/", response_model=TrialResponse, status_code=status.HTTP_201_CREATED)
def create_trial(trial_data: TrialCreate, db: Session = Depends(get_db)):
    """Register a trial to be monitored"""
    trial = trials.create_trial(db, trial_data)
    return trials.trial_response(trial)


@router.get("/", response_model=List[TrialResponse])
def list_trials(
    skip: int = Query(0, ge=0),
    limit: int = Query(100, ge=1, le=1000),
    db: Session = Depends(get_db),
):
    rows = db.query(Trial).order_by(Trial.id).offset(skip).limit(limit).all()
    return [trials.trial_response(trial) for trial in rows]


@router.get("/{trial_id}", response_model=TrialResponse)
def get_trial(trial_id: int, db: Session = Depends(get_db)):
    return trials.trial_response(trials.get_trial(db, trial_id))


@router.post("/{trial_id}/records", response_model=IngestResponse)
def add_record(trial_id: int, record: RecordCreate, db: Session = Depends(get_db)):
    """Ingest one subject record and return the updated decision"""
    trial = trials.get_trial(db, trial_id)
    before = len(trial.records)
    state = trials.add_records(db, trial, [SurvivalRecord(**record.model_dump())])
    return IngestResponse(ingested=len(trial.records) - before, decision=monitor.evaluate(state))


@router.post("/{trial_id}/upload", response_model=IngestResponse)
async def upload_records(
    trial_id: int,
    file: UploadFile = File(...),
    db: Session = Depends(get_db),
):
    """Ingest a CSV file with header subject_id,time,event,group"""
    trial = trials.get_trial(db, trial_id)
    content = await file.read()
    if len(content) > MAX_UPLOAD_SIZE:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="File size must not exceed 10MB"
        )
    records = read_records(content)
    before = len(trial.records)
    state = trials.add_records(db, trial, records)
    logger.info(f"Trial {trial_id}: {len(trial.records) - before} records uploaded from {file.filename}")
    return IngestResponse(ingested=len(trial.records) - before, decision=monitor.evaluate(state))


@router.get("/{trial_id}/decision", response_model=MonitorDecision)
def get_decision(trial_id: int, db: Session = Depends(get_db)):
    return monitor.evaluate(trials.load_state(trials.get_trial(db, trial_id)))


@router.post("/{trial_id}/projection", response_model=InterimProjection)
def get_projection(trial_id: int, request: ProjectionRequest, db: Session = Depends(get_db)):
    state = trials.load_state(trials.get_trial(db, trial_id))
    return monitor.interim_projection(
        state,
        request.k_target,
        request.remaining,
        unit=request.unit,
        event_probability=request.event_probability,
        sequential=request.sequential,
    )


@router.get("/{trial_id}/posthoc", response_model=PosthocScan)
def get_posthoc(trial_id: int, k: float = Query(..., gt=1), db: Session = Depends(get_db)):
    return monitor.posthoc_scan(trials.load_state(trials.get_trial(db, trial_id)), k)


@router.get("/{trial_id}/intervals", response_model=IntervalsResponse)
def get_intervals(trial_id: int, db: Session = Depends(get_db)):
    intervals = monitor.support_intervals(trials.load_state(trials.get_trial(db, trial_id)))
    theta_hat = intervals[0].theta_hat if intervals else None
    return IntervalsResponse(theta_hat=theta_hat, intervals=intervals)
