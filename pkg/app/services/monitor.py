# app/services/monitor.py
"""
Sequential monitoring of a live trial.

The running log LR is always recomputed from the full dataset. The history
keeps one (d, log LR) entry per event in event-time order, each computed on
the records observed up to that event time.
"""
import logging
import math
from typing import Iterable, Iterator, List, Optional, Tuple, Union

from scipy.special import log_ndtr

from app.core.exceptions import DomainError, IngestionError, MLEDivergesError, NoEventsError
from app.schemas.design import NormalDesign, PoissonDesign
from app.schemas.evidence import (
    EvidenceThresholds,
    Hypotheses,
    SupportInterval,
    SurvivalDataset,
    SurvivalRecord,
)
from app.schemas.misleading import EvidenceScale, LookWindow
from app.schemas.monitor import (
    DecisionRecord,
    HistoryEntry,
    InterimProjection,
    MonitorDecision,
    PosthocScan,
    RemainingUnit,
    TrialState,
    Verdict,
)
from app.services.design_normal import delta_from_hazard_ratio
from app.services.design_poisson import original_orientation
from app.services.evidence import (
    RiskTable,
    log_lr_from_table,
    safe_exp,
    suplr_posthoc,
    support_interval,
)
from app.services.misleading import astray_report, extended_bump, normal_cdf

logger = logging.getLogger(__name__)

SUPPORT_LEVELS = (8.0, 32.0)


def design_hypotheses(design: Union[NormalDesign, PoissonDesign]) -> Hypotheses:
    if isinstance(design, PoissonDesign):
        design = original_orientation(design)
        return Hypotheses.from_hazard_ratios(design.psi1, design.psi0)
    return design.hyps


def design_scale(design: Union[NormalDesign, PoissonDesign]) -> EvidenceScale:
    """Per-event distance and overshoot used for interim projections"""
    if isinstance(design, PoissonDesign):
        return EvidenceScale(delta=delta_from_hazard_ratio(design.psi1, design.psi0), rho=design.rho)
    return EvidenceScale(delta=design.delta, rho=design.rho)


def new_trial(
    design: Union[NormalDesign, PoissonDesign],
    thresholds: Optional[EvidenceThresholds] = None,
    burn_in_events: int = 1,
    max_events: Optional[int] = None,
) -> TrialState:
    return TrialState(
        design=design,
        thresholds=thresholds or design.thresholds,
        burn_in_events=burn_in_events,
        max_events=max_events,
    )


def current_log_lr(state: TrialState) -> float:
    """Full-data partial log LR; 0 before the first event"""
    if state.d == 0:
        return 0.0
    table = RiskTable.from_dataset(state.data)
    return log_lr_from_table(table, design_hypotheses(state.design))


def _history_from(data: SurvivalDataset, hyps: Hypotheses, kept: Tuple[HistoryEntry, ...]) -> Tuple[HistoryEntry, ...]:
    """
    Extend kept entries with one entry per later event, in event-time order.
    Entry d is the log LR of the records with time up to the d-th event time.
    """
    ordered = sorted(data.records, key=lambda r: r.time)
    entries = list(kept)
    d = 0
    for record in ordered:
        if not record.event:
            continue
        d += 1
        if d <= len(kept):
            continue
        cut = SurvivalDataset(records=tuple(r for r in ordered if r.time <= record.time))
        entries.append(HistoryEntry(d=d, log_lr=log_lr_from_table(RiskTable.from_dataset(cut), hyps)))
    return tuple(entries)


def ingest_event(state: TrialState, record: SurvivalRecord) -> TrialState:
    """
    Add one record. A repeated subject with identical fields is ignored; a
    repeated subject with different fields is rejected. History entries at or
    after the record's time are recomputed.
    """
    for existing in state.data.records:
        if existing.subject_id == record.subject_id:
            if existing == record:
                logger.debug(f"Duplicate record for subject {record.subject_id} ignored")
                return state
            raise IngestionError(f"conflicting duplicate subject_id {record.subject_id!r}")

    updated = state.model_copy(update={"data": state.data.with_record(record)})
    kept = sum(1 for r in state.data.records if r.event == 1 and r.time < record.time)
    if kept == state.d and record.event == 0:
        return updated
    if any(r.event == 1 and r.time > record.time for r in state.data.records):
        logger.warning(
            f"Late record for subject {record.subject_id} at time {record.time}; "
            f"recomputing history from event {kept + 1}"
        )
    history = _history_from(updated.data, design_hypotheses(state.design), state.history[:kept])
    return updated.model_copy(update={"history": history})


def decide(
    log_lr: float,
    d: int,
    thresholds: EvidenceThresholds,
    burn_in_events: int,
    max_events: Optional[int] = None,
) -> Verdict:
    if d < burn_in_events:
        return Verdict.CONTINUE
    if log_lr > math.log(thresholds.k1):
        return Verdict.STOP_EFFICACY
    if log_lr < math.log(thresholds.k0):
        return Verdict.STOP_INEFFICACY
    if max_events is not None and d >= max_events:
        return Verdict.RESOURCES_EXHAUSTED_WEAK
    return Verdict.CONTINUE


def evaluate(state: TrialState) -> MonitorDecision:
    log_lr = current_log_lr(state)
    verdict = decide(log_lr, state.d, state.thresholds, state.burn_in_events, state.max_events)
    if verdict != Verdict.CONTINUE:
        logger.info(f"Trial decision at d={state.d}: {verdict.value} (log LR {log_lr:.4f})")
    return MonitorDecision(verdict=verdict, lr=safe_exp(log_lr), log_lr=log_lr, d_events=state.d)


def _crossing_under_alt(scale: EvidenceScale, log_k: float, n: float) -> float:
    """Chance that the favourable walk reaches log LR >= log_k within n events (overshoot corrected)"""
    c = log_k / scale.delta + scale.rho
    root = math.sqrt(n)
    drift = scale.delta / 2.0
    direct = normal_cdf((drift * n - c) / root)
    reflected = math.exp(scale.delta * c + float(log_ndtr((-c - drift * n) / root)))
    return min(1.0, direct + reflected)


def interim_projection(
    state: TrialState,
    k_target: float,
    remaining: float,
    unit: RemainingUnit = RemainingUnit.EVENTS,
    event_probability: Optional[float] = None,
    sequential: bool = False,
) -> InterimProjection:
    """
    Chance that the final LR exceeds k_target given the interim LR.

    The final LR is the interim LR times the LR of the remaining data, so the
    question becomes whether the remaining data reach k_target/k_int. With
    sequential=False the remaining data are looked at once; otherwise after
    every event.
    """
    if k_target <= 1:
        raise DomainError("target evidence level must exceed 1")
    if remaining < 0:
        raise DomainError("remaining budget must be non-negative")
    if unit == RemainingUnit.PARTICIPANTS:
        if event_probability is None or not 0 < event_probability <= 1:
            raise DomainError("participant budgets need an event probability in (0, 1]")
        remaining_events = remaining * event_probability
    else:
        remaining_events = float(remaining)

    log_k_int = current_log_lr(state)
    k_int = safe_exp(log_k_int)
    log_residual = math.log(k_target) - log_k_int
    residual = safe_exp(log_residual)
    achieved = log_residual <= 0.0
    scale = design_scale(state.design)

    if achieved:
        p_null = p_alt = 1.0
    elif remaining_events <= 0:
        p_null = p_alt = 0.0
    elif sequential:
        # an infinite residual is out of reach under the null
        window = LookWindow(m0=1, m=max(remaining_events, 1.0))
        p_null = 0.0 if math.isinf(residual) else min(1.0, extended_bump(scale, window, residual))
        p_alt = _crossing_under_alt(scale, log_residual, remaining_events)
    else:
        root = scale.delta * math.sqrt(remaining_events)
        p_null = normal_cdf(-log_residual / root - root / 2.0)
        p_alt = normal_cdf(root / 2.0 - log_residual / root)

    logger.info(
        f"Interim projection k_int={k_int:.4g} target={k_target:g} residual={residual:.4g} "
        f"over {remaining_events:g} events: P0={p_null:.4f} P1={p_alt:.4f}"
    )
    return InterimProjection(
        k_int=k_int,
        k_target=k_target,
        residual_threshold=residual,
        remaining_budget=remaining,
        remaining_unit=unit,
        remaining_events=remaining_events,
        prob_under_null=p_null,
        prob_under_alt=p_alt,
        sequential=sequential,
        achieved=achieved,
    )


def posthoc_scan(state: TrialState, k: float) -> PosthocScan:
    """Largest LR for any alternative below theta0, with the led-astray bound for context"""
    if not k > 1:
        raise DomainError(f"evidence level k must exceed 1, got {k}")
    theta0 = design_hypotheses(state.design).theta0
    sup_lr = suplr_posthoc(state.data, theta0)
    bound = None
    if state.d >= state.burn_in_events:
        bound = astray_report(LookWindow(m0=state.burn_in_events, m=state.d), k).reported
    return PosthocScan(theta0=theta0, k=k, sup_lr=sup_lr, astray=sup_lr >= k, astray_bound=bound)


def support_intervals(state: TrialState, ks: Tuple[float, ...] = SUPPORT_LEVELS) -> List[SupportInterval]:
    """1/k support intervals; empty while there are no events or the MLE diverges"""
    try:
        return [support_interval(state.data, k) for k in ks]
    except (NoEventsError, MLEDivergesError):
        return []


def monitor_step(
    state: TrialState,
    record: SurvivalRecord,
    project_to: Optional[float] = None,
    remaining: Optional[float] = None,
    unit: RemainingUnit = RemainingUnit.EVENTS,
    event_probability: Optional[float] = None,
) -> Tuple[TrialState, DecisionRecord]:
    state = ingest_event(state, record)
    decision = evaluate(state)
    projection = None
    if project_to is not None and remaining is not None and state.d > 0:
        projection = interim_projection(state, project_to, remaining, unit, event_probability)
    line = DecisionRecord(
        subject_id=record.subject_id,
        d=state.d,
        log_lr=decision.log_lr if state.d else None,
        verdict=decision.verdict,
        intervals=support_intervals(state) if record.event else [],
        projection=projection,
    )
    return state, line


def decision_stream(
    state: TrialState,
    records: Iterable[SurvivalRecord],
    **projection_options,
) -> Iterator[DecisionRecord]:
    """One decision per ingested record"""
    for record in records:
        state, line = monitor_step(state, record, **projection_options)
        yield line


def replay(state: TrialState, records: Iterable[SurvivalRecord]) -> TrialState:
    """Rebuild a trial by ingesting records in order"""
    for record in records:
        state = ingest_event(state, record)
    return state
