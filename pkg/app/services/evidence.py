# app/services/evidence.py
"""
Evidence measurement from two-arm survival data.

Everything is built on Cox's partial likelihood for a single binary treatment
indicator. Tied event times use the Breslow convention: tied events share one
risk set and the denominator is not adjusted. A censored subject whose time
equals an event time stays in that event's risk set.

With a binary covariate the risk set of event i is summarised by the number of
treated (n1) and control (n0) subjects still at risk, so

    l(theta) = sum_i [theta * Z_i - ln(n1_i * e^theta + n0_i)]

and every quantity below is computed on the log scale.
"""
import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from app.core.exceptions import DomainError, MLEDivergesError, NoEventsError
from app.schemas.evidence import (
    Classification,
    EvidenceReport,
    EvidenceThresholds,
    Hypotheses,
    SupportInterval,
    SurvivalDataset,
)

logger = logging.getLogger(__name__)

MLE_BRACKET = (-10.0, 10.0)
ROOT_XTOL = 1e-12
SUPPORT_XTOL = 1e-10
BENCHMARK_WEAK = 8.0
BENCHMARK_STRONG = 32.0
DEFAULT_THRESHOLDS = EvidenceThresholds.symmetric(BENCHMARK_WEAK)


def safe_exp(value: float) -> float:
    """exp that saturates to inf instead of raising OverflowError"""
    if value > 709.0:
        return math.inf
    return math.exp(value)


class RiskTable(NamedTuple):
    """Per-event treatment indicator with treated/control risk-set sizes"""

    z: np.ndarray
    n1: np.ndarray
    n0: np.ndarray

    @classmethod
    def from_arrays(cls, time: np.ndarray, event: np.ndarray, group: np.ndarray) -> "RiskTable":
        order = np.argsort(time, kind="stable")
        t = np.asarray(time, dtype=float)[order]
        z = np.asarray(group, dtype=np.int64)[order]
        e = np.asarray(event, dtype=np.int64)[order]
        n = t.size

        # treated subjects at index >= j
        treated_from = np.concatenate([np.cumsum(z[::-1])[::-1], [0]])
        first_tied = np.searchsorted(t, t, side="left")
        n1 = treated_from[first_tied]
        n0 = (n - first_tied) - n1

        mask = e == 1
        return cls(z=z[mask], n1=n1[mask], n0=n0[mask])

    @classmethod
    def from_dataset(cls, data: SurvivalDataset) -> "RiskTable":
        return cls.from_arrays(*data.arrays())

    @property
    def d(self) -> int:
        return int(self.z.size)

    def _log_counts(self) -> Tuple[np.ndarray, np.ndarray]:
        with np.errstate(divide="ignore"):
            return np.log(self.n1), np.log(self.n0)

    def loglik(self, theta: float) -> float:
        log_n1, log_n0 = self._log_counts()
        log_risk = np.logaddexp(theta + log_n1, log_n0)
        return float(np.sum(theta * self.z - log_risk))

    def treated_share(self, theta: float) -> np.ndarray:
        """Probability that the failing subject is treated, per risk set"""
        log_n1, log_n0 = self._log_counts()
        return expit(theta + log_n1 - log_n0)

    def score(self, theta: float) -> float:
        return float(np.sum(self.z - self.treated_share(theta)))

    def information(self, theta: float) -> float:
        p = self.treated_share(theta)
        return float(np.sum(p * (1.0 - p)))

    def score_limit(self, direction: int) -> int:
        """Limit of the score as theta -> +inf (direction=+1) or -inf (-1)"""
        if direction > 0:
            return int(self.z.sum() - np.count_nonzero(self.n1 > 0))
        return int(self.z.sum() - np.count_nonzero(self.n0 == 0))

    def loglik_limit(self, direction: int) -> float:
        """Limit of l(theta) at +inf / -inf; +inf when the likelihood is unbounded"""
        slope = self.score_limit(direction)
        if slope * direction > 0:
            return math.inf
        if slope != 0:
            return -math.inf
        if direction > 0:
            dominant, other = self.n1, self.n0
        else:
            dominant, other = self.n0, self.n1
        counts = np.where(dominant > 0, dominant, other)
        return float(-np.sum(np.log(counts)))

    def loglik_at(self, theta: float) -> float:
        if math.isinf(theta):
            return self.loglik_limit(1 if theta > 0 else -1)
        return self.loglik(theta)

    def argmax(self) -> float:
        """Maximiser of l(theta); +-inf when the partial likelihood is monotone"""
        if self.score_limit(+1) >= 0:
            return math.inf
        if self.score_limit(-1) <= 0:
            return -math.inf

        lo, hi = MLE_BRACKET
        for _ in range(32):
            if self.score(hi) <= 0:
                break
            lo, hi = hi, hi * 2.0
        for _ in range(32):
            if self.score(lo) >= 0:
                break
            lo, hi = lo * 2.0, lo
        if lo < MLE_BRACKET[0] or hi > MLE_BRACKET[1]:
            logger.warning(f"MLE lies outside {MLE_BRACKET}; search bracket widened to ({lo}, {hi})")
        return float(brentq(self.score, lo, hi, xtol=ROOT_XTOL))


def _table(data: SurvivalDataset) -> RiskTable:
    table = RiskTable.from_dataset(data)
    if table.d == 0:
        raise NoEventsError()
    return table


def _check_theta(theta: float) -> None:
    if not math.isfinite(theta):
        raise DomainError(f"theta must be finite, got {theta}")


def classify(lr: float, thresholds: EvidenceThresholds) -> Classification:
    """Place a likelihood ratio in one of the three evidence regions"""
    if lr >= thresholds.k1:
        return Classification.STRONG_H1
    if lr <= thresholds.k0:
        return Classification.STRONG_H0
    return Classification.WEAK


def benchmark_label(lr: float) -> str:
    """Verbal strength of an LR against the conventional 8 / 32 benchmarks"""
    strength = lr if lr >= 1 else (math.inf if lr == 0 else 1.0 / lr)
    if strength >= BENCHMARK_STRONG:
        return "strong"
    if strength >= BENCHMARK_WEAK:
        return "moderate"
    return "weak"


def cox_partial_loglik(data: SurvivalDataset, theta: float) -> float:
    """Log of Cox's partial likelihood at theta (Breslow ties)"""
    _check_theta(theta)
    return _table(data).loglik(theta)


def cox_score(data: SurvivalDataset, theta: float) -> float:
    _check_theta(theta)
    return _table(data).score(theta)


def cox_information(data: SurvivalDataset, theta: float) -> float:
    _check_theta(theta)
    return _table(data).information(theta)


def log_lr_from_table(table: RiskTable, hyps: Hypotheses) -> float:
    return table.loglik(hyps.theta1) - table.loglik(hyps.theta0)


def partial_lr(
    data: SurvivalDataset,
    hyps: Hypotheses,
    thresholds: EvidenceThresholds = DEFAULT_THRESHOLDS,
) -> EvidenceReport:
    """Partial likelihood ratio L(theta1)/L(theta0) with its evidence region"""
    table = _table(data)
    log_lr = log_lr_from_table(table, hyps)
    lr = safe_exp(log_lr)
    return EvidenceReport(
        lr=lr,
        log_lr=log_lr,
        classification=classify(lr, thresholds),
        d_events=table.d,
    )


def mle_theta(data: SurvivalDataset) -> float:
    """
    Maximum partial likelihood estimate of the log hazard ratio.

    Raises MLEDivergesError when the events make the likelihood monotone
    (for instance every event in one arm).
    """
    theta_hat = _table(data).argmax()
    if math.isinf(theta_hat):
        raise MLEDivergesError(direction=1 if theta_hat > 0 else -1)
    return theta_hat


def peto_estimate(data: SurvivalDataset) -> float:
    """One-step estimate U(0)/I(0) from the null score and information"""
    table = _table(data)
    info = table.information(0.0)
    if info <= 0:
        raise DomainError("no information at theta = 0")
    return table.score(0.0) / info


def support_interval(data: SurvivalDataset, k: float) -> SupportInterval:
    """1/k likelihood support interval around the MLE"""
    if not k > 1:
        raise DomainError(f"support level k must exceed 1, got {k}")
    table = _table(data)
    theta_hat = mle_theta(data)
    peak = table.loglik(theta_hat)
    log_k = math.log(k)

    def drop(theta: float) -> float:
        return table.loglik(theta) - peak + log_k

    info = table.information(theta_hat)
    step = 1.0 / math.sqrt(info) if info > 0 else 1.0

    endpoints = []
    for sign in (-1.0, 1.0):
        width = step
        far = theta_hat + sign * width
        while drop(far) > 0:
            width *= 2.0
            far = theta_hat + sign * width
        lo, hi = sorted((theta_hat, far))
        endpoints.append(float(brentq(drop, lo, hi, xtol=SUPPORT_XTOL)))

    return SupportInterval(
        k_level=k,
        lower=min(endpoints[0], theta_hat),
        upper=max(endpoints[1], theta_hat),
        theta_hat=theta_hat,
    )


def suplr_posthoc(data: SurvivalDataset, theta0: float) -> float:
    """
    One-sided supremum sup_{theta < theta0} L(theta)/L(theta0).

    Equals L(theta_hat)/L(theta0) when theta_hat < theta0 and 1 otherwise. When
    the likelihood keeps increasing as theta -> -inf the limit is returned,
    which may be inf.
    """
    _check_theta(theta0)
    table = _table(data)
    theta_hat = table.argmax()
    if theta_hat >= theta0:
        return 1.0
    return safe_exp(table.loglik_at(theta_hat) - table.loglik(theta0))


def twosided_suplr(data: SurvivalDataset, theta0: float) -> float:
    """sup over all theta of L(theta)/L(theta0)"""
    _check_theta(theta0)
    table = _table(data)
    return safe_exp(table.loglik_at(table.argmax()) - table.loglik(theta0))


def evidence_summary(
    data: SurvivalDataset,
    hyps: Hypotheses,
    thresholds: EvidenceThresholds,
    support_levels: Tuple[float, ...] = (BENCHMARK_WEAK, BENCHMARK_STRONG),
) -> Tuple[EvidenceReport, Optional[float], list]:
    """LR report plus MLE and support intervals when the MLE exists"""
    report = partial_lr(data, hyps, thresholds)
    try:
        theta_hat = mle_theta(data)
    except MLEDivergesError:
        return report, None, []
    intervals = [support_interval(data, k) for k in support_levels]
    return report, theta_hat, intervals
