# app/services/simulation.py
"""
Seeded Monte Carlo for stopping times, survival-trial designs, led-astray
frequencies and the Bayesian comparator.

Replicate i draws from its own Philox stream keyed by SeedSequence(seed,
spawn_key=(i,)), so results do not depend on how replicates are split
across worker processes. Survival replicates generate their data before
looking at any threshold, which gives common random numbers across designs
that share a seed.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import ndtr
from scipy.stats import ks_2samp

from app.core.exceptions import CalibrationError, OrientationError, SimConfigError
from app.schemas.design import HypothesisIndex, NormalDesign, PoissonDesign
from app.schemas.evidence import EvidenceThresholds, Hypotheses
from app.schemas.misleading import EvidenceScale, LookWindow
from app.schemas.simulation import (
    QUANTILE_LEVELS,
    BayesDesign,
    ProbabilityEstimate,
    SimConfig,
    StoppingSummary,
    SurvivalSimModel,
)
from app.services.evidence import RiskTable, log_lr_from_table

logger = logging.getLogger(__name__)

EFFICACY = 1
INEFFICACY = -1
NON_STOP = 0

WALK_BATCH = 256
BLOCK_SIZE = 2_000


def replicate_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


# Per-event increment samplers for the log likelihood ratio
class NormalSteps(NamedTuple):
    mean: float
    sd: float

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mean, self.sd, size)


class BinomialSteps(NamedTuple):
    p: float
    up: float
    down: float

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.where(rng.random(size) < self.p, self.up, self.down)


# Replicate tasks; each returns (outcome, stopping count, fallback count)
class WalkTask(NamedTuple):
    steps: Union[NormalSteps, BinomialSteps]
    log_k0: float
    log_k1: float
    burn_in: int
    cap: Optional[int]

    def __call__(self, rng: np.random.Generator) -> Tuple[int, int, int]:
        total, n = 0.0, 0
        while True:
            size = WALK_BATCH if self.cap is None else min(WALK_BATCH, self.cap - n)
            if size <= 0:
                return NON_STOP, n, 0
            path = total + np.cumsum(self.steps(rng, size))
            looks = n + 1 + np.arange(size)
            crossed = (looks >= self.burn_in) & ((path > self.log_k1) | (path < self.log_k0))
            if crossed.any():
                j = int(np.argmax(crossed))
                return (EFFICACY if path[j] > self.log_k1 else INEFFICACY), n + j + 1, 0
            total, n = float(path[-1]), n + size


class FirstCrossingTask(NamedTuple):
    """Fixed-alternative walk under H0; hit when log LR >= ln k within [m0, m]"""

    steps: NormalSteps
    log_k: float
    m0: int
    m: int

    def __call__(self, rng: np.random.Generator) -> Tuple[int, int, int]:
        path = np.cumsum(self.steps(rng, self.m))
        looks = np.arange(1, self.m + 1)
        hit = (looks >= self.m0) & (path >= self.log_k)
        if hit.any():
            return EFFICACY, int(np.argmax(hit)) + 1, 0
        return NON_STOP, self.m, 0


class FixedLookTask(NamedTuple):
    """Single look after n observations; hit when log LR >= ln k under H0"""

    delta: float
    n: int
    log_k: float

    def __call__(self, rng: np.random.Generator) -> Tuple[int, int, int]:
        total = rng.normal(0.0, math.sqrt(self.n))
        log_lr = self.delta * total - self.n * self.delta ** 2 / 2.0
        return (EFFICACY if log_lr >= self.log_k else NON_STOP), self.n, 0


class AstrayTask(NamedTuple):
    """Standardised score walk under H0; astray when S_n < 0 and S_n^2/(2n) >= ln k"""

    log_k: float
    m0: int
    m: int

    def __call__(self, rng: np.random.Generator) -> Tuple[int, int, int]:
        path = np.cumsum(rng.standard_normal(self.m))
        looks = np.arange(1, self.m + 1)
        astray = (looks >= self.m0) & (path < 0) & (path ** 2 / (2.0 * looks) >= self.log_k)
        if astray.any():
            return EFFICACY, int(np.argmax(astray)) + 1, 0
        return NON_STOP, self.m, 0


def _survival_data(rng: np.random.Generator, model: SurvivalSimModel):
    """Entry times, latent event times and arms for one simulated trial"""
    per_group = model.subjects_per_group
    group = np.repeat(np.array([0, 1], dtype=np.int64), per_group)
    entry = rng.uniform(0.0, model.accrual_years, 2 * per_group)
    hazard = model.lambda_c * np.where(group == 1, model.psi_true, 1.0)
    latent = rng.exponential(1.0 / hazard)
    return entry, latent, group


def _event_snapshots(entry, latent, group, followup: float, cap: Optional[int]):
    """Yield (d, RiskTable) at each observed event in calendar order"""
    observed = latent <= followup
    calendar = np.sort(entry[observed] + latent[observed])
    if cap is not None:
        calendar = calendar[:cap]
    for d, now in enumerate(calendar, start=1):
        enrolled = entry < now
        start, latent_now = entry[enrolled], latent[enrolled]
        events = ((start + latent_now <= now) & (latent_now <= followup)).astype(np.int64)
        times = np.minimum(np.minimum(latent_now, now - start), followup)
        yield d, RiskTable.from_arrays(times, events, group[enrolled])


class SurvivalTask(NamedTuple):
    model: SurvivalSimModel
    hyps: Hypotheses
    log_k0: float
    log_k1: float
    burn_in: int
    cap: Optional[int]

    def __call__(self, rng: np.random.Generator) -> Tuple[int, int, int]:
        entry, latent, group = _survival_data(rng, self.model)
        d = 0
        for d, table in _event_snapshots(entry, latent, group, self.model.followup_years, self.cap):
            if d < self.burn_in:
                continue
            log_lr = log_lr_from_table(table, self.hyps)
            if log_lr > self.log_k1:
                return EFFICACY, d, 0
            if log_lr < self.log_k0:
                return INEFFICACY, d, 0
        return NON_STOP, d, 0


def look_estimate(table: RiskTable) -> Tuple[Optional[float], bool]:
    """
    (estimate, fallback used). A monotone likelihood falls back to the one-step
    estimate U(0)/I(0); with no information at 0 (one arm out of every risk
    set) there is no estimate and the look is skipped.
    """
    theta_hat = table.argmax()
    if not math.isinf(theta_hat):
        return theta_hat, False
    info = table.information(0.0)
    if info <= 0:
        return None, True
    return table.score(0.0) / info, True


class BayesTask(NamedTuple):
    model: SurvivalSimModel
    bayes: BayesDesign
    burn_in: int
    cap: Optional[int]

    def __call__(self, rng: np.random.Generator) -> Tuple[int, int, int]:
        entry, latent, group = _survival_data(rng, self.model)
        prior_precision = 1.0 / self.bayes.prior_sd ** 2
        fallbacks = d = 0
        for d, table in _event_snapshots(entry, latent, group, self.model.followup_years, self.cap):
            if d < self.burn_in:
                continue
            theta_hat, fallback = look_estimate(table)
            fallbacks += fallback
            if theta_hat is None:
                continue
            precision = prior_precision + d / 4.0
            mean = (self.bayes.prior_mean * prior_precision + theta_hat * d / 4.0) / precision
            benefit = float(ndtr(-mean * math.sqrt(precision)))
            if benefit > self.bayes.upper_posterior_stop:
                return EFFICACY, d, fallbacks
            lower = self.bayes.lower_posterior_stop
            if lower is not None and benefit < lower:
                return INEFFICACY, d, fallbacks
        return NON_STOP, d, fallbacks


def _run_block(task, seed: int, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, 3), dtype=np.int64)
    for row, index in enumerate(range(start, stop)):
        out[row] = task(replicate_stream(seed, index))
    return out


def run_replicates(task, config: SimConfig) -> np.ndarray:
    """(outcome, count, fallbacks) per replicate, in replicate order"""
    starts = list(range(0, config.replicates, BLOCK_SIZE))
    stops = [min(s + BLOCK_SIZE, config.replicates) for s in starts]
    logger.info(
        f"Running {config.replicates} replicates of {type(task).__name__} "
        f"(seed={config.seed}, workers={config.workers})"
    )
    if config.workers <= 1 or len(starts) == 1:
        blocks = [_run_block(task, config.seed, a, b) for a, b in zip(starts, stops)]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            blocks = list(pool.map(_run_block, repeat(task), repeat(config.seed), starts, stops))
    return np.concatenate(blocks)


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def summarise(results: np.ndarray) -> StoppingSummary:
    outcome, counts = results[:, 0], results[:, 1]
    n = int(outcome.size)
    efficacy = np.count_nonzero(outcome == EFFICACY) / n
    inefficacy = np.count_nonzero(outcome == INEFFICACY) / n
    non_stop = np.count_nonzero(outcome == NON_STOP) / n
    levels = np.array(QUANTILE_LEVELS) / 100.0
    quantiles = np.quantile(counts, levels, method="inverted_cdf")
    return StoppingSummary(
        replicates=n,
        mean_events=float(counts.mean()),
        quantiles={str(level): float(q) for level, q in zip(QUANTILE_LEVELS, quantiles)},
        max_events=float(counts.max()),
        prob_stop_efficacy=efficacy,
        prob_stop_inefficacy=inefficacy,
        prob_non_stop=non_stop,
        se_stop_efficacy=_binomial_se(efficacy, n),
        se_stop_inefficacy=_binomial_se(inefficacy, n),
        se_non_stop=_binomial_se(non_stop, n),
    )


def _estimate(results: np.ndarray) -> ProbabilityEstimate:
    n = int(results.shape[0])
    p = np.count_nonzero(results[:, 0] == EFFICACY) / n
    return ProbabilityEstimate(probability=p, standard_error=_binomial_se(p, n), replicates=n)


def _check_config(config: SimConfig) -> None:
    if config.max_events is not None and config.max_events < config.burn_in_events:
        raise SimConfigError("event cap must be at least the burn-in")


def walk_steps(design: Union[NormalDesign, PoissonDesign], truth: HypothesisIndex):
    if isinstance(design, PoissonDesign):
        if not design.oriented:
            raise OrientationError()
        p = design.p1 if truth == HypothesisIndex.ALT else design.p0
        return BinomialSteps(
            p=p,
            up=math.log(design.p1 / design.p0),
            down=math.log((1.0 - design.p1) / (1.0 - design.p0)),
        )
    drift = design.delta ** 2 / 2.0
    return NormalSteps(mean=drift if truth == HypothesisIndex.ALT else -drift, sd=design.delta)


def _walk_task(design: Union[NormalDesign, PoissonDesign], config: SimConfig) -> WalkTask:
    _check_config(config)
    return WalkTask(
        steps=walk_steps(design, config.truth),
        log_k0=math.log(design.thresholds.k0),
        log_k1=math.log(design.thresholds.k1),
        burn_in=config.burn_in_events,
        cap=config.max_events,
    )


def simulate_walk_design(
    design: Union[NormalDesign, PoissonDesign], config: SimConfig
) -> StoppingSummary:
    """Stopping-time distribution of the sequential log likelihood ratio walk"""
    summary = summarise(run_replicates(_walk_task(design, config), config))
    logger.info(
        f"Walk design: efficacy={summary.prob_stop_efficacy:.4f} "
        f"inefficacy={summary.prob_stop_inefficacy:.4f} median={summary.quantiles['50']:g}"
    )
    return summary


def simulate_survival_trial(
    design: NormalDesign, model: SurvivalSimModel, config: SimConfig
) -> StoppingSummary:
    """
    Capped two-arm trial monitored with the Cox partial LR at every event.

    The truth is model.psi_true; config.truth is not used. Replicates that
    run out of subjects or follow-up with weak evidence count as non-stop.
    """
    _check_config(config)
    task = SurvivalTask(
        model=model,
        hyps=design.hyps,
        log_k0=math.log(design.thresholds.k0),
        log_k1=math.log(design.thresholds.k1),
        burn_in=config.burn_in_events,
        cap=config.max_events,
    )
    summary = summarise(run_replicates(task, config))
    logger.info(
        f"Survival trial psi_true={model.psi_true:g} k1={design.thresholds.k1:g}: "
        f"efficacy={summary.prob_stop_efficacy:.4f} non-stop={summary.prob_non_stop:.4f}"
    )
    return summary


def simulate_led_astray(k: float, window: LookWindow, config: SimConfig) -> ProbabilityEstimate:
    if not k > 1:
        raise SimConfigError(f"evidence level k must exceed 1, got {k}")
    if not window.bounded:
        raise SimConfigError("led-astray simulation needs a finite last look")
    if config.truth != HypothesisIndex.NULL:
        raise SimConfigError("led-astray simulation runs under the null")
    task = AstrayTask(log_k=math.log(k), m0=window.m0, m=int(window.m))
    return _estimate(run_replicates(task, config))


def simulate_fixed_misleading(k: float, n: int, delta: float, config: SimConfig) -> ProbabilityEstimate:
    """Frequency of LR >= k for the false alternative after exactly n observations"""
    if not k > 1 or n < 1 or delta <= 0:
        raise SimConfigError("need k > 1, n >= 1 and delta > 0")
    return _estimate(run_replicates(FixedLookTask(delta=delta, n=n, log_k=math.log(k)), config))


def simulate_extended_bump(
    scale: EvidenceScale, window: LookWindow, k: float, config: SimConfig
) -> ProbabilityEstimate:
    if not k > 1:
        raise SimConfigError(f"evidence level k must exceed 1, got {k}")
    if not window.bounded:
        raise SimConfigError("extended bump simulation needs a finite last look")
    drift = scale.delta ** 2 / 2.0
    task = FirstCrossingTask(
        steps=NormalSteps(mean=-drift, sd=scale.delta),
        log_k=math.log(k),
        m0=window.m0,
        m=int(window.m),
    )
    return _estimate(run_replicates(task, config))


def simulate_bayes_design(
    bayes: BayesDesign, model: SurvivalSimModel, config: SimConfig
) -> StoppingSummary:
    """
    Posterior-probability stopping on the survival data paths.

    The posterior combines the normal prior with theta_hat ~ N(theta, 4/d);
    when the partial likelihood is monotone the one-step estimate U(0)/I(0)
    stands in for theta_hat.
    """
    _check_config(config)
    task = BayesTask(model=model, bayes=bayes, burn_in=config.burn_in_events, cap=config.max_events)
    results = run_replicates(task, config)
    fallbacks = int(results[:, 2].sum())
    if fallbacks:
        logger.warning(
            f"MLE diverged at {fallbacks} looks; one-step estimate used, or the look skipped "
            f"when one arm was out of the risk sets"
        )
    return summarise(results)


def prior_event_equivalent(bayes: BayesDesign) -> float:
    """Prior information expressed as events, 4/sd^2"""
    return 4.0 / bayes.prior_sd ** 2


def posterior_odds(lower: float, upper: float) -> Tuple[float, float]:
    """Posterior stopping probabilities as odds, (l/(1-l), u/(1-u))"""
    for value in (lower, upper):
        if not 0 < value < 1:
            raise CalibrationError(f"posterior probabilities must lie in (0, 1), got {value}")
    return lower / (1.0 - lower), upper / (1.0 - upper)


def bayes_lr_calibration(bayes: BayesDesign) -> EvidenceThresholds:
    """LR thresholds equivalent to the posterior stops when the prior odds are one"""
    if bayes.prior_mean != 0.0:
        raise CalibrationError("calibration requires unit prior odds")
    if bayes.lower_posterior_stop is None:
        raise CalibrationError("calibration requires both posterior stopping probabilities")
    k0, k1 = posterior_odds(bayes.lower_posterior_stop, bayes.upper_posterior_stop)
    if not k0 < 1 < k1:
        raise CalibrationError("posterior stops must straddle 1/2 to give evidence thresholds")
    return EvidenceThresholds(k0=k0, k1=k1)


def ks_distance(first: Sequence[float], second: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic"""
    return float(ks_2samp(np.asarray(first), np.asarray(second)).statistic)


def walk_stopping_counts(
    design: Union[NormalDesign, PoissonDesign], config: SimConfig
) -> np.ndarray:
    """Raw stopping counts of the walk, for distribution comparisons"""
    return run_replicates(_walk_task(design, config), config)[:, 1]
