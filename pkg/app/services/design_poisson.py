# app/services/design_poisson.py
"""
Sequential design under exponential survival, where events in each arm are
Poisson with mean lambda * exposure.

Conditional on the total number of events, the arm of each event is Bernoulli
with p = psi/(psi + g), g = t_c/t_t the control:treatment exposure ratio. The
design works with that binomial walk; its increments are scaled by
delta = ln(psi1/psi0).
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.stats import poisson

from app.core.exceptions import DomainError, OrientationError
from app.schemas.design import (
    EventSplit,
    ExposureProjection,
    HypothesisIndex,
    OperatingCharacteristics,
    PoissonDesign,
    PoissonDesignReport,
)
from app.services.design_normal import wald_characteristics

logger = logging.getLogger(__name__)

EXPOSURE_RESOLUTION = 1e-6
TAIL_METHODS = ("sf", "sum", "complement")


def p_from_psi(psi: float, g: float = 1.0) -> float:
    """Probability that an event falls in the treated arm"""
    if psi <= 0 or g <= 0:
        raise DomainError("psi and g must be positive")
    return psi / (psi + g)


def psi_from_p(p: float, g: float = 1.0) -> float:
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if g <= 0:
        raise DomainError("g must be positive")
    return g * p / (1.0 - p)


def binomial_loglr(split: EventSplit, design: PoissonDesign) -> float:
    """d_t ln(p1/p0) + d_c ln[(1-p1)/(1-p0)]"""
    p0, p1 = design.p0, design.p1
    return split.d_t * math.log(p1 / p0) + split.d_c * math.log((1.0 - p1) / (1.0 - p0))


def orient_hypotheses(design: PoissonDesign) -> PoissonDesign:
    """
    Reparametrise so that p1 > p0 by inverting the hazard ratios and g.

    The inverted design swaps the roles of the arms; misleading-evidence
    rates and expected event counts are unchanged. Already oriented designs
    are returned as they are.
    """
    if design.oriented:
        return design
    logger.info(f"Reorienting design: psi1={design.psi1:g} -> {1.0 / design.psi1:g}")
    return design.model_copy(
        update={
            "psi1": 1.0 / design.psi1,
            "psi0": 1.0 / design.psi0,
            "g": 1.0 / design.g,
            "flipped": not design.flipped,
        }
    )


def original_orientation(design: PoissonDesign) -> PoissonDesign:
    """Undo orient_hypotheses"""
    if not design.flipped:
        return design
    return design.model_copy(
        update={
            "psi1": 1.0 / design.psi1,
            "psi0": 1.0 / design.psi0,
            "g": 1.0 / design.g,
            "flipped": False,
        }
    )


def binomial_drift(design: PoissonDesign, under: HypothesisIndex) -> float:
    """Mean increment of the scaled walk, p_i + ln[(1-p1)/(1-p0)]/delta"""
    p = design.p1 if under == HypothesisIndex.ALT else design.p0
    return p + math.log((1.0 - design.p1) / (1.0 - design.p0)) / design.delta


def poisson_operating_characteristics(design: PoissonDesign) -> OperatingCharacteristics:
    if not design.oriented:
        raise OrientationError()
    delta = design.delta
    return wald_characteristics(
        delta=delta,
        a=math.log(design.thresholds.k0) / delta,
        b=math.log(design.thresholds.k1) / delta,
        rho=design.rho,
        phi0=binomial_drift(design, HypothesisIndex.NULL),
        phi1=binomial_drift(design, HypothesisIndex.ALT),
    )


def poisson_tail(d: int, mu: float, method: str = "sf") -> float:
    """P(D >= d) for D ~ Poisson(mu)"""
    if method not in TAIL_METHODS:
        raise DomainError(f"unknown tail method {method!r}")
    if mu < 0:
        raise DomainError("mu must be non-negative")
    if d <= 0:
        return 1.0
    if mu == 0:
        return 0.0
    if method == "sf":
        return float(poisson.sf(d - 1, mu))
    if method == "complement":
        return float(1.0 - poisson.cdf(d - 1, mu))
    upper = int(d + mu + 50.0 * math.sqrt(mu) + 100)
    terms = poisson.pmf(np.arange(d, upper + 1), mu)
    return math.fsum(terms.tolist())


def _expected_events(design: PoissonDesign, under: HypothesisIndex, t_c: float) -> float:
    return design.lambda_c * t_c * (1.0 + design.psi(under) / design.g)


def _check_projection(design: PoissonDesign, target_events: float) -> None:
    if design.lambda_c is None:
        raise DomainError("lambda_c is required for exposure projections")
    if target_events <= 0:
        raise DomainError("target events must be positive")


def exposure_time_simple(
    design: PoissonDesign, target_events: float, under: HypothesisIndex
) -> ExposureProjection:
    """Control exposure at which the expected number of events equals the target"""
    design = original_orientation(design)
    _check_projection(design, target_events)
    t_c = target_events / (design.lambda_c * (1.0 + design.psi(under) / design.g))
    return ExposureProjection(
        t_c=t_c,
        t_t=t_c / design.g,
        gamma=None,
        target_events=target_events,
        under=under,
        expected_events=_expected_events(design, under, t_c),
    )


def exposure_time_numeric(
    design: PoissonDesign,
    target_events: float,
    under: HypothesisIndex,
    gamma: float = 0.8,
) -> ExposureProjection:
    """
    Smallest control exposure t_c with P(D >= target) >= gamma.

    The target is rounded up to whole events. Bisection stops once the
    bracket is narrower than EXPOSURE_RESOLUTION and the upper end is returned.
    """
    design = original_orientation(design)
    _check_projection(design, target_events)
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    d = math.ceil(target_events - 1e-9)

    def tail(t_c: float) -> float:
        return poisson_tail(d, _expected_events(design, under, t_c))

    lo, hi = 0.0, 1.0
    while tail(hi) < gamma:
        lo, hi = hi, hi * 2.0
    while hi - lo > EXPOSURE_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if tail(mid) >= gamma:
            hi = mid
        else:
            lo = mid

    return ExposureProjection(
        t_c=hi,
        t_t=hi / design.g,
        gamma=gamma,
        target_events=target_events,
        under=under,
        expected_events=_expected_events(design, under, hi),
    )


def poisson_design_report(design: PoissonDesign, gamma: Optional[float] = 0.8) -> PoissonDesignReport:
    oriented = orient_hypotheses(design)
    characteristics = poisson_operating_characteristics(oriented)
    notes = []
    if oriented.flipped:
        notes.append("hypotheses inverted (psi -> 1/psi, g -> 1/g) so that p1 > p0")

    projections = []
    if design.lambda_c is not None:
        targets = {
            HypothesisIndex.NULL: characteristics.e_events_null,
            HypothesisIndex.ALT: characteristics.e_events_alt,
        }
        for under, events in targets.items():
            projections.append(exposure_time_simple(design, events, under))
            if gamma is not None:
                projections.append(exposure_time_numeric(design, events, under, gamma))

    logger.info(
        f"Poisson design psi1={design.psi1:g} g={design.g:g}: "
        f"alpha_l={characteristics.alpha_l:.4f} power_l={characteristics.power_l:.4f}"
    )
    return PoissonDesignReport(
        design=design,
        oriented_design=oriented,
        characteristics=characteristics,
        projections=projections,
        notes=notes,
    )
