# app/services/design_normal.py
"""
Sequential design projections under the normal approximation to the log
hazard ratio, theta_hat ~ N(theta, 4/d).

Working in information time (events), the log likelihood ratio divided by the
per-event distance delta is a random walk with unit variance and drift
phi0 = -delta/2 under H0, phi1 = +delta/2 under H1. The boundaries are
a = ln(k0)/delta and b = ln(k1)/delta; rho corrects the continuous-time
Wald/Siegmund approximations for the expected overshoot in discrete time.
"""
import logging
import math
from typing import Optional, Tuple

from app.core.exceptions import DomainError
from app.schemas.design import (
    DesignReport,
    EventBudget,
    NormalDesign,
    OperatingCharacteristics,
)

logger = logging.getLogger(__name__)


def delta_from_hazard_ratio(psi1: float, psi0: float = 1.0) -> float:
    """Delta = |ln psi1 - ln psi0| / 2"""
    if psi1 <= 0 or psi0 <= 0:
        raise DomainError("hazard ratios must be positive")
    if psi1 == psi0:
        raise DomainError("psi1 and psi0 must differ")
    return abs(math.log(psi1) - math.log(psi0)) / 2.0


def delta_from_events(theta1: float, theta0: float, allocation: float = 1.0) -> float:
    """Per-event distance with variance 1/d_t + 1/d_c, allocation = d_t/d_c"""
    if allocation <= 0:
        raise DomainError("allocation ratio must be positive")
    share = allocation / (1.0 + allocation)
    return abs(theta1 - theta0) * math.sqrt(share * (1.0 - share))


def freedman_moments(psi: float, d: float) -> Tuple[float, float]:
    """Mean and variance of the log hazard ratio estimate from Freedman's formulation"""
    if psi <= 0:
        raise DomainError("hazard ratio must be positive")
    if d < 1:
        raise DomainError("at least one event is required")
    mean = 2.0 * (psi - 1.0) / (psi + 1.0)
    variance = 16.0 * psi / (d * (psi + 1.0) ** 2)
    return mean, variance


def freedman_delta(psi1: float, psi0: float = 1.0) -> float:
    """Per-event distance between the Freedman means, scaled by the null standard deviation"""
    mean1, _ = freedman_moments(psi1, 1)
    mean0, var0 = freedman_moments(psi0, 1)
    return abs(mean1 - mean0) / math.sqrt(var0)


def wald_characteristics(
    delta: float,
    a: float,
    b: float,
    rho: float,
    phi0: float,
    phi1: float,
) -> OperatingCharacteristics:
    """
    Misleading-evidence rates and expected stopping events for a two-boundary
    random walk with overshoot correction.

    Args:
        delta: distance scaling the walk (per event)
        a: lower boundary ln(k0)/delta
        b: upper boundary ln(k1)/delta
        rho: overshoot constant
        phi0: drift of the scaled walk under H0
        phi1: drift of the scaled walk under H1

    Returns:
        OperatingCharacteristics with alpha_l, power_l, E0[D], E1[D]
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    lower = (a - rho) * delta
    upper = (b + rho) * delta

    alpha = (1.0 - math.exp(lower)) / (math.exp(upper) - math.exp(lower))
    power = (1.0 - math.exp(-lower)) / (math.exp(-upper) - math.exp(-lower))

    e_null = ((b + rho) * alpha + (a - rho) * (1.0 - alpha)) / phi0
    e_alt = ((b + rho) * power + (a - rho) * (1.0 - power)) / phi1

    assert 0.0 <= alpha <= 1.0, f"alpha_l out of range: {alpha}"
    assert 0.0 <= power <= 1.0, f"power_l out of range: {power}"
    return OperatingCharacteristics(
        alpha_l=alpha,
        power_l=power,
        e_events_null=e_null,
        e_events_alt=e_alt,
    )


def operating_characteristics(design: NormalDesign) -> OperatingCharacteristics:
    """alpha_l, power_l and expected events for a normal-approximation design"""
    result = wald_characteristics(
        delta=design.delta,
        a=design.a,
        b=design.b,
        rho=design.rho,
        phi0=design.phi0,
        phi1=design.phi1,
    )
    k0, k1 = design.thresholds.k0, design.thresholds.k1
    assert result.alpha_l <= (1 - k0) / (k1 - k0) + 1e-12
    assert result.power_l >= k1 * (1 - k0) / (k1 - k0) - 1e-12
    return result


def subjects_needed(budget: EventBudget) -> int:
    """Participants to enrol so that d events are expected: ceil(d/p)"""
    return budget.subjects


def table_events(value: float) -> int:
    """Expected events as whole events for tables (rounded up)"""
    return math.ceil(value - 1e-9)


def design_report(design: NormalDesign, event_probability: Optional[float] = None) -> DesignReport:
    characteristics = operating_characteristics(design)
    notes = []
    subjects_null = subjects_alt = None
    if event_probability is not None:
        subjects_null = subjects_needed(
            EventBudget(events=characteristics.e_events_null, event_probability=event_probability)
        )
        subjects_alt = subjects_needed(
            EventBudget(events=characteristics.e_events_alt, event_probability=event_probability)
        )
    if design.allocation != 1.0:
        notes.append(f"unequal arms: allocation {design.allocation:g} uses variance 1/d_t + 1/d_c")

    logger.info(
        f"Normal design delta={design.delta:.4f} k0={design.thresholds.k0:g} "
        f"k1={design.thresholds.k1:g}: alpha_l={characteristics.alpha_l:.4f} "
        f"power_l={characteristics.power_l:.4f}"
    )
    return DesignReport(
        model="normal",
        delta=design.delta,
        a=design.a,
        b=design.b,
        rho=design.rho,
        characteristics=characteristics,
        subjects_null=subjects_null,
        subjects_alt=subjects_alt,
        notes=notes,
    )
