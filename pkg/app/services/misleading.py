# app/services/misleading.py
"""
Closed-form probabilities of misleading evidence and of being led astray.

Bump, Extended Bump and Tepee describe the chance that a fixed pair of simple
hypotheses yields LR >= k in favour of the false one. The led-astray results
describe the chance that *some* post-hoc alternative does, against a true null.
"""
import logging
import math
from typing import Iterable, List, NamedTuple

import numpy as np
from scipy.special import ndtr

from app.core.exceptions import BoundDivergesError, DomainError
from app.schemas.misleading import (
    AstrayReport,
    AstrayTable,
    CurvePoint,
    EvidenceScale,
    LookWindow,
)

logger = logging.getLogger(__name__)

TABLE1_KS = (8.0, 20.0, 32.0, 64.0)
TABLE1_RATIOS = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0)


class BumpMax(NamedTuple):
    probability: float
    distance: float  # maximiser, in standard errors from the null (either sign)


def normal_cdf(x: float) -> float:
    """Standard normal CDF (erfc based, accurate in both tails)"""
    return float(ndtr(x))


def _check_k(k: float) -> None:
    if not k > 1:
        raise DomainError(f"evidence level k must exceed 1, got {k}")


def universal_bound(k: float) -> float:
    _check_k(k)
    return 1.0 / k


def bump(scale: EvidenceScale, n: float, k: float) -> float:
    """Fixed-sample probability of misleading evidence after n observations"""
    _check_k(k)
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    root = scale.delta * math.sqrt(n)
    return normal_cdf(-math.log(k) / root - root / 2.0)


def bump_max(k: float) -> BumpMax:
    """Largest Bump value over all alternatives and where it is attained"""
    _check_k(k)
    distance = math.sqrt(2.0 * math.log(k))
    return BumpMax(probability=normal_cdf(-distance), distance=distance)


def _crossing_terms(c: float, delta: float, t: float):
    """(A(t), B(t)) = (-c/sqrt(t) - delta*sqrt(t)/2, c/sqrt(t) - delta*sqrt(t)/2)"""
    if t == 0:
        return -math.inf, math.inf
    if math.isinf(t):
        return -math.inf, -math.inf
    root = math.sqrt(t)
    return -c / root - delta * root / 2.0, c / root - delta * root / 2.0


def extended_bump(scale: EvidenceScale, window: LookWindow, k: float) -> float:
    """
    Probability of misleading evidence when the data are examined after every
    observation from m0 through m.

    At m0 = 1 the (m0 - 1) terms are taken in their limits, Phi[-inf] = 0 and
    Phi[+inf] = 1, which reproduces the Tepee value as m grows.
    """
    _check_k(k)
    delta, rho = scale.delta, scale.rho
    c = math.log(k) / delta + rho
    m = window.m if window.bounded else math.inf

    a_last, b_last = _crossing_terms(c, delta, m)
    a_first, b_first = _crossing_terms(c, delta, window.m0 - 1)
    reflected = math.exp(-rho * delta) / k

    return (
        normal_cdf(a_last)
        + normal_cdf(a_first)
        + reflected * (normal_cdf(b_first) - normal_cdf(b_last))
    )


def tepee(scale: EvidenceScale, k: float) -> float:
    """Worst case over unlimited looks: exp(-rho*delta)/k"""
    _check_k(k)
    return math.exp(-scale.rho * scale.delta) / k


def astray_fixed(k: float, two_sided: bool = False) -> float:
    """Fixed-design probability that some post-hoc alternative reaches LR >= k"""
    _check_k(k)
    probability = normal_cdf(-math.sqrt(2.0 * math.log(k)))
    return 2.0 * probability if two_sided else probability


def astray_sequential_bound(window: LookWindow, k: float) -> float:
    """Upper bound on being led astray with looks at every n in [m0, m]"""
    _check_k(k)
    if not window.bounded:
        raise BoundDivergesError()
    log_k = math.log(k)
    return math.sqrt(log_k) / (2.0 * k * math.sqrt(math.pi)) * math.log(window.m / window.m0)


def astray_report(window: LookWindow, k: float) -> AstrayReport:
    sequential = astray_sequential_bound(window, k)
    fixed = astray_fixed(k)
    return AstrayReport(
        k=k,
        m0=window.m0,
        m=window.m,
        sequential_bound=sequential,
        fixed_design=fixed,
        reported=max(sequential, fixed),
    )


def reproduce_table1() -> AstrayTable:
    """Led-astray bounds; the fixed-design column (ratio 1) uses the exact Phi value"""
    cells = []
    for k in TABLE1_KS:
        row = []
        for ratio in TABLE1_RATIOS:
            if ratio == 1.0:
                row.append(astray_fixed(k))
            else:
                row.append(astray_sequential_bound(LookWindow.from_ratio(ratio), k))
        cells.append(row)
    return AstrayTable(ks=list(TABLE1_KS), ratios=list(TABLE1_RATIOS), cells=cells)


# Plot-ready curves over the standardised distance
def bump_curve(deltas: Iterable[float], n: float, k: float, rho: float = 0.0) -> List[CurvePoint]:
    return [
        CurvePoint(delta=float(d), probability=bump(EvidenceScale(delta=d, rho=rho), n, k))
        for d in deltas
    ]


def extended_bump_curve(
    deltas: Iterable[float], window: LookWindow, k: float, rho: float
) -> List[CurvePoint]:
    return [
        CurvePoint(delta=float(d), probability=extended_bump(EvidenceScale(delta=d, rho=rho), window, k))
        for d in deltas
    ]


def tepee_curve(deltas: Iterable[float], k: float, rho: float) -> List[CurvePoint]:
    return [
        CurvePoint(delta=float(d), probability=tepee(EvidenceScale(delta=d, rho=rho), k))
        for d in deltas
    ]


def default_deltas(upper: float = 3.0, points: int = 121) -> np.ndarray:
    return np.linspace(upper / points, upper, points)
