"""Closed-form predictions for the gap between discrete and exact constants.

Three reference curves in L = |log h| per dimension:

* n = 1: lower bound (pi/(6+L))^2, asymptote pi^2/L^2 and upper bound
  (pi/(L - 3 log L))^2.
* n >= 3: lower bound pi^2/(8(n-1)/(n(n-2)) + h + L)^2, upper bound
  ((n+1) pi/(2L - 6 log L))^2, and an asymptotic bracket between pi^2/L^2
  and (n+1)^2 pi^2/(4 L^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .assembly import check_dimension, hardy_constant


@dataclass(frozen=True)
class PredictionSet:
    n: int
    h: float
    s_exact: float
    gap_asymptotic: float
    gap_lb: float
    gap_ub: Optional[float]  # None when |log h| <= 3 log|log h|
    gap_asymptotic_upper: float

    @property
    def ub_feasible(self) -> bool:
        return self.gap_ub is not None


def predict(n: int, h: float) -> PredictionSet:
    check_dimension(n)
    if not 0.0 < h < 1.0:
        raise ValueError(f"mesh size must lie in (0, 1), got {h}")
    L = -math.log(h)
    pi2 = math.pi**2
    asym = pi2 / L**2
    denom = L - 3.0 * math.log(L) if L > 0 else -1.0
    if n == 1:
        lb = (math.pi / (6.0 + L)) ** 2
        ub = (math.pi / denom) ** 2 if denom > 0 else None
        asym_hi = asym
    else:
        lb = pi2 / (8.0 * (n - 1) / (n * (n - 2)) + h + L) ** 2
        ub = ((n + 1) * math.pi / (2.0 * denom)) ** 2 if denom > 0 else None
        asym_hi = (n + 1) ** 2 * pi2 / (4.0 * L**2)
    return PredictionSet(n=n, h=h, s_exact=hardy_constant(n), gap_asymptotic=asym,
                         gap_lb=lb, gap_ub=ub, gap_asymptotic_upper=asym_hi)


def scaled_ratio(gap_observed: float, gap_predicted: float) -> float:
    if not gap_predicted > 0:
        raise ValueError(f"predicted gap must be positive, got {gap_predicted}")
    return gap_observed / gap_predicted
