"""Fit power-law incidence curves and invert them to mutation-rate schedules.

An observed cumulative incidence I(t) = c * t**gamma pins the rate model:
with success probability sigma the matching rate scale is c*gamma/sigma, and
more generally the rate is the derivative of the incidence divided by sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError
from .incidence import IncidenceCurve
from .rates import TabulatedRate

__all__ = [
    "PowerLawFit",
    "RateEstimate",
    "power_law_mu0",
    "fit_power_law",
    "rate_from_incidence",
]


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares power law I(t) = c * t**gamma in log-log space.

    ``r_squared`` is the coefficient of determination of the log-log
    regression (1.0 for a zero-variance response, where the constant model
    is a perfect fit).  ``mu0`` stays None until a success probability is
    supplied via :meth:`with_sigma`.
    """

    c: float
    gamma: float
    r_squared: float
    n_points: int
    n_excluded: int
    mu0: Optional[float] = None

    def with_sigma(self, sigma: float) -> "PowerLawFit":
        """Attach the derived rate scale c*gamma/sigma."""
        return replace(self, mu0=power_law_mu0(self.c, self.gamma, sigma))


class RateEstimate(NamedTuple):
    """A tabulated rate recovered from an incidence curve."""

    rate: TabulatedRate
    n_clamped: int  # negative derivative estimates zeroed out


def power_law_mu0(c: float, gamma: float, sigma: float) -> float:
    """Rate scale that reproduces incidence c * t**gamma: c*gamma/sigma."""
    if not math.isfinite(c) or c <= 0.0:
        raise DomainError(f"c must be finite and > 0, got {c}")
    if not math.isfinite(gamma) or gamma <= 0.0:
        raise DomainError(f"gamma must be finite and > 0, got {gamma}")
    if not (0.0 < sigma <= 1.0):
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    return c * gamma / sigma


def fit_power_law(points: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Ordinary least squares on (log age, log incidence).

    Points with age <= 0 or incidence <= 0 cannot enter the log-log fit and
    are excluded (the count is reported).  Requires at least two usable
    points.  Deterministic.
    """
    ages, values = [], []
    n_excluded = 0
    for age, value in points:
        age, value = float(age), float(value)
        if not (math.isfinite(age) and math.isfinite(value)):
            raise DomainError(f"non-finite data point ({age}, {value})")
        if age <= 0.0 or value <= 0.0:
            n_excluded += 1
            continue
        ages.append(age)
        values.append(value)
    if len(ages) < 2:
        raise DomainError(
            f"need at least 2 points with positive age and incidence, got {len(ages)}"
        )
    x = np.log(np.asarray(ages))
    y = np.log(np.asarray(values))
    x_mean, y_mean = x.mean(), y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    syy = float(np.sum((y - y_mean) ** 2))
    if sxx == 0.0:
        raise DomainError("all usable points share one age; slope is undefined")
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    if syy == 0.0:
        r_squared = 1.0  # constant response: the fit is exact
    else:
        residuals = y - (intercept + slope * x)
        r_squared = 1.0 - float(np.sum(residuals**2)) / syy
        r_squared = min(max(r_squared, 0.0), 1.0)
    return PowerLawFit(
        c=math.exp(intercept),
        gamma=slope,
        r_squared=r_squared,
        n_points=len(ages),
        n_excluded=n_excluded,
    )


def rate_from_incidence(curve: IncidenceCurve, sigma: float) -> RateEstimate:
    """Recover a tabulated mutation rate as (dI/dt) / sigma.

    The derivative is estimated by secant differences: across both
    neighbors at interior grid points, one-sided at the endpoints.  Noise
    can make estimates negative; those are clamped to 0 and counted.
    """
    if not (0.0 < sigma <= 1.0):
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    if len(curve) < 3:
        raise DomainError(f"need at least 3 curve points, got {len(curve)}")
    ages, values = curve.ages, curve.values
    deriv = np.empty_like(values)
    deriv[0] = (values[1] - values[0]) / (ages[1] - ages[0])
    deriv[-1] = (values[-1] - values[-2]) / (ages[-1] - ages[-2])
    deriv[1:-1] = (values[2:] - values[:-2]) / (ages[2:] - ages[:-2])
    rates = deriv / sigma
    n_clamped = int(np.sum(rates < 0.0))
    rates = np.maximum(rates, 0.0)
    return RateEstimate(TabulatedRate(ages, rates), n_clamped)
