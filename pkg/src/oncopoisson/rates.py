"""Mutation-rate models and clonal-expansion success models.

A rate model gives the instantaneous mutation rate ``rate_at(t)`` (events per
year at age ``t``) and its running integral ``cumulative(t)`` (expected event
count by age ``t``).  A success model gives the probability that a mutation
expands into a detectable clone; all supported kinds evaluate to an
age-independent constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .expansion import branching_survival, moran_fixation

__all__ = [
    "RateModel",
    "ConstantRate",
    "PowerLawRate",
    "PiecewiseConstantRate",
    "TabulatedRate",
    "SuccessModel",
    "ConstantSuccess",
    "MoranSuccess",
    "BranchingSuccess",
    "effective_cumulative_rate",
    "load_rate_table",
]


def _check_age(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"age must be finite and >= 0, got {t}")
    return t


class RateModel:
    """Base interface for mutation-rate functions."""

    kind: str

    def rate_at(self, t: float) -> float:
        """Instantaneous rate (events/year) at age ``t`` >= 0."""
        raise NotImplementedError

    def cumulative(self, t: float) -> float:
        """Expected event count on [0, t]; nondecreasing with value 0 at 0."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantRate(RateModel):
    """Age-independent rate: ``rate`` events per year."""

    rate: float
    kind = "constant"

    def __post_init__(self):
        if not math.isfinite(self.rate) or self.rate < 0.0:
            raise DomainError(f"rate must be finite and >= 0, got {self.rate}")

    def rate_at(self, t: float) -> float:
        _check_age(t)
        return self.rate

    def cumulative(self, t: float) -> float:
        return self.rate * _check_age(t)


@dataclass(frozen=True)
class PowerLawRate(RateModel):
    """Rate growing (or decaying) as a power of age.

    ``rate_at(t) = scale * t**(exponent - 1)`` so the cumulative count is
    ``scale * t**exponent / exponent``.  ``scale`` is the rate at age 1;
    ``exponent`` is the power with which the *cumulative* count grows.
    For ``exponent < 1`` the rate diverges as t -> 0+ but remains integrable,
    so point evaluation at 0 is an error while ``cumulative`` is fine.
    """

    scale: float
    exponent: float
    kind = "power-law"

    def __post_init__(self):
        if not math.isfinite(self.scale) or self.scale < 0.0:
            raise DomainError(f"scale must be finite and >= 0, got {self.scale}")
        if not math.isfinite(self.exponent) or self.exponent <= 0.0:
            raise DomainError(f"exponent must be finite and > 0, got {self.exponent}")

    def rate_at(self, t: float) -> float:
        t = _check_age(t)
        if t == 0.0 and self.exponent < 1.0:
            raise DomainError("rate is unbounded at age 0 for exponent < 1")
        return self.scale * t ** (self.exponent - 1.0)

    def cumulative(self, t: float) -> float:
        t = _check_age(t)
        return self.scale * t**self.exponent / self.exponent


@dataclass(frozen=True, eq=False)
class PiecewiseConstantRate(RateModel):
    """Constant rate on each interval between consecutive breakpoints.

    ``rates`` has one more entry than ``breakpoints``: rates[0] applies on
    [0, breakpoints[0]), rates[i] on [breakpoints[i-1], breakpoints[i]), and
    rates[-1] from the last breakpoint onward.
    """

    breakpoints: np.ndarray
    rates: np.ndarray
    kind = "piecewise-constant"

    def __post_init__(self):
        breaks = np.asarray(self.breakpoints, dtype=np.float64).copy()
        rates = np.asarray(self.rates, dtype=np.float64).copy()
        if breaks.ndim != 1 or rates.ndim != 1:
            raise DomainError("breakpoints and rates must be one-dimensional")
        if len(rates) != len(breaks) + 1:
            raise DomainError(
                f"need len(rates) == len(breakpoints) + 1, "
                f"got {len(rates)} rates for {len(breaks)} breakpoints"
            )
        if len(breaks) and (breaks[0] <= 0.0 or not np.all(np.diff(breaks) > 0.0)):
            raise DomainError("breakpoints must be strictly increasing and > 0")
        if not np.all(np.isfinite(breaks)):
            raise DomainError("breakpoints must be finite")
        if not np.all(np.isfinite(rates)) or np.any(rates < 0.0):
            raise DomainError("rates must be finite and >= 0")
        breaks.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "breakpoints", breaks)
        object.__setattr__(self, "rates", rates)
        # Cumulative count at each breakpoint, for O(log k) cumulative().
        edges = np.concatenate(([0.0], breaks))
        cum = np.concatenate(([0.0], np.cumsum(rates[:-1] * np.diff(edges))))
        cum.setflags(write=False)
        object.__setattr__(self, "_cum_at_breaks", cum)

    def rate_at(self, t: float) -> float:
        t = _check_age(t)
        idx = int(np.searchsorted(self.breakpoints, t, side="right"))
        return float(self.rates[idx])

    def cumulative(self, t: float) -> float:
        t = _check_age(t)
        idx = int(np.searchsorted(self.breakpoints, t, side="right"))
        left_edge = 0.0 if idx == 0 else float(self.breakpoints[idx - 1])
        return float(self._cum_at_breaks[idx]) + float(self.rates[idx]) * (t - left_edge)


@dataclass(frozen=True, eq=False)
class TabulatedRate(RateModel):
    """Rate sampled on an age grid, linearly interpolated between samples.

    Outside the grid the rate is clamped to the nearest sampled value, so
    the model is total on [0, inf).  The cumulative count integrates the
    interpolant exactly (piecewise quadratic between grid points).
    """

    ages: np.ndarray
    rates: np.ndarray
    kind = "tabulated"

    def __post_init__(self):
        ages = np.asarray(self.ages, dtype=np.float64).copy()
        rates = np.asarray(self.rates, dtype=np.float64).copy()
        if ages.ndim != 1 or rates.ndim != 1 or len(ages) != len(rates):
            raise DomainError("ages and rates must be one-dimensional and equal length")
        if len(ages) < 2:
            raise DomainError("need at least two grid points")
        if not np.all(np.isfinite(ages)) or ages[0] < 0.0:
            raise DomainError("ages must be finite and >= 0")
        if not np.all(np.diff(ages) > 0.0):
            raise DomainError("ages must be strictly increasing")
        if not np.all(np.isfinite(rates)) or np.any(rates < 0.0):
            raise DomainError("rates must be finite and >= 0")
        ages.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "rates", rates)
        # Exact integral of the interpolant, accumulated at the grid points.
        seg = 0.5 * (rates[:-1] + rates[1:]) * np.diff(ages)
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        cum.setflags(write=False)
        object.__setattr__(self, "_cum_at_knots", cum)

    def rate_at(self, t: float) -> float:
        t = _check_age(t)
        return float(np.interp(t, self.ages, self.rates))

    def cumulative(self, t: float) -> float:
        t = _check_age(t)
        ages, rates = self.ages, self.rates
        if t <= ages[0]:
            return float(rates[0]) * t
        if t >= ages[-1]:
            head = float(rates[0]) * float(ages[0])
            return head + float(self._cum_at_knots[-1]) + float(rates[-1]) * (t - float(ages[-1]))
        idx = int(np.searchsorted(ages, t, side="right")) - 1
        a, b = float(ages[idx]), float(ages[idx + 1])
        ra, rb = float(rates[idx]), float(rates[idx + 1])
        x = t - a
        partial = ra * x + 0.5 * (rb - ra) * x * x / (b - a)
        head = float(rates[0]) * float(ages[0])
        return head + float(self._cum_at_knots[idx]) + partial


class SuccessModel:
    """Base interface for clonal-expansion success probabilities."""

    kind: str

    def probability(self) -> float:
        """Probability in [0, 1] that a new mutation expands."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantSuccess(SuccessModel):
    """Fixed success probability."""

    sigma: float
    kind = "constant"

    def __post_init__(self):
        if not (0.0 <= self.sigma <= 1.0):
            raise DomainError(f"sigma must lie in [0, 1], got {self.sigma}")

    def probability(self) -> float:
        return self.sigma


@dataclass(frozen=True)
class MoranSuccess(SuccessModel):
    """Success = Moran fixation probability for (fitness, cells)."""

    fitness: float
    cells: int
    kind = "moran"

    def __post_init__(self):
        moran_fixation(self.fitness, self.cells)  # validates

    def probability(self) -> float:
        return moran_fixation(self.fitness, self.cells)


@dataclass(frozen=True)
class BranchingSuccess(SuccessModel):
    """Success = survival probability of a binary branching process."""

    division_prob: float
    kind = "branching"

    def __post_init__(self):
        branching_survival(self.division_prob)  # validates

    def probability(self) -> float:
        return branching_survival(self.division_prob)


def effective_cumulative_rate(rate: RateModel, success: SuccessModel, t: float) -> float:
    """Expected count of *successful* mutations by age ``t``.

    With an age-independent success probability this factorizes exactly as
    ``success.probability() * rate.cumulative(t)``.
    """
    return success.probability() * rate.cumulative(t)


def load_rate_table(path: str | Path) -> TabulatedRate:
    """Read a tabulated rate model from a two-column CSV.

    Expected layout: header line ``age,rate``, then one ``age,rate`` row per
    grid point with strictly increasing ages and nonnegative rates.  Lines
    starting with ``#`` are skipped.
    """
    from .tableio import read_columns_csv

    ages, rates = read_columns_csv(path, ("age", "rate"))
    return TabulatedRate(np.asarray(ages), np.asarray(rates))
