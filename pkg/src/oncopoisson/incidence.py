"""Analytic cumulative cancer-incidence curves.

Here "incidence" is the cumulative probability of having developed the
cancer by a given age (note: epidemiology often uses the word for a hazard
rate instead; this package always means the cumulative probability).  With
``M(t)`` the expected number of successful mutations by age ``t``:

* exact:        I(t) = 1 - exp(-M(t))
* small-M:      I(t) ~ M(t), accurate while M stays close to 0
* with delays:  the exact curve time-shifted by constant expansion and
  detection lags.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DomainError
from .rates import RateModel, SuccessModel, effective_cumulative_rate
from .tableio import format_g6, format_sci9, read_columns_csv

__all__ = [
    "IncidenceCurve",
    "ApproximationWarning",
    "incidence_exact",
    "incidence_approx",
    "incidence_with_delay",
    "write_incidence_csv",
    "read_incidence_csv",
]

# Above this expected count the linear approximation error exceeds ~5%.
APPROX_WARN_THRESHOLD = 0.1

Provenance = Literal["analytic-exact", "analytic-approx", "empirical"]


class ApproximationWarning(UserWarning):
    """The small-M linearization is being used outside its comfort zone."""


@dataclass(frozen=True, eq=False)
class IncidenceCurve:
    """Cumulative probability of cancer sampled on an increasing age grid."""

    ages: np.ndarray
    values: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        ages = np.asarray(self.ages, dtype=np.float64).copy()
        values = np.asarray(self.values, dtype=np.float64).copy()
        if ages.ndim != 1 or values.ndim != 1 or len(ages) != len(values):
            raise DomainError("ages and values must be one-dimensional and equal length")
        if len(ages) == 0:
            raise DomainError("curve needs at least one age")
        if ages[0] < 0.0 or not np.all(np.isfinite(ages)):
            raise DomainError("ages must be finite and >= 0")
        if len(ages) > 1 and not np.all(np.diff(ages) > 0.0):
            raise DomainError("ages must be strictly increasing")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise DomainError("incidence values must lie in [0, 1]")
        if np.any(np.diff(values) < 0.0):
            raise DomainError("incidence values must be nondecreasing")
        if ages[0] == 0.0 and values[0] != 0.0:
            raise DomainError("incidence at age 0 must be 0")
        ages.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "ages", ages)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.ages)


def _checked_grid(ages) -> np.ndarray:
    ages = np.asarray(ages, dtype=np.float64)
    if ages.ndim != 1 or len(ages) == 0:
        raise DomainError("age grid must be a nonempty one-dimensional array")
    if ages[0] < 0.0 or not np.all(np.isfinite(ages)):
        raise DomainError("ages must be finite and >= 0")
    if len(ages) > 1 and not np.all(np.diff(ages) > 0.0):
        raise DomainError("ages must be strictly increasing")
    return ages


def _effective_cumulative(rate: RateModel, success: SuccessModel, ages: np.ndarray) -> np.ndarray:
    return np.array([effective_cumulative_rate(rate, success, t) for t in ages])


def incidence_exact(rate: RateModel, success: SuccessModel, ages) -> IncidenceCurve:
    """Exact curve 1 - exp(-M(t)) on the given grid."""
    ages = _checked_grid(ages)
    m_eff = _effective_cumulative(rate, success, ages)
    values = -np.expm1(-m_eff)
    return IncidenceCurve(ages, values, "analytic-exact")


def incidence_approx(rate: RateModel, success: SuccessModel, ages) -> IncidenceCurve:
    """Small-M linearization I(t) ~ M(t), clamped at 1.

    Warns with :class:`ApproximationWarning` once any M on the grid exceeds
    0.1, where the relative error reaches about 5%.
    """
    ages = _checked_grid(ages)
    m_eff = _effective_cumulative(rate, success, ages)
    worst = m_eff[-1] if len(m_eff) else 0.0
    if worst > APPROX_WARN_THRESHOLD:
        warnings.warn(
            f"expected successful-mutation count reaches {worst:.3g} > "
            f"{APPROX_WARN_THRESHOLD}; the linear approximation degrades there",
            ApproximationWarning,
            stacklevel=2,
        )
    return IncidenceCurve(ages, np.minimum(m_eff, 1.0), "analytic-approx")


def incidence_with_delay(
    rate: RateModel,
    success: SuccessModel,
    ages,
    fixation_delay: float = 0.0,
    detection_delay: float = 0.0,
) -> IncidenceCurve:
    """Exact curve with constant expansion and detection lags.

    Both lags simply shift the clock: the curve at age t equals the exact
    curve at t minus the total delay, and is 0 before the delay has passed.
    """
    for name, d in (("fixation_delay", fixation_delay), ("detection_delay", detection_delay)):
        if not math.isfinite(d) or d < 0.0:
            raise DomainError(f"{name} must be finite and >= 0, got {d}")
    ages = _checked_grid(ages)
    shift = fixation_delay + detection_delay
    shifted = np.maximum(ages - shift, 0.0)
    m_eff = _effective_cumulative(rate, success, shifted)
    values = -np.expm1(-m_eff)
    return IncidenceCurve(ages, values, "analytic-exact")


def write_incidence_csv(curve: IncidenceCurve, path: str | Path) -> None:
    """Write ``age,incidence`` rows (ages 6 significant digits, values 9)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("age,incidence\n")
        for age, value in zip(curve.ages, curve.values):
            fh.write(f"{format_g6(age)},{format_sci9(value)}\n")


def read_incidence_csv(path: str | Path, provenance: Provenance = "empirical") -> IncidenceCurve:
    """Read an ``age,incidence`` CSV back into a curve."""
    ages, values = read_columns_csv(path, ("age", "incidence"))
    return IncidenceCurve(np.asarray(ages), np.asarray(values), provenance)
