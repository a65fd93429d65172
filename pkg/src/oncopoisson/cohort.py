"""Monte Carlo cohort simulation and its validation against the exact curve.

Each individual i of a cohort draws mutation events from the stream keyed
(master_seed, i), marks them for success from the same stream, and records
the age of the first successful mutation.  The fraction of individuals with
a first success by age a estimates the cumulative incidence at a.  Results
are bitwise reproducible for a fixed master seed regardless of how many
threads carve up the index range.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .backend import active_backend, run_cohort_range
from .errors import DomainError
from .incidence import IncidenceCurve, incidence_exact
from .modelspec import render_model
from .point_process import build_sampling_plan
from .rates import RateModel, SuccessModel
from .tableio import format_g6, format_g9, format_sci9, read_columns_csv

__all__ = [
    "CohortConfig",
    "CohortResult",
    "ValidationReport",
    "simulate_cohort",
    "validate_against_analytic",
    "write_cohort_csv",
    "read_cohort_csv",
]

MAX_DEFAULT_THREADS = 8
# Below this expected success count the normal approximation to the binomial
# is too poor for a z-gate.
MIN_GATED_SUCCESSES = 10.0


def thread_count() -> int:
    """Simulation thread cap: ONCOPOISSON_THREADS, else a modest default."""
    env = os.environ.get("ONCOPOISSON_THREADS")
    if env is None:
        return min(os.cpu_count() or 1, MAX_DEFAULT_THREADS)
    try:
        value = int(env)
    except ValueError:
        raise DomainError(
            f"ONCOPOISSON_THREADS must be a positive integer, got {env!r}"
        ) from None
    if value < 1:
        raise DomainError(f"ONCOPOISSON_THREADS must be >= 1, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class CohortConfig:
    """Inputs of one cohort run; the default age grid is integer ages."""

    cohort_size: int
    horizon: float
    rate: RateModel
    success: SuccessModel
    master_seed: int
    age_grid: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.cohort_size < 1 or int(self.cohort_size) != self.cohort_size:
            raise DomainError(f"cohort_size must be an integer >= 1, got {self.cohort_size}")
        horizon = float(self.horizon)
        if not math.isfinite(horizon) or horizon <= 0.0:
            raise DomainError(f"horizon must be finite and > 0, got {horizon}")
        object.__setattr__(self, "cohort_size", int(self.cohort_size))
        object.__setattr__(self, "horizon", horizon)
        if self.age_grid is None:
            grid = np.arange(math.floor(horizon) + 1, dtype=np.float64)
        else:
            grid = np.asarray(self.age_grid, dtype=np.float64).copy()
        if grid.ndim != 1 or len(grid) == 0:
            raise DomainError("age_grid must be a nonempty one-dimensional array")
        if grid[0] < 0.0 or grid[-1] > horizon:
            raise DomainError("age_grid must lie within [0, horizon]")
        if len(grid) > 1 and not np.all(np.diff(grid) > 0.0):
            raise DomainError("age_grid must be strictly increasing")
        grid.setflags(write=False)
        object.__setattr__(self, "age_grid", grid)


@dataclass(frozen=True, eq=False)
class CohortResult:
    """Empirical incidence with binomial standard errors, plus event totals."""

    config: CohortConfig
    empirical_curve: IncidenceCurve
    std_errors: np.ndarray
    total_mutations: int
    total_successes: int


@dataclass(frozen=True, eq=False)
class ValidationReport:
    """Per-age z-scores of the empirical curve against the exact one.

    Ages whose observed success count is below 10 are reported but not
    gated: the z-gate (|z| <= tolerance) applies only where the normal
    approximation is sound.
    """

    ages: np.ndarray
    z_scores: np.ndarray
    gated: np.ndarray
    tolerance_sigmas: float
    max_abs_z: float
    n_ages_gated: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_abs_z": self.max_abs_z,
            "n_ages_gated": self.n_ages_gated,
            "pass": self.passed,
        }


def simulate_cohort(config: CohortConfig) -> CohortResult:
    """Run the full pipeline for every individual and aggregate.

    Deterministic for a fixed master seed: per-individual results depend
    only on (master_seed, individual index), and the aggregation is an
    index-ordered reduction, so thread count and chunking cannot change the
    output.
    """
    plan = build_sampling_plan(config.rate, config.horizon)
    sigma = config.success.probability()
    n = config.cohort_size

    first = np.empty(n, dtype=np.float64)
    n_events = np.empty(n, dtype=np.int64)
    n_success = np.empty(n, dtype=np.int64)

    backend = active_backend()
    threads = thread_count()
    chunk_bounds = np.linspace(0, n, min(threads, n) + 1, dtype=np.int64)

    def run_chunk(lo: int, hi: int) -> None:
        try:
            run_cohort_range(
                plan,
                sigma,
                config.master_seed,
                lo,
                hi - lo,
                first[lo:hi],
                n_events[lo:hi],
                n_success[lo:hi],
                backend=backend,
            )
        except Exception as exc:
            raise RuntimeError(
                f"simulation failed within individuals [{lo}, {hi}): {exc}"
            ) from exc

    spans = [
        (int(chunk_bounds[k]), int(chunk_bounds[k + 1]))
        for k in range(len(chunk_bounds) - 1)
        if chunk_bounds[k] < chunk_bounds[k + 1]
    ]
    if len(spans) <= 1:
        for lo, hi in spans:
            run_chunk(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            for future in [pool.submit(run_chunk, lo, hi) for lo, hi in spans]:
                future.result()

    order = np.sort(first)  # +inf (no success) sorts to the tail
    counts = np.searchsorted(order, config.age_grid, side="right")
    values = counts / float(n)
    std_errors = np.sqrt(values * (1.0 - values) / float(n))
    curve = IncidenceCurve(config.age_grid, values, "empirical")
    return CohortResult(
        config=config,
        empirical_curve=curve,
        std_errors=std_errors,
        total_mutations=int(n_events.sum()),
        total_successes=int(n_success.sum()),
    )


def validate_against_analytic(
    result: CohortResult, tolerance_sigmas: float = 3.0
) -> ValidationReport:
    """z-test the empirical curve against the exact curve on its own grid."""
    config = result.config
    ages = result.empirical_curve.ages
    if len(ages) != len(config.age_grid) or not np.array_equal(ages, config.age_grid):
        raise DomainError("empirical curve grid does not match the config age grid")
    exact = incidence_exact(config.rate, config.success, ages).values
    emp = result.empirical_curve.values
    n = float(config.cohort_size)

    se = np.sqrt(exact * (1.0 - exact) / n)
    z = np.zeros_like(emp)
    nonzero = se > 0.0
    z[nonzero] = (emp[nonzero] - exact[nonzero]) / se[nonzero]
    z[~nonzero & (emp != exact)] = np.inf

    gated = emp * n >= MIN_GATED_SUCCESSES
    max_abs_z = float(np.max(np.abs(z[gated]))) if np.any(gated) else 0.0
    passed = bool(max_abs_z <= tolerance_sigmas)
    return ValidationReport(
        ages=ages,
        z_scores=z,
        gated=gated,
        tolerance_sigmas=float(tolerance_sigmas),
        max_abs_z=max_abs_z,
        n_ages_gated=int(np.sum(gated)),
        passed=passed,
    )


def write_cohort_csv(result: CohortResult, path: str | Path) -> None:
    """Write the cohort curve with run parameters echoed as # comments."""
    config = result.config
    analytic = incidence_exact(config.rate, config.success, config.age_grid).values
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# oncopoisson cohort result\n")
        fh.write(f"# cohort_size = {config.cohort_size}\n")
        fh.write(f"# horizon = {format_g9(config.horizon)}\n")
        fh.write(f"# master_seed = {config.master_seed}\n")
        fh.write(f"# rate_model = {render_model(config.rate)}\n")
        fh.write(f"# success_model = {render_model(config.success)}\n")
        fh.write(f"# total_mutations = {result.total_mutations}\n")
        fh.write(f"# total_successes = {result.total_successes}\n")
        fh.write("age,empirical_incidence,std_err,analytic_incidence\n")
        rows = zip(config.age_grid, result.empirical_curve.values, result.std_errors, analytic)
        for age, emp, se, exact in rows:
            fh.write(
                f"{format_g6(age)},{format_sci9(emp)},{format_sci9(se)},{format_sci9(exact)}\n"
            )


def read_cohort_csv(path: str | Path):
    """Parse a cohort CSV back into (ages, empirical, std_err, analytic) arrays."""
    cols = read_columns_csv(
        path, ("age", "empirical_incidence", "std_err", "analytic_incidence")
    )
    return tuple(np.asarray(col, dtype=np.float64) for col in cols)
