"""Sampling of mutation-event trajectories and the Poisson counting law.

Event times follow a non-homogeneous Poisson process whose intensity comes
from a :class:`~oncopoisson.rates.RateModel`.  Two sampling algorithms are
provided and cross-validated against each other:

* inversion — unit-rate exponential arrivals mapped through the inverse of
  the cumulative rate (constant, power-law, and piecewise-constant models);
* thinning — candidate events from a dominating constant rate per piece,
  accepted with probability rate/bound (piecewise-constant models, where it
  is exact per piece, and tabulated models, bounded per grid interval).

Both algorithms are driven by a :class:`SamplingPlan`, a precomputed numeric
description of the model on (0, horizon].  The compiled kernel interprets
the identical plan with the identical stream-consumption order, so the two
backends produce bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, StateError
from .rates import (
    ConstantRate,
    PiecewiseConstantRate,
    PowerLawRate,
    RateModel,
    SuccessModel,
    TabulatedRate,
)
from .streams import RandomStream
from .tableio import format_g9, iter_data_lines

__all__ = [
    "EventTrajectory",
    "SamplingPlan",
    "build_sampling_plan",
    "sample_nhpp",
    "mark_events",
    "first_success_time",
    "poisson_pmf",
    "write_trajectories_csv",
    "read_trajectory_rows",
]

# Integer codes shared with the compiled kernel (keep in sync with _kernels.pyx).
METHOD_INVERSION = 0
METHOD_THINNING = 1
KIND_CONSTANT = 0
KIND_POWER_LAW = 1
KIND_PIECEWISE = 2
KIND_TABULATED = 3

# Piece-table columns (one row per piece of (0, horizon]).
COL_START = 0
COL_END = 1
COL_RATE_LEFT = 2
COL_RATE_RIGHT = 3
COL_BOUND = 4
COL_INTERP_A = 5  # interpolation origin (full segment start)
COL_INTERP_W = 6  # interpolation width (full segment width; 1.0 for flat pieces)
COL_ACCEPT = 7  # 1.0 = draw an acceptance uniform per candidate
N_PIECE_COLS = 8


@dataclass(frozen=True, eq=False)
class EventTrajectory:
    """Mutation times for one individual, with optional success marks.

    ``times`` is strictly increasing within (0, horizon].  ``flags`` is None
    until :func:`mark_events` sets one boolean per event.  ``seed_record``
    is the (master_seed, stream_index) pair the trajectory was drawn with.
    """

    horizon: float
    times: np.ndarray
    flags: Optional[np.ndarray]
    seed_record: tuple[int, int]

    def __post_init__(self):
        horizon = float(self.horizon)
        if not math.isfinite(horizon) or horizon <= 0.0:
            raise DomainError(f"horizon must be finite and > 0, got {horizon}")
        times = np.asarray(self.times, dtype=np.float64).copy()
        if times.ndim != 1:
            raise DomainError("times must be one-dimensional")
        if len(times) and not (times[0] > 0.0 and times[-1] <= horizon):
            raise DomainError("event times must lie in (0, horizon]")
        if len(times) > 1 and not np.all(np.diff(times) > 0.0):
            raise DomainError("event times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "horizon", horizon)
        if self.flags is not None:
            flags = np.asarray(self.flags, dtype=bool).copy()
            if flags.shape != times.shape:
                raise DomainError("flags must have one entry per event time")
            flags.setflags(write=False)
            object.__setattr__(self, "flags", flags)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def marked(self) -> bool:
        return self.flags is not None


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """Precomputed numeric description of one rate model on (0, horizon].

    Shared verbatim by the Python sampler and the compiled kernel; every
    derived float (totals, bounds, cumulative tables) is computed here once
    so both backends do identical arithmetic.
    """

    method: int  # METHOD_INVERSION or METHOD_THINNING
    kind: int  # KIND_* of the originating rate model
    horizon: float
    total: float  # expected event count on (0, horizon]
    mu: float = 0.0  # constant kind
    scale: float = 0.0  # power-law kind
    exponent: float = 0.0
    inv_exponent: float = 0.0
    pieces: Optional[np.ndarray] = None  # [n, N_PIECE_COLS] float64, C-contiguous
    cum: Optional[np.ndarray] = None  # piecewise inversion: cumulative at piece edges


def _build_pieces(edges, r_left, r_right, horizon, accept):
    """Clip segments [edges[i], edges[i+1]) with endpoint rates to (0, horizon]."""
    rows = []
    for i in range(len(edges) - 1):
        a, b = float(edges[i]), float(edges[i + 1])
        if a >= horizon:
            break
        end = min(b, horizon)
        if end <= a:
            continue
        rl, rr = float(r_left[i]), float(r_right[i])
        flat = rl == rr
        bound = rl if flat else max(rl, rr)
        interp_a = a if not flat else a
        interp_w = (b - a) if not flat else 1.0
        rows.append((a, end, rl, rr, bound, interp_a, interp_w, float(accept)))
    out = np.asarray(rows, dtype=np.float64).reshape(-1, N_PIECE_COLS)
    return np.ascontiguousarray(out)


def build_sampling_plan(rate: RateModel, horizon: float, method: str = "auto") -> SamplingPlan:
    """Resolve the sampling algorithm and precompute its numeric tables.

    ``method`` is ``"auto"`` (inversion where the cumulative rate has a
    closed-form inverse, thinning otherwise), ``"inversion"``, or
    ``"thinning"``.  Unsupported combinations (inversion for tabulated,
    thinning for power-law) raise :class:`DomainError`.
    """
    horizon = float(horizon)
    if not math.isfinite(horizon) or horizon <= 0.0:
        raise DomainError(f"horizon must be finite and > 0, got {horizon}")
    if method not in ("auto", "inversion", "thinning"):
        raise DomainError(f"unknown sampling method {method!r}")
    total = rate.cumulative(horizon)
    if not math.isfinite(total):
        raise DomainError(f"expected event count is not finite at horizon {horizon}")

    if isinstance(rate, ConstantRate):
        if method == "thinning":
            pieces = _build_pieces([0.0, horizon], [rate.rate], [rate.rate], horizon, accept=0)
            return SamplingPlan(METHOD_THINNING, KIND_CONSTANT, horizon, total, pieces=pieces)
        return SamplingPlan(METHOD_INVERSION, KIND_CONSTANT, horizon, total, mu=rate.rate)

    if isinstance(rate, PowerLawRate):
        if method == "thinning":
            raise DomainError("thinning is not available for power-law rates")
        return SamplingPlan(
            METHOD_INVERSION,
            KIND_POWER_LAW,
            horizon,
            total,
            scale=rate.scale,
            exponent=rate.exponent,
            inv_exponent=1.0 / rate.exponent,
        )

    if isinstance(rate, PiecewiseConstantRate):
        edges = np.concatenate(([0.0], rate.breakpoints, [max(horizon, rate.breakpoints[-1] if len(rate.breakpoints) else 0.0) + 1.0]))
        seg_rates = rate.rates
        pieces = _build_pieces(edges, seg_rates, seg_rates, horizon, accept=0)
        if method == "inversion":
            widths = pieces[:, COL_END] - pieces[:, COL_START]
            cum = np.concatenate(([0.0], np.cumsum(pieces[:, COL_RATE_LEFT] * widths)))
            cum = np.ascontiguousarray(cum)
            # The inversion loop must break before walking off the cum table,
            # so its total is the table's own last entry (ulp-consistent).
            return SamplingPlan(
                METHOD_INVERSION, KIND_PIECEWISE, horizon, float(cum[-1]), pieces=pieces, cum=cum
            )
        return SamplingPlan(METHOD_THINNING, KIND_PIECEWISE, horizon, total, pieces=pieces)

    if isinstance(rate, TabulatedRate):
        if method == "inversion":
            raise DomainError("inversion is not available for tabulated rates")
        ages, values = rate.ages, rate.rates
        edges = [0.0] if ages[0] > 0.0 else []
        r_left, r_right = [], []
        if ages[0] > 0.0:
            r_left.append(values[0])
            r_right.append(values[0])
        edges.extend(ages.tolist())
        for i in range(len(ages) - 1):
            r_left.append(values[i])
            r_right.append(values[i + 1])
        if horizon > ages[-1]:
            edges.append(horizon)
            r_left.append(values[-1])
            r_right.append(values[-1])
        pieces = _build_pieces(edges, r_left, r_right, horizon, accept=1)
        return SamplingPlan(METHOD_THINNING, KIND_TABULATED, horizon, total, pieces=pieces)

    raise DomainError(f"unsupported rate model type {type(rate).__name__}")


def _sample_times(plan: SamplingPlan, stream: RandomStream) -> list[float]:
    """Reference sampler; stream-consumption order mirrors the compiled kernel."""
    times: list[float] = []
    if plan.method == METHOD_INVERSION:
        total = plan.total
        if total <= 0.0:
            return times
        s = 0.0
        horizon = plan.horizon
        if plan.kind == KIND_CONSTANT:
            mu = plan.mu
            while True:
                s += -math.log1p(-stream.positive_uniform())
                if s >= total:
                    break
                t = s / mu
                if t > horizon:  # ulp overshoot of the inverse map
                    t = horizon
                times.append(t)
        elif plan.kind == KIND_POWER_LAW:
            scale, exponent, inv_exponent = plan.scale, plan.exponent, plan.inv_exponent
            while True:
                s += -math.log1p(-stream.positive_uniform())
                if s >= total:
                    break
                t = (exponent * s / scale) ** inv_exponent
                if t > horizon:
                    t = horizon
                times.append(t)
        else:  # piecewise-constant inversion
            pieces, cum = plan.pieces, plan.cum
            j = 0
            while True:
                s += -math.log1p(-stream.positive_uniform())
                if s >= total:
                    break
                while s > cum[j + 1]:
                    j += 1
                rate = pieces[j, COL_RATE_LEFT]
                end = pieces[j, COL_END]
                if rate > 0.0:
                    t = pieces[j, COL_START] + (s - cum[j]) / rate
                    if t > end:
                        t = end
                else:  # only reachable when s sits exactly on a flat edge
                    t = end
                times.append(float(t))
    else:  # thinning
        for row in plan.pieces:
            start, end = row[COL_START], row[COL_END]
            rl, rr = row[COL_RATE_LEFT], row[COL_RATE_RIGHT]
            bound = row[COL_BOUND]
            interp_a, interp_w = row[COL_INTERP_A], row[COL_INTERP_W]
            accept = row[COL_ACCEPT] != 0.0
            if bound <= 0.0:
                continue
            t = float(start)
            while True:
                t += -math.log1p(-stream.positive_uniform()) / bound
                if t >= end:
                    break
                if accept:
                    u = stream.uniform()
                    rate_t = rl + (rr - rl) * (t - interp_a) / interp_w
                    if u * bound < rate_t:
                        times.append(t)
                else:
                    times.append(t)
    return times


def sample_nhpp(
    rate: RateModel,
    horizon: float,
    stream: RandomStream,
    method: str = "auto",
) -> EventTrajectory:
    """Draw one event trajectory on (0, horizon] from the given rate model.

    Deterministic given the stream: the same (master_seed, stream_index)
    always yields the same trajectory.  Returned flags are unset.
    """
    plan = build_sampling_plan(rate, horizon, method)
    times = _sample_times(plan, stream)
    return EventTrajectory(
        horizon=horizon,
        times=np.asarray(times, dtype=np.float64),
        flags=None,
        seed_record=(stream.master_seed, stream.stream_index),
    )


def mark_events(
    traj: EventTrajectory, success: SuccessModel, stream: RandomStream
) -> EventTrajectory:
    """Mark each event independently successful with the model's probability.

    Draws one uniform per event in time order.  Pass the same stream
    instance used for sampling to continue its sequence (the cohort
    simulator does exactly this).
    """
    if traj.marked:
        raise StateError("trajectory is already marked")
    sigma = success.probability()
    flags = np.fromiter(
        (stream.uniform() < sigma for _ in range(len(traj))), dtype=bool, count=len(traj)
    )
    return replace(traj, flags=flags)


def first_success_time(traj: EventTrajectory) -> Optional[float]:
    """Age of the earliest successful mutation, or None if none succeeded."""
    if not traj.marked:
        raise StateError("trajectory is not marked; call mark_events first")
    hits = np.nonzero(traj.flags)[0]
    if len(hits) == 0:
        return None
    return float(traj.times[hits[0]])


def poisson_pmf(k: int, mean: float) -> float:
    """P(N = k) for a Poisson count with the given mean.

    Evaluated directly for small arguments and in log space for k > 20 or
    mean > 700 to stay inside double range.
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a nonnegative integer, got {k}")
    mean = float(mean)
    if not math.isfinite(mean) or mean < 0.0:
        raise DomainError(f"mean must be finite and >= 0, got {mean}")
    k = int(k)
    if mean == 0.0:
        return 1.0 if k == 0 else 0.0
    if k > 20 or mean > 700.0:
        return math.exp(-mean + k * math.log(mean) - math.lgamma(k + 1.0))
    return math.exp(-mean) * mean**k / math.factorial(k)


def write_trajectories_csv(trajectories: Iterable[EventTrajectory], path: str | Path) -> None:
    """Write marked trajectories as ``individual,event_time,successful`` rows.

    ``individual`` is the trajectory's stream index; times carry 9
    significant digits; ``successful`` is 1 or 0.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("individual,event_time,successful\n")
        for traj in trajectories:
            if not traj.marked:
                raise StateError("can only serialize marked trajectories")
            individual = traj.seed_record[1]
            for t, flag in zip(traj.times, traj.flags):
                fh.write(f"{individual},{format_g9(t)},{1 if flag else 0}\n")


def read_trajectory_rows(path: str | Path) -> list[tuple[int, float, bool]]:
    """Parse a trajectory CSV back into (individual, event_time, successful) rows."""
    rows: list[tuple[int, float, bool]] = []
    lines = iter_data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise DomainError(f"{path}: line 1: empty file") from None
    if header != "individual,event_time,successful":
        raise DomainError(f"{path}: line {lineno}: unexpected header {header!r}")
    for lineno, line in lines:
        parts = line.split(",")
        if len(parts) != 3:
            raise DomainError(f"{path}: line {lineno}: expected 3 fields")
        try:
            rows.append((int(parts[0]), float(parts[1]), bool(int(parts[2]))))
        except ValueError:
            raise DomainError(f"{path}: line {lineno}: malformed row {line!r}") from None
    return rows
