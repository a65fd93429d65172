"""Backend selection: compiled sampling kernel vs pure-Python fallback.

The compiled extension is preferred when importable; set the environment
variable ``ONCOPOISSON_BACKEND`` to ``compiled`` or ``python`` to force one.
Both backends draw from the same Philox streams in the same order, so they
produce identical results; only throughput differs (see benchmarks/).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DomainError
from .point_process import SamplingPlan, _sample_times
from .streams import RandomStream

__all__ = ["active_backend", "compiled_available", "run_cohort_range"]

try:
    from . import _kernels
except ImportError:  # extension not built; pure-Python fallback
    _kernels = None

_EMPTY_PIECES = np.zeros((0, 8), dtype=np.float64)
_EMPTY_CUM = np.zeros(0, dtype=np.float64)


def compiled_available() -> bool:
    return _kernels is not None


def active_backend() -> str:
    """The backend in effect: ``"compiled"`` or ``"python"``."""
    env = os.environ.get("ONCOPOISSON_BACKEND")
    if env is None:
        return "compiled" if _kernels is not None else "python"
    choice = env.strip().lower()
    if choice == "compiled":
        if _kernels is None:
            raise DomainError(
                "ONCOPOISSON_BACKEND=compiled but the compiled kernel is not built"
            )
        return "compiled"
    if choice == "python":
        return "python"
    raise DomainError(
        f"invalid ONCOPOISSON_BACKEND value {env!r}; use 'compiled' or 'python'"
    )


def run_cohort_range(
    plan: SamplingPlan,
    sigma: float,
    master_seed: int,
    idx_start: int,
    count: int,
    out_first: np.ndarray,
    out_events: np.ndarray,
    out_success: np.ndarray,
    backend: str | None = None,
) -> None:
    """Simulate individuals [idx_start, idx_start+count) into output slices.

    Per individual i: first-success age (+inf if none) into ``out_first[i]``,
    event count into ``out_events[i]``, success count into ``out_success[i]``.
    The result is a pure function of (plan, sigma, master_seed, index), so
    any partition of the index range gives identical output.
    """
    if backend is None:
        backend = active_backend()
    key0 = master_seed % 2**64
    if backend == "compiled":
        _kernels.run_cohort(
            plan.method,
            plan.kind,
            plan.horizon,
            plan.total,
            plan.mu,
            plan.scale,
            plan.exponent,
            plan.inv_exponent,
            plan.pieces if plan.pieces is not None else _EMPTY_PIECES,
            plan.cum if plan.cum is not None else _EMPTY_CUM,
            sigma,
            key0,
            idx_start,
            count,
            out_first,
            out_events,
            out_success,
        )
        return
    for i in range(count):
        stream = RandomStream(master_seed, idx_start + i)
        times = _sample_times(plan, stream)
        n_succ = 0
        first = np.inf
        for t in times:
            if stream.uniform() < sigma:
                n_succ += 1
                if first == np.inf:
                    first = t
        out_first[i] = first
        out_events[i] = len(times)
        out_success[i] = n_succ
