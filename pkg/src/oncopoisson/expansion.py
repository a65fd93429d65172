"""Probability that a single new mutant lineage expands instead of dying out.

Two mechanisms are supported:

* Moran fixation — a mutant with relative fitness ``r`` in an organ of ``n``
  cells eventually takes over with probability ``(1 - 1/r) / (1 - 1/r^n)``.
* Binary branching survival — each mutant cell divides with probability ``p``
  or dies with probability ``1 - p``; the lineage survives forever with
  probability ``2 - 1/p`` when ``p > 1/2`` and never otherwise.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = ["moran_fixation", "branching_survival", "extinction_fixed_point"]

# Below this distance from r = 1 the Moran formula is evaluated as its
# neutral limit 1/n (the expression is 0/0 at r = 1 exactly).
NEUTRAL_FITNESS_BAND = 1e-9


def moran_fixation(fitness: float, cells: int) -> float:
    """Fixation probability of one mutant cell in a Moran population.

    Args:
        fitness: relative fitness ``r`` of the mutant, > 0.
        cells: number of cells ``n`` in the organ, integer >= 1.

    Returns:
        Probability in (0, 1] that the mutant takes over the organ.
    """
    if not math.isfinite(fitness) or fitness <= 0.0:
        raise DomainError(f"fitness must be a positive finite number, got {fitness}")
    if cells < 1 or int(cells) != cells:
        raise DomainError(f"cells must be an integer >= 1, got {cells}")
    cells = int(cells)
    if cells == 1:
        return 1.0
    if abs(fitness - 1.0) < NEUTRAL_FITNESS_BAND:
        return 1.0 / cells
    # (1 - 1/r) / (1 - r^-n) rewritten via expm1 with a = log(r):
    # numerator = -expm1(-a), denominator = -expm1(-n*a).  This is stable
    # near r = 1, saturates cleanly when r^n overflows (expm1(-n*a) -> -1),
    # and underflows to ~0 from above for strongly deleterious mutants.
    log_r = math.log(fitness)
    num = -math.expm1(-log_r)
    den = -math.expm1(-cells * log_r)
    if math.isinf(den):
        return 0.0
    return num / den


def branching_survival(division_prob: float) -> float:
    """Survival probability of a binary birth-death branching process.

    Each cell divides with probability ``division_prob`` or dies otherwise.
    Subcritical and critical processes (``division_prob <= 1/2``) go extinct
    with certainty, so the survival probability is 0 there.
    """
    _check_division_prob(division_prob)
    if division_prob <= 0.5:
        return 0.0
    return 2.0 - 1.0 / division_prob


def extinction_fixed_point(division_prob: float, tol: float = 1e-12) -> float:
    """Extinction probability via fixed-point iteration of x = (1-p) + p*x^2.

    Iterates from x0 = 0, which converges monotonically to the smallest root
    in [0, 1].  Stops once successive iterates differ by less than ``tol``.
    Serves as an independent check on :func:`branching_survival`
    (extinction = 1 - survival).

    Convergence is geometric away from criticality.  At p = 1/2 the two
    roots coalesce and the iteration slows to O(1/k), so a stopping step of
    ``tol`` leaves a residual error of about sqrt(2*tol) in the result.
    """
    _check_division_prob(division_prob)
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    p = float(division_prob)
    q = 1.0 - p
    x = 0.0
    # O(1/k) critical-case convergence needs ~sqrt(2/tol) steps; cap well above.
    max_iter = 50_000_000
    for _ in range(max_iter):
        x_next = q + p * x * x
        if abs(x_next - x) < tol:
            return x_next
        x = x_next
    return x


def _check_division_prob(p: float) -> None:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"division probability must lie in [0, 1], got {p}")
