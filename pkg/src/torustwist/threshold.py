"""Onset parameters for vertical periodic orbits, by bisection in the family.

For a one-parameter family (e.g. the standard kick strength) the set of
parameters admitting an orbit that climbs k action units in n steps is,
empirically, a half line [lambda_n, inf); lambda_n is nonincreasing in n and
its limit is the breakup parameter of the last rotational invariant circle.
The oracle below inherits the orbit search's finite budget, so estimates are
upper-biased: a missed orbit can only delay the first True.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from . import solver
from .errors import BracketError, NumericalError, ParameterError

log = logging.getLogger(__name__)

#: fixed search budget of the boolean oracle (kept small: the oracle runs
#: dozens of times per bisection)
ORACLE_N_PHI = 256

METHOD_LAST = "last"
METHOD_AITKEN = "aitken-delta2"


@dataclass(frozen=True)
class ThresholdRecord:
    """Result of one onset bisection: the orbit exists for lambda >= lambda_n
    (within bracket_width), not below."""

    n: int
    lambda_n: float
    bracket_width: float
    evaluations: int
    verdict_lo: bool = False
    verdict_hi: bool = True


@dataclass(frozen=True)
class CriticalEstimate:
    """Stack of onset records for n = 1..n_max plus the extrapolated limit.

    ``failed`` lists the n whose bracket broke; ``monotonicity_ok`` checks
    the nonincreasing law on the successful records with 2*tol slack.
    """

    records: Tuple[ThresholdRecord, ...]
    kcr_estimate: float
    extrapolation_method: str
    monotonicity_ok: bool
    failed: Tuple[int, ...] = ()


def has_vertical(family_at: Callable, lam: float, k: int = 1, n: int = 1,
                 n_phi: int = ORACLE_N_PHI) -> bool:
    """True iff the budgeted orbit search witnesses a (., k)-climb in n steps.

    Search failures are logged and reported as False so a broken parameter
    value cannot silently poison a bisection with an exception.
    """
    try:
        records = solver.find_vertical(family_at(lam), k, n,
                                       s_range=range(n), n_phi=n_phi)
    except NumericalError as exc:
        log.warning("has_vertical(lambda=%.17g, k=%d, n=%d) failed: %s",
                    lam, k, n, exc)
        return False
    return len(records) > 0


def bisect_threshold(family_at: Callable, k: int, n: int, lo: float, hi: float,
                     tol: float = 1e-6, n_phi: int = ORACLE_N_PHI) -> ThresholdRecord:
    """Bisect the smallest parameter at which the (k, n) orbit is witnessed.

    Requires the orbit absent at lo and present at hi; reports the upper end
    of the final bracket.
    """
    if tol <= 0.0:
        raise ParameterError("bisect_threshold: tol must be positive")
    if not lo < hi:
        raise ParameterError("bisect_threshold: need lo < hi")
    v_lo = has_vertical(family_at, lo, k, n, n_phi)
    v_hi = has_vertical(family_at, hi, k, n, n_phi)
    evals = 2
    if v_lo or not v_hi:
        raise BracketError(
            "bisect_threshold(n=%d): need absent at lo and present at hi, "
            "got lo=%s hi=%s" % (n, v_lo, v_hi),
            verdict_lo=v_lo, verdict_hi=v_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evals += 1
        if has_vertical(family_at, mid, k, n, n_phi):
            hi = mid
        else:
            lo = mid
    return ThresholdRecord(n=n, lambda_n=hi, bracket_width=hi - lo,
                           evaluations=evals)


def _aitken(lams: Sequence[float]) -> Optional[float]:
    """Aitken delta-squared on the last three values; None when degenerate."""
    if len(lams) < 3:
        return None
    x0, x1, x2 = lams[-3], lams[-2], lams[-1]
    denom = (x2 - x1) - (x1 - x0)
    if denom == 0.0:
        return None
    return x2 - (x2 - x1) ** 2 / denom


def estimate_critical(family_at: Callable, n_max: int, lo: float, hi: float,
                      tol: float = 1e-3, extrapolate: bool = False,
                      n_phi: int = ORACLE_N_PHI,
                      map_fn: Callable = map) -> CriticalEstimate:
    """Onset parameters for n = 1..n_max and a (heuristic) limit estimate.

    The limit is reported as the last onset by default; the optional Aitken
    acceleration is a labeled heuristic -- the onsets converge but no rate
    is available.  Bracket failures flag the n and the run continues.
    ``map_fn`` may be an executor map: the per-n bisections are independent
    and the result order is by n either way.
    """
    if n_max < 1:
        raise ParameterError("estimate_critical: n_max must be >= 1")

    def _one(n: int):
        try:
            return bisect_threshold(family_at, 1, n, lo, hi, tol, n_phi)
        except BracketError as exc:
            log.warning("estimate_critical: n=%d bracket failed (%s)", n, exc)
            return n

    results = list(map_fn(_one, range(1, n_max + 1)))
    records = [r for r in results if isinstance(r, ThresholdRecord)]
    failed = [r for r in results if not isinstance(r, ThresholdRecord)]

    lams = [r.lambda_n for r in records]
    monotone = all(lams[j + 1] <= lams[j] + 2.0 * tol for j in range(len(lams) - 1))

    method = METHOD_LAST
    kcr = lams[-1] if lams else float("nan")
    if extrapolate:
        accel = _aitken(lams)
        if accel is not None:
            kcr = accel
            method = METHOD_AITKEN

    return CriticalEstimate(records=tuple(records), kcr_estimate=kcr,
                            extrapolation_method=method,
                            monotonicity_ok=monotone, failed=tuple(failed))


def critical_grid(builder: Callable, gammas: Sequence[float], n_max: int,
                  lo: float, hi: float, tol: float = 1e-3,
                  n_phi: int = ORACLE_N_PHI) -> List[Tuple[float, CriticalEstimate]]:
    """Critical-parameter curve over a grid of second parameters.

    ``builder(lam, gamma)`` must construct the family; for the saddle-center
    family lam is the contraction alpha at fixed gamma, tracing the critical
    set in the (gamma, alpha) plane.
    """
    out = []
    for g in gammas:
        est = estimate_critical(lambda lam: builder(lam, g), n_max, lo, hi,
                                tol, n_phi=n_phi)
        out.append((float(g), est))
    return out
