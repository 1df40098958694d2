"""Finite-horizon rotation estimates and the bounded/escaping dichotomy.

An orbit of a twist-torus lift either keeps its action coordinate in a bounded
band (then the angular average has a meaning mod 1 and the vertical average
tends to 0), or the action escapes monotonically and the orbit carries a
vertical rotation number while the angular average blows up.  At a finite
horizon we can only report conservative proxies for the two cases, with an
explicit Undetermined fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import maps
from .covering import PlanePoint, frac_split
from .errors import ParameterError

#: Case-1 proxy: the orbit's action range must stay below this over the horizon.
BOUNDED_THRESHOLD = 10.0
#: Case-2 proxy: total action drift must exceed this (with constant-sign steps).
ESCAPE_THRESHOLD = 5.0

BOUNDED = "BoundedHorizontal"
ESCAPE_PLUS = "VerticalEscapePlus"
ESCAPE_MINUS = "VerticalEscapeMinus"
UNDETERMINED = "Undetermined"

CASE1 = "Case1"
CASE2 = "Case2"


@dataclass(frozen=True)
class RotationEstimate:
    """Finite-horizon rotation data for one seed.

    ``horizontal`` is the angular average mod 1 for the bounded case, +-inf
    for the escaping cases and nan when undetermined.  ``tail_spread`` is the
    fluctuation of the vertical partial averages over the final window;
    ``i_range`` the total action excursion.
    """

    case_tag: str
    horizontal: float
    vertical: float
    horizon: int
    tail_spread: float
    i_range: float


def orbit_segment(family, start: PlanePoint, horizon: int):
    """[start, T(start), ..., T^horizon(start)] as plane points."""
    if horizon < 1:
        raise ParameterError("orbit_segment: horizon must be >= 1")
    fphi, fi, wphi, wi = _reduced_orbit(family, start, horizon)
    phi = fphi + wphi
    i = fi + wi
    bad = ~(np.isfinite(phi) & np.isfinite(i)
            & (np.abs(phi) <= maps.DIVERGENCE_CAP)
            & (np.abs(i) <= maps.DIVERGENCE_CAP))
    if np.any(bad):
        cut = int(np.argmax(bad))
        partial = [PlanePoint(float(p), float(q))
                   for p, q in zip(phi[:cut], i[:cut])]
        raise maps.DivergenceError(
            "orbit diverged at step %d of %d" % (cut, horizon), partial=partial)
    return [PlanePoint(float(p), float(q)) for p, q in zip(phi, i)]


def _reduced_orbit(family, start, horizon):
    fphi0, wphi0 = frac_split(start.phi)
    fi0, wi0 = frac_split(start.i)
    return maps.trajectory_state(family, fphi0, fi0, wphi0, wi0, int(horizon))


def estimate_rotation(family, start: PlanePoint, horizon: int = 10_000,
                      window: int = 1_000) -> RotationEstimate:
    """Classify one orbit and estimate its rotation data.

    The vertical estimate is the plain average action gain over the horizon.
    Case 1 (bounded action) reports the mod-1 angular average; Case 2
    (monotone escape past ESCAPE_THRESHOLD) reports horizontal +-inf and a
    vertical rotation number.  Anything else, including a diverged orbit and
    an escape whose average is smaller than its own tail fluctuation, is
    Undetermined.
    """
    horizon = int(horizon)
    window = int(window)
    if window < 10 or horizon < 2 * window:
        raise ParameterError(
            "estimate_rotation: need horizon >= 2*window >= 20, got "
            "horizon=%d window=%d" % (horizon, window))

    fphi, fi, wphi, wi = _reduced_orbit(family, start, horizon)

    # Windings are exact integers; a diverged orbit shows up there first.
    level = fi + wi
    good = np.isfinite(level) & (np.abs(level) <= maps.DIVERGENCE_CAP) \
        & np.isfinite(wphi) & (np.abs(fphi + wphi) <= maps.DIVERGENCE_CAP)
    diverged = not bool(np.all(good))
    if diverged:
        cut = max(int(np.argmax(~good)), 1)
        fphi, fi, wphi, wi = fphi[:cut], fi[:cut], wphi[:cut], wi[:cut]
        level = level[:cut]
    n = fphi.size - 1
    if n < 1:
        return RotationEstimate(UNDETERMINED, math.nan, 0.0, 0, 0.0, 0.0)

    # All excursion statistics are taken relative to the seed, split into
    # exact-integer and fractional parts: winding differences kill the deck
    # translation exactly, so translated seeds give bitwise-identical fields.
    rel = (wi - wi[0]) + (fi - fi[0])
    i_range = float(np.max(rel) - np.min(rel))
    vertical = float(rel[n] / n)
    drift = float(rel[n])

    w_eff = min(window, n)
    t = np.arange(n - w_eff + 1, n + 1)
    partial = rel[t] / t
    tail_spread = float(np.max(partial) - np.min(partial))

    if diverged:
        return RotationEstimate(UNDETERMINED, math.nan, vertical, n,
                                tail_spread, i_range)

    if i_range < BOUNDED_THRESHOLD:
        # Reduce the integer winding mod n before dividing so deck translates
        # (which change the winding by exact multiples of n) agree bitwise.
        dw = (wphi[n] - wphi[0]) % n
        horizontal = float((dw + (fphi[n] - fphi[0])) / n % 1.0)
        return RotationEstimate(BOUNDED, horizontal, vertical, n,
                                tail_spread, i_range)

    inc = np.diff(rel[n - w_eff:])
    monotone_up = bool(np.all(inc > 0.0))
    monotone_down = bool(np.all(inc < 0.0))
    if abs(drift) > ESCAPE_THRESHOLD and (monotone_up or monotone_down):
        if abs(vertical) < tail_spread:
            # Escape with vanishing average: the dichotomy allows it but
            # gives no finite-horizon criterion, so stay honest.
            return RotationEstimate(UNDETERMINED, math.nan, vertical, n,
                                    tail_spread, i_range)
        tag = ESCAPE_PLUS if monotone_up else ESCAPE_MINUS
        horizontal = math.inf if monotone_up else -math.inf
        return RotationEstimate(tag, horizontal, vertical, n,
                                tail_spread, i_range)

    return RotationEstimate(UNDETERMINED, math.nan, vertical, n,
                            tail_spread, i_range)


def classify_orbit(estimate: RotationEstimate) -> str:
    """Collapse the case tag to the two-case dichotomy (or Undetermined)."""
    if estimate.case_tag == BOUNDED:
        return CASE1
    if estimate.case_tag in (ESCAPE_PLUS, ESCAPE_MINUS):
        return CASE2
    return UNDETERMINED
