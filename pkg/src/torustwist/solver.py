"""Periodic-orbit search along level-set graphs with Newton refinement.

The search principle: on the level set of angular displacement s over n
steps, the function delta(phi) = (action of the image of the lowest root)
minus (the lowest root itself) measures the vertical displacement available
at angle phi.  Zeros of delta - k are candidates for orbits satisfying
T^n(z) = z + (s, k); a damped Newton iteration on the full 2-d lift then
polishes each candidate.

Records are canonicalized: the anchor is moved into the fundamental square
by deck translations and the angular displacement s relabeled accordingly
(moving the anchor down by b units turns s into s - n*b), so deck copies of
one torus orbit collapse to a single record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import levelset, maps
from .covering import PlanePoint, TorusPoint, frac_split, project_torus, torus_distance
from .errors import ParameterError

BIRKHOFF = "Birkhoff"
VERTICAL = "Vertical"

DEFAULT_REFINE_TOL = 1e-12
DEFAULT_MAX_ITER = 50
#: spread of delta over the grid below which the level set is treated as a
#: continuum of periodic points (integrable-style degeneracy)
DEGENERATE_SPREAD = 1e-12
#: residual allowed for candidates whose Newton step was abandoned
UNREFINED_KEEP_TOL = 1e-8
#: torus distance under which two anchors count as the same orbit
DISTINCT_TOL = 1e-6

_SINGULAR_DET = 1e-14
_MIN_DAMPING = 2.0 ** -20
_BOUNDARY_EPS = 1e-9
_DELTA_BISECT_ITERS = 20


@dataclass(frozen=True)
class OrbitRecord:
    """One periodic orbit of the torus map, with its lift data.

    ``anchor`` is the lift of ``points[0]`` inside the fundamental square;
    T^n(anchor) = anchor + (s, k) up to ``residual``.  ``refined`` is False
    when Newton gave up (singular or non-improving) and the record survives
    on its bisection residual alone.  ``minimal`` says the n points are
    pairwise distinct on the torus, i.e. n is the minimal period.
    """

    kind: str
    s: int
    k: int
    n: int
    points: Tuple[TorusPoint, ...]
    anchor: PlanePoint
    residual: float
    rho_v: Fraction
    refined: bool = True
    degenerate: bool = False
    minimal: bool = True


class NewtonResult(NamedTuple):
    point: PlanePoint
    residual: float
    refined: bool


# ---------------------------------------------------------------------------
# pointwise evaluation helpers
# ---------------------------------------------------------------------------

def _goal_residual(family, z: PlanePoint, s: int, k: int, n: int) -> Tuple[float, float]:
    """Components of G(z) = T^n(z) - z - (s, k), winding-exact."""
    fphi, wphi = frac_split(z.phi)
    fi, wi = frac_split(z.i)
    a, b, c, d = maps.advance_state(
        family, np.array([fphi]), np.array([fi]),
        np.array([wphi]), np.array([wi]), n)
    g1 = (a[0] - fphi) + (c[0] - wphi - s)
    g2 = (b[0] - fi) + (d[0] - wi - k)
    return float(g1), float(g2)


def _chain_jacobian(family, z: PlanePoint, n: int) -> np.ndarray:
    """D(T^n) at z by multiplying step Jacobians along the orbit."""
    jac = np.eye(2)
    fphi, wphi = frac_split(z.phi)
    fi, wi = frac_split(z.i)
    a = np.array([fphi]); b = np.array([fi])
    c = np.array([wphi]); d = np.array([wi])
    for _ in range(n):
        j11, j12, j21, j22 = maps.jac_at(family, a[0] + c[0], b[0] + d[0])
        jac = np.array([[float(j11), float(j12)], [float(j21), float(j22)]]) @ jac
        a, b, c, d = maps.advance_state(family, a, b, c, d, 1)
    return jac


def newton_refine(family, guess: PlanePoint, s: int, k: int, n: int,
                  tol: float = DEFAULT_REFINE_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> NewtonResult:
    """Damped Newton for T^n(z) = z + (s, k) from a nearby guess.

    Halves the step until the residual norm decreases; gives up (returning
    the best iterate flagged unrefined) on a singular derivative or when no
    damping factor down to 2**-20 improves the residual.
    """
    if tol <= 0.0:
        raise ParameterError("newton_refine: tol must be positive")
    z = guess
    g1, g2 = _goal_residual(family, z, s, k, n)
    best = NewtonResult(z, max(abs(g1), abs(g2)), True)
    for _ in range(max_iter):
        if best.residual < tol:
            return best
        dg = _chain_jacobian(family, z, n) - np.eye(2)
        det = dg[0, 0] * dg[1, 1] - dg[0, 1] * dg[1, 0]
        if abs(det) < _SINGULAR_DET:
            return NewtonResult(best.point, best.residual, False)
        step_phi = -(dg[1, 1] * g1 - dg[0, 1] * g2) / det
        step_i = -(-dg[1, 0] * g1 + dg[0, 0] * g2) / det

        lam = 1.0
        while True:
            trial = PlanePoint(z.phi + lam * step_phi, z.i + lam * step_i)
            t1, t2 = _goal_residual(family, trial, s, k, n)
            t_res = max(abs(t1), abs(t2))
            if t_res < best.residual:
                z, g1, g2 = trial, t1, t2
                best = NewtonResult(trial, t_res, True)
                break
            lam *= 0.5
            if lam < _MIN_DAMPING:
                return NewtonResult(best.point, best.residual, False)
    return best


# ---------------------------------------------------------------------------
# delta along the lowest-root graph
# ---------------------------------------------------------------------------

def vertical_displacement(family, component: levelset.LevelSetComponent,
                          phi: float) -> float:
    """delta(phi): action gained by the image of the lowest root at phi.

    Re-solves the root at the exact angle (no interpolation across folds).
    """
    roots = levelset.solve_roots_at(
        family, component.p, component.q, np.array([float(phi)]),
        component.bracket, component.root_tol)[0]
    mu = roots[0]
    _, p2 = levelset._lift_images(family, np.array([float(phi)]),
                                  np.array([mu]), component.q)
    return float(p2[0] - mu)


def _delta_on_grid(family, component) -> np.ndarray:
    _, p2 = levelset._lift_images(family, component.phis,
                                  component.mu_minus, component.q)
    return p2 - component.mu_minus


def _delta_at(family, component, phis) -> np.ndarray:
    """delta at arbitrary angles, re-solving the lowest root per angle."""
    phis = np.asarray(phis, dtype=np.float64) % 1.0
    roots = levelset.solve_roots_at(family, component.p, component.q, phis,
                                    component.bracket, component.root_tol)
    mu = np.array([r[0] for r in roots])
    _, p2 = levelset._lift_images(family, phis, mu, component.q)
    return p2 - mu


def _bisect_delta_batch(family, component, k, lo, hi, f_lo,
                        iters=_DELTA_BISECT_ITERS):
    """Bisect delta(phi) - k on many sign-change intervals at once.

    One batched root re-solve per iteration; the refined midpoints only
    need to land inside the Newton basin, so a couple dozen halvings of a
    grid cell are plenty.
    """
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    sign_lo = np.sign(f_lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = _delta_at(family, component, mid) - k
        same = np.sign(fm) == sign_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        exact = fm == 0.0
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# record assembly
# ---------------------------------------------------------------------------

def _canonical_record(family, z: PlanePoint, n: int, kind: str,
                      refine_tol: float, refined: bool,
                      degenerate: bool = False) -> Optional[OrbitRecord]:
    """Move the anchor to the fundamental square, relabel (s, k), re-verify.

    Coordinates within ``_BOUNDARY_EPS`` of 1 are renormalized to the
    negative side, so an orbit sitting on an integer line gets the same
    sheet (and hence the same ``s`` label) no matter which side of the
    line the refinement landed on.
    """
    fphi, _ = frac_split(z.phi)
    fi, _ = frac_split(z.i)
    if fphi > 1.0 - _BOUNDARY_EPS:
        fphi -= 1.0
    if fi > 1.0 - _BOUNDARY_EPS:
        fi -= 1.0
    anchor = PlanePoint(float(fphi), float(fi))

    a = np.array([anchor.phi]); b = np.array([anchor.i])
    c = np.array([0.0]); d = np.array([0.0])
    pts = []
    for _ in range(n):
        pts.append(project_torus(PlanePoint(float(a[0] + c[0]), float(b[0] + d[0]))))
        a, b, c, d = maps.advance_state(family, a, b, c, d, 1)
    disp_phi = float(a[0] + c[0]) - anchor.phi
    disp_i = float(b[0] + d[0]) - anchor.i
    s = int(round(disp_phi))
    k = int(round(disp_i))
    residual = max(abs(disp_phi - s), abs(disp_i - k))
    keep_tol = refine_tol if refined else UNREFINED_KEEP_TOL
    if residual >= keep_tol:
        return None

    minimal = True
    for ii in range(n):
        for jj in range(ii + 1, n):
            if torus_distance(pts[ii], pts[jj]) < DISTINCT_TOL:
                minimal = False
                break
        if not minimal:
            break

    return OrbitRecord(
        kind=kind, s=s, k=k, n=n, points=tuple(pts), anchor=anchor,
        residual=residual, rho_v=Fraction(k, n), refined=refined,
        degenerate=degenerate, minimal=minimal)


def _merge_records(records: List[OrbitRecord]) -> List[OrbitRecord]:
    """Drop duplicates: same (s, k) and anchor on an existing orbit's points."""
    kept: List[OrbitRecord] = []
    for rec in sorted(records, key=lambda r: (r.s, r.anchor.phi, r.residual)):
        dup = None
        for idx, other in enumerate(kept):
            if (rec.s, rec.k) != (other.s, other.k):
                continue
            if any(torus_distance(rec.points[0], pt) < DISTINCT_TOL
                   for pt in other.points):
                dup = idx
                break
        if dup is None:
            kept.append(rec)
        elif rec.residual < kept[dup].residual:
            kept[dup] = rec
    kept.sort(key=lambda r: (r.s, r.anchor.phi))
    return kept


# ---------------------------------------------------------------------------
# searches
# ---------------------------------------------------------------------------

def _search_component(family, s: int, k: int, n: int, n_phi: int,
                      root_tol: float, refine_tol: float,
                      kind: str) -> List[OrbitRecord]:
    """All orbits with T^n(z) = z + (s', k), s' ~ s, found via one component."""
    comp = levelset.compute_levelset(family, s, n, n_phi=n_phi, root_tol=root_tol)
    delta = _delta_on_grid(family, comp)
    h = delta - k

    spread = float(np.max(delta) - np.min(delta))
    if spread < DEGENERATE_SPREAD:
        if abs(float(np.mean(h))) > max(1e-9, 10.0 * root_tol):
            return []
        # A whole curve of periodic points; return one representative.
        z = PlanePoint(float(comp.phis[0]), float(comp.mu_minus[0]))
        rec = _canonical_record(family, z, n, kind, refine_tol,
                                refined=False, degenerate=True)
        return [rec] if rec else []

    ztol = max(1e-9, 10.0 * root_tol)
    cand_phis: List[float] = []
    on_grid = np.abs(h) <= ztol
    cand_phis.extend(float(p) for p in comp.phis[on_grid])

    h_ext = np.append(h, h[0])
    phi_ext = np.append(comp.phis, comp.phis[0] + 1.0)
    lo_list: List[float] = []
    hi_list: List[float] = []
    flo_list: List[float] = []
    for j in range(comp.phis.size):
        if on_grid[j] or on_grid[(j + 1) % comp.phis.size]:
            continue
        if h_ext[j] * h_ext[j + 1] < 0.0:
            lo_list.append(float(phi_ext[j]))
            hi_list.append(float(phi_ext[j + 1]))
            flo_list.append(float(h_ext[j]))
    if lo_list:
        cand_phis.extend(float(v) for v in _bisect_delta_batch(
            family, comp, k, lo_list, hi_list, flo_list))

    records = []
    for phi_c in cand_phis:
        roots = levelset.solve_roots_at(
            family, comp.p, comp.q, np.array([phi_c % 1.0]),
            comp.bracket, comp.root_tol)[0]
        guess = PlanePoint(phi_c % 1.0, float(roots[0]))
        res = newton_refine(family, guess, s, k, n, refine_tol)
        rec = _canonical_record(family, res.point, n, kind, refine_tol,
                                refined=res.refined)
        if rec is not None:
            records.append(rec)
    return records


def find_birkhoff(family, s: int, n: int, n_phi: int = levelset.DEFAULT_N_PHI,
                  root_tol: float = levelset.DEFAULT_ROOT_TOL,
                  refine_tol: float = DEFAULT_REFINE_TOL) -> List[OrbitRecord]:
    """Orbits advancing the angle by s (and the action by 0) over n steps.

    Returns the deduplicated, canonically labeled records sorted by
    (s, anchor angle); empty means the search found none, which for an exact
    twist family signals a numerical failure rather than true absence.
    """
    if n < 1:
        raise ParameterError("find_birkhoff: n must be >= 1")
    recs = _search_component(family, int(s), 0, int(n), n_phi, root_tol,
                             refine_tol, BIRKHOFF)
    return _merge_records(recs)


def find_vertical(family, k: int, n: int, s_range: Optional[Sequence[int]] = None,
                  n_phi: int = levelset.DEFAULT_N_PHI,
                  root_tol: float = levelset.DEFAULT_ROOT_TOL,
                  refine_tol: float = DEFAULT_REFINE_TOL,
                  i_span: Tuple[float, float] = (-2.0, 2.0)) -> List[OrbitRecord]:
    """Orbits climbing k action units while advancing some angle s over n steps.

    Scans one level-set component per s in s_range (default: every integer
    displacement reachable from actions in ``i_span``); deck covariance makes
    records with anchors outside the fundamental square reappear relabeled,
    so the merge step collapses them.
    """
    k = int(k)
    n = int(n)
    if k == 0:
        raise ParameterError("find_vertical: k must be nonzero (use find_birkhoff)")
    if n < 1:
        raise ParameterError("find_vertical: n must be >= 1")
    if s_range is None:
        s_range = range(math.ceil(n * i_span[0]) - 1,
                        math.floor(n * i_span[1]) + 2)
    records: List[OrbitRecord] = []
    for s in s_range:
        records.extend(_search_component(family, int(s), k, n, n_phi,
                                         root_tol, refine_tol, VERTICAL))
    return _merge_records(records)


def intermediate_spectrum(family, found: OrbitRecord,
                          targets: Sequence, **search_kw) -> List[OrbitRecord]:
    """Search for orbits at every intermediate vertical rotation number.

    Each target (a Fraction or (numerator, denominator) pair) must lie
    strictly between 0 and the found orbit's vertical rotation number, same
    sign.  Returns the flattened list of records for all targets; a target
    with no records simply contributes none.

    Unless the caller overrides ``s_range``, each target searches one
    horizontal winding per deck class (s in range(denominator)); translation
    covariance reaches every other winding by integer shifts, so nothing is
    missed and the search stays proportional to the period.
    """
    results: List[OrbitRecord] = []
    for t in targets:
        frac = t if isinstance(t, Fraction) else Fraction(*t)
        if frac == 0 or abs(frac) >= abs(found.rho_v) or (frac < 0) != (found.rho_v < 0):
            raise ParameterError(
                "intermediate_spectrum: target %s must lie strictly between "
                "0 and %s with the same sign" % (frac, found.rho_v))
        kw = dict(search_kw)
        kw.setdefault("s_range", range(frac.denominator))
        results.extend(find_vertical(family, frac.numerator, frac.denominator,
                                     **kw))
    return results
