"""Level sets of the q-step angular displacement and their graph functions.

For integers (p, q) the set of cylinder points whose angle advances by
exactly p under q map steps is closed and, by the twist condition, meets
every vertical line.  We store it through its per-angle root lists and the
four graph functions: mu_minus/mu_plus (lowest/highest root) and
nu_minus/nu_plus (lowest/highest action over the images of the roots).
Orbit searches downstream only ever evaluate along these graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from . import maps
from .covering import frac_split
from .errors import NumericalError, ParameterError

DEFAULT_N_PHI = 1024
DEFAULT_N_SCAN = 512
DEFAULT_ROOT_TOL = 1e-12

#: geometric bracket expansion gives up past this multiple of the first slack
_BRACKET_CAP = 2 ** 16


@dataclass(frozen=True)
class LevelSetComponent:
    """Root data of p1(T^q(phi, I)) = phi + p over an angle grid.

    ``roots_per_phi[j]`` holds every root above ``phis[j]`` found inside
    ``bracket``, sorted increasing.  ``cardinality_jumps`` flags grid indices
    where the root count changes between neighbours (the set folds there and
    the component structure is ambiguous; the graph data stays well defined).
    """

    p: int
    q: int
    phis: np.ndarray
    roots_per_phi: Tuple[np.ndarray, ...]
    mu_minus: np.ndarray
    mu_plus: np.ndarray
    nu_minus: np.ndarray
    nu_plus: np.ndarray
    bracket: Tuple[float, float]
    root_tol: float
    family_key: str
    cardinality_jumps: Tuple[int, ...] = ()


def _lift_images(family, phis, ivals, q):
    """p1 and p2 of T^q at arbitrary plane points, vectorized."""
    fphi, wphi = frac_split(np.asarray(phis, dtype=np.float64).ravel())
    fi, wi = frac_split(np.asarray(ivals, dtype=np.float64).ravel())
    fphi, fi, wphi, wi = maps.advance_state(
        family, np.atleast_1d(fphi).copy(), np.atleast_1d(fi).copy(),
        np.atleast_1d(wphi).copy(), np.atleast_1d(wi).copy(), q)
    shape = np.asarray(phis).shape
    return (fphi + wphi).reshape(shape), (fi + wi).reshape(shape)


def _displacement(family, phis, ivals, p, q):
    """g = p1(T^q) - phi - p; roots are the level-set points."""
    p1, _ = _lift_images(family, phis, ivals, q)
    return p1 - phis - p


def _initial_bracket(family, p, q):
    slack = 2.0 + maps.drop_bound(family) * q
    center = p / q
    return center - slack, center + slack, slack


def _expand_bracket(family, p, q, probe_phis):
    """Grow [lo, hi] until g < 0 at lo and g > 0 at hi for every probe angle."""
    lo, hi, slack0 = _initial_bracket(family, p, q)
    slack = slack0
    center = p / q
    while True:
        g_lo = _displacement(family, probe_phis, np.full_like(probe_phis, lo), p, q)
        g_hi = _displacement(family, probe_phis, np.full_like(probe_phis, hi), p, q)
        if np.max(g_lo) < 0.0 and np.min(g_hi) > 0.0:
            return lo, hi
        slack *= 2.0
        if slack > _BRACKET_CAP * slack0:
            raise NumericalError(
                "level-set bracket for (p,q)=(%d,%d) did not verify after "
                "expanding to +-%g: the family's angular displacement does "
                "not grow with the action as required" % (p, q, slack))
        lo, hi = center - slack, center + slack


def _bisect_roots(family, phi_b, a, b, ga, p, q, iters=60):
    """Vectorized bisection on intervals with a sign change of g."""
    sign_a = np.sign(ga)
    for _ in range(iters):
        m = 0.5 * (a + b)
        gm = _displacement(family, phi_b, m, p, q)
        toward_a = np.sign(gm) == sign_a
        a = np.where(toward_a, m, a)
        b = np.where(toward_a, b, m)
    return 0.5 * (a + b)


def solve_roots_at(family, p, q, phi_values, bracket, root_tol=DEFAULT_ROOT_TOL,
                   n_scan=DEFAULT_N_SCAN) -> List[np.ndarray]:
    """All level-set roots above each given angle, inside a verified bracket.

    This is the shared core of :func:`compute_levelset` and of downstream
    searches that refuse to interpolate: they re-solve at the exact angle.
    """
    phis = np.atleast_1d(np.asarray(phi_values, dtype=np.float64))
    lo, hi = bracket
    if q == 1:
        # The twist condition makes g strictly increasing in I: one root,
        # one bisection, no scan.
        a = np.full_like(phis, lo)
        b = np.full_like(phis, hi)
        ga = _displacement(family, phis, a, p, q)
        roots = _bisect_roots(family, phis, a, b, ga, p, q)
        return [np.array([r]) for r in roots]

    scan = np.linspace(lo, hi, n_scan + 1)
    phi_mesh = np.repeat(phis, scan.size)
    i_mesh = np.tile(scan, phis.size)
    g = _displacement(family, phi_mesh, i_mesh, p, q).reshape(phis.size, scan.size)

    out: List[List[float]] = [[] for _ in range(phis.size)]

    node_idx, node_jdx = np.nonzero(g == 0.0)
    for j, m in zip(node_idx, node_jdx):
        out[j].append(float(scan[m]))

    gl = g[:, :-1]
    gr = g[:, 1:]
    cross_idx, cross_jdx = np.nonzero((gl * gr) < 0.0)
    if cross_idx.size:
        a = scan[cross_jdx]
        b = scan[cross_jdx + 1]
        ga = gl[cross_idx, cross_jdx]
        roots = _bisect_roots(family, phis[cross_idx], a, b, ga, p, q)
        for j, r in zip(cross_idx, roots):
            out[j].append(float(r))

    result = []
    for j, lst in enumerate(out):
        if not lst:
            raise NumericalError(
                "no level-set root found at phi=%.17g despite a verified "
                "bracket; increase n_scan" % phis[j])
        arr = np.sort(np.asarray(lst))
        keep = np.concatenate([[True], np.diff(arr) > root_tol])
        result.append(arr[keep])
    return result


_component_cache: dict = {}


def compute_levelset(family, p: int, q: int, n_phi: int = DEFAULT_N_PHI,
                     root_tol: float = DEFAULT_ROOT_TOL,
                     n_scan: int = DEFAULT_N_SCAN) -> LevelSetComponent:
    """Build the level-set component data over a uniform angle grid."""
    p = int(p)
    q = int(q)
    if q < 1:
        raise ParameterError("compute_levelset: q must be >= 1")
    if n_phi < 16:
        raise ParameterError("compute_levelset: n_phi must be >= 16")
    if root_tol <= 0.0:
        raise ParameterError("compute_levelset: root_tol must be positive")

    key = (family.key, p, q, n_phi, root_tol, n_scan)
    hit = _component_cache.get(key)
    if hit is not None:
        return hit

    phis = np.linspace(0.0, 1.0, n_phi, endpoint=False)
    probe = phis[:: max(1, n_phi // 64)]
    lo, hi = _expand_bracket(family, p, q, probe)

    roots = solve_roots_at(family, p, q, phis, (lo, hi), root_tol, n_scan)

    mu_minus = np.array([r[0] for r in roots])
    mu_plus = np.array([r[-1] for r in roots])

    counts = np.array([r.size for r in roots])
    flat_phi = np.repeat(phis, counts)
    flat_roots = np.concatenate(roots)
    _, img_i = _lift_images(family, flat_phi, flat_roots, q)
    splits = np.cumsum(counts)[:-1]
    per_phi = np.split(img_i, splits)
    nu_minus = np.array([v.min() for v in per_phi])
    nu_plus = np.array([v.max() for v in per_phi])

    jumps = tuple(int(j) for j in np.nonzero(np.diff(counts) != 0)[0])

    comp = LevelSetComponent(
        p=p, q=q, phis=phis, roots_per_phi=tuple(roots),
        mu_minus=mu_minus, mu_plus=mu_plus,
        nu_minus=nu_minus, nu_plus=nu_plus,
        bracket=(float(lo), float(hi)), root_tol=root_tol,
        family_key=family.key, cardinality_jumps=jumps)

    if len(_component_cache) > 32:
        _component_cache.pop(next(iter(_component_cache)))
    _component_cache[key] = comp
    return comp


def verify_exchange(component: LevelSetComponent, family) -> float:
    """Residual of the min/max exchange between the graphs and their images.

    The lowest root must land on the highest image action and the highest
    root on the lowest; in between, image actions are ordered opposite to
    the roots' first/last order.  Returns the worst violation over the grid
    (both the two identities and that ordering), re-evaluating the map on
    every stored root.
    """
    phis = component.phis
    p, q = component.p, component.q

    res = 0.0
    for mu, nu in ((component.mu_minus, component.nu_plus),
                   (component.mu_plus, component.nu_minus)):
        p1, p2 = _lift_images(family, phis, mu, q)
        res = max(res,
                  float(np.max(np.abs(p1 - phis - p))),
                  float(np.max(np.abs(p2 - nu))))

    counts = np.array([r.size for r in component.roots_per_phi])
    flat_phi = np.repeat(phis, counts)
    flat_roots = np.concatenate(component.roots_per_phi)
    _, img = _lift_images(family, flat_phi, flat_roots, q)
    per_phi = np.split(img, np.cumsum(counts)[:-1])
    for v in per_phi:
        # first root's image on top, last root's image at the bottom
        res = max(res, float(np.max(v - v[0])), float(np.max(v[-1] - v)))
    return res


def translate_component(component: LevelSetComponent, l: int) -> LevelSetComponent:
    """Shift the whole component up by l action units (deck covariance)."""
    l = int(l)
    if l == 0:
        return component
    return replace(
        component,
        p=component.p + l * component.q,
        roots_per_phi=tuple(r + l for r in component.roots_per_phi),
        mu_minus=component.mu_minus + l,
        mu_plus=component.mu_plus + l,
        nu_minus=component.nu_minus + l,
        nu_plus=component.nu_plus + l,
        bracket=(component.bracket[0] + l, component.bracket[1] + l),
    )
