"""Covering-space arithmetic between the plane, the cylinder and the torus.

The plane R^2 covers the cylinder S^1 x R (reduce the angle mod 1) which in
turn covers the torus T^2 = R^2/Z^2.  Every other module works with lifted
orbits on the plane, so the mod-1 reduction here must be *exact* about its
integer bookkeeping: ``frac_split`` returns the fractional part together with
the integer part it removed, and the two always add back to the input bit for
bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PlanePoint",
    "CylinderPoint",
    "TorusPoint",
    "Deck",
    "frac_split",
    "mod1",
    "project_cylinder",
    "project_torus",
    "lift",
    "translate",
]


@dataclass(frozen=True)
class PlanePoint:
    """A point (phi~, I~) on the universal cover; both coordinates unbounded."""

    phi: float
    i: float


@dataclass(frozen=True)
class CylinderPoint:
    """A point on S^1 x R: ``phi`` in [0, 1), ``i`` unbounded."""

    phi: float
    i: float


@dataclass(frozen=True)
class TorusPoint:
    """A point on T^2 with both coordinates in [0, 1)."""

    phi: float
    i: float


@dataclass(frozen=True)
class Deck:
    """An integer deck translation (di, dj) acting by (phi, i) + (di, dj)."""

    di: int
    dj: int


def frac_split(x):
    """Split ``x`` into (frac, whole) with frac in [0, 1) and frac + whole == x.

    Works on scalars and arrays.  ``whole`` is an integer-valued float (exact
    for |x| < 2**53).  The fractional part is post-clamped so that values that
    round up to 1.0 (e.g. ``-1e-17``) land back on 0.0 with the whole part
    adjusted — the half-open invariant is never violated.
    """
    x = np.asarray(x, dtype=np.float64)
    whole = np.floor(x)
    frac = x - whole
    # x - floor(x) can round to exactly 1.0 for tiny negative x.
    bump = frac >= 1.0
    if np.any(bump):
        frac = np.where(bump, frac - 1.0, frac)
        whole = np.where(bump, whole + 1.0, whole)
    if frac.ndim == 0:
        return float(frac), float(whole)
    return frac, whole


def mod1(x):
    """Reduce to [0, 1), half-open even under rounding."""
    return frac_split(x)[0]


def project_cylinder(p: PlanePoint) -> CylinderPoint:
    """Project a plane point to the cylinder: angle mod 1, height unchanged."""
    return CylinderPoint(mod1(p.phi), p.i)


def project_torus(p: PlanePoint) -> TorusPoint:
    """Project a plane point to the torus: both coordinates mod 1."""
    return TorusPoint(mod1(p.phi), mod1(p.i))


def lift(x: TorusPoint, d: Deck = Deck(0, 0)) -> PlanePoint:
    """The plane preimage of ``x`` on sheet ``d``: x + (di, dj)."""
    return PlanePoint(x.phi + d.di, x.i + d.dj)


def translate(p: PlanePoint, d: Deck) -> PlanePoint:
    """Apply a deck translation to a plane point."""
    return PlanePoint(p.phi + d.di, p.i + d.dj)


def torus_distance(a, b):
    """Max-metric distance on the torus between coordinate pairs.

    ``a`` and ``b`` are (phi, i) pairs, point objects with ``.phi``/``.i``
    attributes, or arrays of pairs (last axis 2); each coordinate distance
    is measured on the circle.
    """
    if hasattr(a, "phi"):
        a = (a.phi, a.i)
    if hasattr(b, "phi"):
        b = (b.phi, b.i)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = np.abs(mod1(a) - mod1(b))
    d = np.minimum(d, 1.0 - d)
    return np.max(d, axis=-1)
