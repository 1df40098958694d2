"""Pure NumPy/Python stepping kernels (fallback backend).

Same call surface as ``_kernels_numba``; selected by setting the environment
variable ``TORUSTWIST_NUMBA=0`` (see ``torustwist.kernels``).

State convention, shared by every kernel: an orbit point is carried as
``(fphi, fi, wphi, wi)`` where the fractional parts live in [0, 1) and the
winding parts are integer-valued floats.  The lifted point is
``(fphi + wphi, fi + wi)``.  Stepping the fractional parts and carrying the
integer overflow separately keeps deck bookkeeping exact: translating a seed
by integers changes only the winding columns, and they change by exact
integers.  Trig arguments therefore never grow, which is what makes long
vertical orbits floating-point clean.

Family codes: 0 = standard, 1 = saddle-center (unit-period rescale),
2 = circle-diffeo, 3 = standard with a constant vertical shift (the shipped
non-exact variant).  Parameter packing is documented next to each branch.
"""

from __future__ import annotations

import math

import numpy as np

FAMILY_STANDARD = 0
FAMILY_SADDLE_CENTER = 1
FAMILY_CIRCLE_DIFFEO = 2
FAMILY_STANDARD_SHIFTED = 3

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# array helpers
# ---------------------------------------------------------------------------

def _split(x):
    w = np.floor(x)
    f = x - w
    bump = f >= 1.0
    f = np.where(bump, f - 1.0, f)
    w = np.where(bump, w + 1.0, w)
    return f, w


def _finv_circle(y, omega, eps):
    """Solve u + omega + (eps/2pi) sin(2 pi u) = y for u (increasing lift)."""
    half = abs(eps) / TWO_PI + 1e-12
    lo = y - omega - half
    hi = y - omega + half
    for _ in range(54):
        mid = 0.5 * (lo + hi)
        g = mid + omega + (eps / TWO_PI) * np.sin(TWO_PI * mid) - y
        neg = g < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    mid = 0.5 * (lo + hi)
    for _ in range(2):
        g = mid + omega + (eps / TWO_PI) * np.sin(TWO_PI * mid) - y
        gp = 1.0 + eps * np.cos(TWO_PI * mid)
        mid = mid - g / gp
    return mid


def _step_arrays(kind, par, fphi, fi, wphi, wi):
    if kind == FAMILY_STANDARD or kind == FAMILY_STANDARD_SHIFTED:
        c = par[0] / TWO_PI
        # sin(2*pi*phi) via the double angle: the libm argument stays in
        # [0, pi), where scalar and vector trig agree to the last bit.
        raw_i = fi - c * (2.0 * np.sin(math.pi * fphi) * np.cos(math.pi * fphi))
        if kind == FAMILY_STANDARD_SHIFTED:
            raw_i = raw_i + par[1]
        fi2, ji = _split(raw_i)
        wi2 = wi + ji
        fphi2, jphi = _split(fphi + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    if kind == FAMILY_SADDLE_CENTER:
        alpha, gamma = par[0], par[1]
        a2 = alpha * alpha
        s = np.sin(math.pi * fphi)
        co = np.cos(math.pi * fphi)
        logj = np.log(a2 * co * co + (s * s) / a2)
        raw_i = fi + (gamma / math.pi) * logj
        fi2, ji = _split(raw_i)
        wi2 = wi + ji
        mu = np.arctan2(s, a2 * co) / math.pi
        fphi2, jphi = _split(mu + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    if kind == FAMILY_CIRCLE_DIFFEO:
        omega, eps = par[0], par[1]
        raw_i = fi - np.log(1.0 + eps * np.cos(TWO_PI * fphi))
        fi2, ji = _split(raw_i)
        wi2 = wi + ji
        fv = fphi + omega + (eps / TWO_PI) * np.sin(TWO_PI * fphi)
        fphi2, jphi = _split(fv + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    raise ValueError(f"unknown family code {kind}")


def _step_back_arrays(kind, par, fphi, fi, wphi, wi):
    if kind == FAMILY_STANDARD or kind == FAMILY_STANDARD_SHIFTED:
        c = par[0] / TWO_PI
        fphi0, jphi = _split(fphi - fi)
        wphi0 = wphi - wi + jphi
        raw_i = fi + c * (2.0 * np.sin(math.pi * fphi0) * np.cos(math.pi * fphi0))
        if kind == FAMILY_STANDARD_SHIFTED:
            raw_i = raw_i - par[1]
        fi0, ji = _split(raw_i)
        return fphi0, fi0, wphi0, wi + ji
    if kind == FAMILY_SADDLE_CENTER:
        alpha, gamma = par[0], par[1]
        a2 = alpha * alpha
        x = fphi - fi
        raw_phi = np.arctan2(a2 * np.sin(math.pi * x), np.cos(math.pi * x)) / math.pi
        fphi0, jphi = _split(raw_phi)
        wphi0 = wphi - wi + jphi
        s = np.sin(math.pi * fphi0)
        co = np.cos(math.pi * fphi0)
        logj = np.log(a2 * co * co + (s * s) / a2)
        fi0, ji = _split(fi - (gamma / math.pi) * logj)
        return fphi0, fi0, wphi0, wi + ji
    if kind == FAMILY_CIRCLE_DIFFEO:
        omega, eps = par[0], par[1]
        raw_phi = _finv_circle(fphi - fi, omega, eps)
        fphi0, jphi = _split(raw_phi)
        wphi0 = wphi - wi + jphi
        raw_i = fi + np.log(1.0 + eps * np.cos(TWO_PI * fphi0))
        fi0, ji = _split(raw_i)
        return fphi0, fi0, wphi0, wi + ji
    raise ValueError(f"unknown family code {kind}")


def advance(kind, par, fphi, fi, wphi, wi, n):
    """Advance reduced states ``n`` steps (n < 0 iterates the inverse)."""
    fphi = np.array(fphi, dtype=np.float64, copy=True)
    fi = np.array(fi, dtype=np.float64, copy=True)
    wphi = np.array(wphi, dtype=np.float64, copy=True)
    wi = np.array(wi, dtype=np.float64, copy=True)
    step = _step_arrays if n >= 0 else _step_back_arrays
    for _ in range(abs(int(n))):
        fphi, fi, wphi, wi = step(kind, par, fphi, fi, wphi, wi)
    return fphi, fi, wphi, wi


# ---------------------------------------------------------------------------
# scalar paths (math module is much faster than numpy scalars)
# ---------------------------------------------------------------------------

def _split_s(x):
    w = math.floor(x)
    f = x - w
    if f >= 1.0:
        f -= 1.0
        w += 1.0
    return f, w


def _step_scalar(kind, par, fphi, fi, wphi, wi):
    if kind == FAMILY_STANDARD or kind == FAMILY_STANDARD_SHIFTED:
        c = par[0] / TWO_PI
        raw_i = fi - c * (2.0 * math.sin(math.pi * fphi) * math.cos(math.pi * fphi))
        if kind == FAMILY_STANDARD_SHIFTED:
            raw_i += par[1]
        fi2, ji = _split_s(raw_i)
        wi2 = wi + ji
        fphi2, jphi = _split_s(fphi + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    if kind == FAMILY_SADDLE_CENTER:
        alpha, gamma = par[0], par[1]
        a2 = alpha * alpha
        s = math.sin(math.pi * fphi)
        co = math.cos(math.pi * fphi)
        logj = math.log(a2 * co * co + (s * s) / a2)
        fi2, ji = _split_s(fi + (gamma / math.pi) * logj)
        wi2 = wi + ji
        mu = math.atan2(s, a2 * co) / math.pi
        fphi2, jphi = _split_s(mu + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    if kind == FAMILY_CIRCLE_DIFFEO:
        omega, eps = par[0], par[1]
        fi2, ji = _split_s(fi - math.log(1.0 + eps * math.cos(TWO_PI * fphi)))
        wi2 = wi + ji
        fv = fphi + omega + (eps / TWO_PI) * math.sin(TWO_PI * fphi)
        fphi2, jphi = _split_s(fv + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    raise ValueError(f"unknown family code {kind}")


def trajectory(kind, par, fphi0, fi0, wphi0, wi0, n):
    """Forward trajectory of one seed: four arrays of length n + 1."""
    n = int(n)
    fphi = np.empty(n + 1)
    fi = np.empty(n + 1)
    wphi = np.empty(n + 1)
    wi = np.empty(n + 1)
    a, b, c, d = float(fphi0), float(fi0), float(wphi0), float(wi0)
    fphi[0], fi[0], wphi[0], wi[0] = a, b, c, d
    for m in range(1, n + 1):
        a, b, c, d = _step_scalar(kind, par, a, b, c, d)
        fphi[m], fi[m], wphi[m], wi[m] = a, b, c, d
    return fphi, fi, wphi, wi


def hit_times(kind, par, fphi, fi, wphi, wi, horizon, upper, lower):
    """First passage times above ``upper`` / below ``lower`` per seed.

    Returns two int64 arrays; 0 means the level was never crossed within
    ``horizon`` steps.
    """
    fphi = np.array(fphi, dtype=np.float64, copy=True)
    fi = np.array(fi, dtype=np.float64, copy=True)
    wphi = np.array(wphi, dtype=np.float64, copy=True)
    wi = np.array(wi, dtype=np.float64, copy=True)
    n_up = np.zeros(fphi.shape, dtype=np.int64)
    n_down = np.zeros(fphi.shape, dtype=np.int64)
    for step in range(1, int(horizon) + 1):
        fphi, fi, wphi, wi = _step_arrays(kind, par, fphi, fi, wphi, wi)
        h = wi + fi
        np.copyto(n_up, step, where=(n_up == 0) & (h > upper))
        np.copyto(n_down, step, where=(n_down == 0) & (h < lower))
        if np.all(n_up > 0) and np.all(n_down > 0):
            break
    return n_up, n_down
