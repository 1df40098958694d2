"""Numba-compiled stepping kernels (default backend).

Same call surface and reduced-state convention as ``_kernels_numpy`` — see
that module's docstring.  Functions are cached to disk so repeat runs skip
compilation, and release the GIL so the CLI worker pool gets real
parallelism out of threads.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

FAMILY_STANDARD = 0
FAMILY_SADDLE_CENTER = 1
FAMILY_CIRCLE_DIFFEO = 2
FAMILY_STANDARD_SHIFTED = 3

TWO_PI = 2.0 * math.pi

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _split(x):
    w = math.floor(x)
    f = x - w
    if f >= 1.0:
        f -= 1.0
        w += 1.0
    return f, w


@njit(**_JIT)
def _finv_circle(y, omega, eps):
    half = abs(eps) / TWO_PI + 1e-12
    lo = y - omega - half
    hi = y - omega + half
    for _ in range(54):
        mid = 0.5 * (lo + hi)
        g = mid + omega + (eps / TWO_PI) * math.sin(TWO_PI * mid) - y
        if g < 0.0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    for _ in range(2):
        g = mid + omega + (eps / TWO_PI) * math.sin(TWO_PI * mid) - y
        gp = 1.0 + eps * math.cos(TWO_PI * mid)
        mid = mid - g / gp
    return mid


@njit(**_JIT)
def _step(kind, par, fphi, fi, wphi, wi):
    if kind == FAMILY_STANDARD or kind == FAMILY_STANDARD_SHIFTED:
        c = par[0] / TWO_PI
        # double-angle form, bitwise-identical to the numpy backend
        raw_i = fi - c * (2.0 * math.sin(math.pi * fphi) * math.cos(math.pi * fphi))
        if kind == FAMILY_STANDARD_SHIFTED:
            raw_i += par[1]
        fi2, ji = _split(raw_i)
        wi2 = wi + ji
        fphi2, jphi = _split(fphi + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    elif kind == FAMILY_SADDLE_CENTER:
        alpha, gamma = par[0], par[1]
        a2 = alpha * alpha
        s = math.sin(math.pi * fphi)
        co = math.cos(math.pi * fphi)
        logj = math.log(a2 * co * co + (s * s) / a2)
        fi2, ji = _split(fi + (gamma / math.pi) * logj)
        wi2 = wi + ji
        mu = math.atan2(s, a2 * co) / math.pi
        fphi2, jphi = _split(mu + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2
    else:
        omega, eps = par[0], par[1]
        fi2, ji = _split(fi - math.log(1.0 + eps * math.cos(TWO_PI * fphi)))
        wi2 = wi + ji
        fv = fphi + omega + (eps / TWO_PI) * math.sin(TWO_PI * fphi)
        fphi2, jphi = _split(fv + fi2)
        return fphi2, fi2, wphi + wi2 + jphi, wi2


@njit(**_JIT)
def _step_back(kind, par, fphi, fi, wphi, wi):
    if kind == FAMILY_STANDARD or kind == FAMILY_STANDARD_SHIFTED:
        c = par[0] / TWO_PI
        fphi0, jphi = _split(fphi - fi)
        wphi0 = wphi - wi + jphi
        raw_i = fi + c * (2.0 * math.sin(math.pi * fphi0) * math.cos(math.pi * fphi0))
        if kind == FAMILY_STANDARD_SHIFTED:
            raw_i -= par[1]
        fi0, ji = _split(raw_i)
        return fphi0, fi0, wphi0, wi + ji
    elif kind == FAMILY_SADDLE_CENTER:
        alpha, gamma = par[0], par[1]
        a2 = alpha * alpha
        x = fphi - fi
        raw_phi = math.atan2(a2 * math.sin(math.pi * x), math.cos(math.pi * x)) / math.pi
        fphi0, jphi = _split(raw_phi)
        wphi0 = wphi - wi + jphi
        s = math.sin(math.pi * fphi0)
        co = math.cos(math.pi * fphi0)
        logj = math.log(a2 * co * co + (s * s) / a2)
        fi0, ji = _split(fi - (gamma / math.pi) * logj)
        return fphi0, fi0, wphi0, wi + ji
    else:
        omega, eps = par[0], par[1]
        raw_phi = _finv_circle(fphi - fi, omega, eps)
        fphi0, jphi = _split(raw_phi)
        wphi0 = wphi - wi + jphi
        fi0, ji = _split(fi + math.log(1.0 + eps * math.cos(TWO_PI * fphi0)))
        return fphi0, fi0, wphi0, wi + ji


@njit(**_JIT)
def advance(kind, par, fphi, fi, wphi, wi, n):
    fphi = fphi.copy()
    fi = fi.copy()
    wphi = wphi.copy()
    wi = wi.copy()
    steps = n if n >= 0 else -n
    for j in range(fphi.shape[0]):
        a, b, c, d = fphi[j], fi[j], wphi[j], wi[j]
        if n >= 0:
            for _ in range(steps):
                a, b, c, d = _step(kind, par, a, b, c, d)
        else:
            for _ in range(steps):
                a, b, c, d = _step_back(kind, par, a, b, c, d)
        fphi[j], fi[j], wphi[j], wi[j] = a, b, c, d
    return fphi, fi, wphi, wi


@njit(**_JIT)
def trajectory(kind, par, fphi0, fi0, wphi0, wi0, n):
    fphi = np.empty(n + 1)
    fi = np.empty(n + 1)
    wphi = np.empty(n + 1)
    wi = np.empty(n + 1)
    a, b, c, d = fphi0, fi0, wphi0, wi0
    fphi[0], fi[0], wphi[0], wi[0] = a, b, c, d
    for m in range(1, n + 1):
        a, b, c, d = _step(kind, par, a, b, c, d)
        fphi[m], fi[m], wphi[m], wi[m] = a, b, c, d
    return fphi, fi, wphi, wi


@njit(**_JIT)
def hit_times(kind, par, fphi, fi, wphi, wi, horizon, upper, lower):
    n_seeds = fphi.shape[0]
    n_up = np.zeros(n_seeds, dtype=np.int64)
    n_down = np.zeros(n_seeds, dtype=np.int64)
    for j in range(n_seeds):
        a, b, c, d = fphi[j], fi[j], wphi[j], wi[j]
        up = 0
        down = 0
        for step in range(1, horizon + 1):
            a, b, c, d = _step(kind, par, a, b, c, d)
            h = d + b
            if up == 0 and h > upper:
                up = step
            if down == 0 and h < lower:
                down = step
            if up > 0 and down > 0:
                break
        n_up[j] = up
        n_down[j] = down
    return n_up, n_down
