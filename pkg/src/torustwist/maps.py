"""Map families on the cylinder and their structural checks.

A :class:`TwistFamily` bundles a lift of an area-preserving twist map of the
torus together with the analytic extras the rest of the package wants: the
Jacobian, the preserved density and its antiderivative (for the net-flux
exactness check), and a generating function when one is known in closed form.

The built-in families evaluate through the compiled kernels in
:mod:`torustwist.kernels`; user-supplied families step through a plain Python
loop with the same winding bookkeeping, so every caller sees one interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .covering import PlanePoint, frac_split
from .errors import DivergenceError, NonGraphImageError, NumericalError, ParameterError

TWO_PI = 2.0 * math.pi

#: Coordinates past this magnitude are treated as a diverged orbit.
DIVERGENCE_CAP = 1e12

_FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# family container
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwistFamily:
    """A lift T(phi, I) of an area-preserving twist map of the torus.

    ``forward`` and ``inverse`` are numpy-broadcastable callables
    ``(phi, i) -> (phi', i')`` acting on the plane (any real inputs).
    ``jac_elements(phi, i)`` returns the four entries
    ``(d phi'/d phi, d phi'/d I, d I'/d phi, d I'/d I)``; when absent a
    central finite difference is used.  ``kind`` selects a compiled kernel
    (negative for custom families).
    """

    name: str
    params: Tuple[Tuple[str, float], ...]
    kind: int
    kernel_params: np.ndarray
    forward: Callable
    inverse: Callable
    jac_elements: Optional[Callable] = None
    exactness_density: Optional[Callable] = None
    exactness_primitive: Optional[Callable] = None
    generating_function: Optional[Callable] = None
    exact: bool = True
    #: natural angular period of the family before the unit-period rescale
    #: (informational; all exposed coordinates are already unit-period)
    period_rescale: float = 1.0

    @property
    def key(self) -> str:
        bits = ",".join("%s=%.17g" % (k, v) for k, v in self.params)
        return "%s(%s)" % (self.name, bits)

    def __repr__(self):  # pragma: no cover - cosmetic
        return "TwistFamily<%s>" % self.key

    def jacobian(self, phi: float, i: float) -> np.ndarray:
        """2x2 Jacobian matrix of the lift at a single point."""
        a, b, c, d = jac_at(self, phi, i)
        return np.array([[a, b], [c, d]], dtype=np.float64)


def jac_at(family: TwistFamily, phi, i):
    """Jacobian entries at (arrays of) points, analytic when available."""
    if family.jac_elements is not None:
        return family.jac_elements(phi, i)
    return _fd_jacobian(family.forward, phi, i)


def _fd_jacobian(forward, phi, i):
    phi = np.asarray(phi, dtype=np.float64)
    i = np.asarray(i, dtype=np.float64)
    hp = _FD_STEP * np.maximum(1.0, np.abs(phi))
    hi = _FD_STEP * np.maximum(1.0, np.abs(i))
    fp1, fi1 = forward(phi + hp, i)
    fp0, fi0 = forward(phi - hp, i)
    a = (fp1 - fp0) / (2.0 * hp)
    c = (fi1 - fi0) / (2.0 * hp)
    gp1, gi1 = forward(phi, i + hi)
    gp0, gi0 = forward(phi, i - hi)
    b = (gp1 - gp0) / (2.0 * hi)
    d = (gi1 - gi0) / (2.0 * hi)
    return a, b, c, d


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def builtin_standard(k: float) -> TwistFamily:
    """Chirikov standard map lift: I' = I - (k/2pi) sin(2pi phi), phi' = phi + I'."""
    k = float(k)
    c = k / TWO_PI

    def fwd(phi, i):
        # same double-angle evaluation as the stepping kernels
        i2 = i - c * (2.0 * np.sin(math.pi * phi) * np.cos(math.pi * phi))
        return phi + i2, i2

    def inv(phi, i):
        phi0 = phi - i
        return phi0, i + c * (2.0 * np.sin(math.pi * phi0) * np.cos(math.pi * phi0))

    def jac(phi, i):
        cc = -k * np.cos(TWO_PI * phi)
        one = np.ones_like(np.asarray(phi, dtype=np.float64))
        return 1.0 + cc, one, cc, one

    def gen(phi, phi1):
        return 0.5 * (phi1 - phi) ** 2 + (k / (TWO_PI * TWO_PI)) * np.cos(TWO_PI * phi)

    return TwistFamily(
        name="standard",
        params=(("k", k),),
        kind=kernels.FAMILY_STANDARD,
        kernel_params=np.array([k], dtype=np.float64),
        forward=fwd,
        inverse=inv,
        jac_elements=jac,
        exactness_density=lambda i: np.ones_like(np.asarray(i, dtype=np.float64)),
        exactness_primitive=lambda i: np.asarray(i, dtype=np.float64),
        generating_function=gen,
    )


def builtin_standard_shifted(k: float, shift: float = 0.25) -> TwistFamily:
    """Standard map with a constant action kick; not exact unless shift == 0."""
    k = float(k)
    shift = float(shift)
    c = k / TWO_PI

    def fwd(phi, i):
        i2 = i - c * (2.0 * np.sin(math.pi * phi) * np.cos(math.pi * phi)) + shift
        return phi + i2, i2

    def inv(phi, i):
        phi0 = phi - i
        return phi0, i + c * (2.0 * np.sin(math.pi * phi0) * np.cos(math.pi * phi0)) - shift

    def jac(phi, i):
        cc = -k * np.cos(TWO_PI * phi)
        one = np.ones_like(np.asarray(phi, dtype=np.float64))
        return 1.0 + cc, one, cc, one

    return TwistFamily(
        name="standard_shifted",
        params=(("k", k), ("shift", shift)),
        kind=kernels.FAMILY_STANDARD_SHIFTED,
        kernel_params=np.array([k, shift], dtype=np.float64),
        forward=fwd,
        inverse=inv,
        jac_elements=jac,
        exactness_density=lambda i: np.ones_like(np.asarray(i, dtype=np.float64)),
        exactness_primitive=lambda i: np.asarray(i, dtype=np.float64),
        exact=(shift == 0.0),
    )


def _saddle_mu(u, a2):
    """Degree-one circle map u -> atan2(sin(pi u), a2 cos(pi u)) / pi on [0,1)."""
    return np.arctan2(np.sin(math.pi * u), a2 * np.cos(math.pi * u)) / math.pi


def _saddle_mu_inv(x, a2):
    return np.arctan2(a2 * np.sin(math.pi * x), np.cos(math.pi * x)) / math.pi


def _saddle_logj(u, a2):
    co = np.cos(math.pi * u)
    si = np.sin(math.pi * u)
    return np.log(a2 * co * co + (si * si) / a2)


def builtin_saddle_center(alpha: float, gamma: float) -> TwistFamily:
    """Separatrix-neighbourhood model map in unit-period coordinates.

    v' = v + (gamma/pi) log J(u),  u' = mu(u) + v', where mu deforms the
    circle with contraction ratio alpha**2 and J = (mu')^-1.  Preserves the
    density exp(pi v / gamma) d u d v.
    """
    alpha = float(alpha)
    gamma = float(gamma)
    if alpha <= 0.0:
        raise ParameterError("saddle_center: alpha must be positive, got %r" % alpha)
    if gamma <= 0.0:
        raise ParameterError("saddle_center: gamma must be positive, got %r" % gamma)
    a2 = alpha * alpha
    g_over_pi = gamma / math.pi

    def fwd(u, v):
        uf, uw = frac_split(u)
        v2 = v + g_over_pi * _saddle_logj(uf, a2)
        u2 = _saddle_mu(uf, a2) + uw + v2
        return u2, v2

    def inv(u, v):
        xf, xw = frac_split(u - v)
        u0f, u0w = frac_split(_saddle_mu_inv(xf, a2) + xw)
        v0 = v - g_over_pi * _saddle_logj(u0f, a2)
        return u0f + u0w, v0

    def jac(u, v):
        uf, _ = frac_split(u)
        co = np.cos(math.pi * uf)
        si = np.sin(math.pi * uf)
        jj = a2 * co * co + (si * si) / a2
        djj = (1.0 / a2 - a2) * 2.0 * si * co  # dJ/d(pi u)
        kick = gamma * djj / jj                # d v'/d u
        a = 1.0 / jj + kick
        one = np.ones_like(jj)
        return a, one, kick, one

    def dens(v):
        return np.exp(math.pi * np.asarray(v, dtype=np.float64) / gamma)

    def dens_prim(v):
        return g_over_pi * np.exp(math.pi * np.asarray(v, dtype=np.float64) / gamma)

    def gen(u, u1):
        uf, uw = frac_split(u)
        return g_over_pi ** 2 * np.exp(
            math.pi * (u1 - (_saddle_mu(uf, a2) + uw)) / gamma)

    return TwistFamily(
        name="saddle_center",
        params=(("alpha", alpha), ("gamma", gamma)),
        kind=kernels.FAMILY_SADDLE_CENTER,
        kernel_params=np.array([alpha, gamma], dtype=np.float64),
        forward=fwd,
        inverse=inv,
        jac_elements=jac,
        exactness_density=dens,
        exactness_primitive=dens_prim,
        generating_function=gen,
        period_rescale=math.pi,
    )


def builtin_circle_diffeo(omega: float, eps: float) -> TwistFamily:
    """Suspension of the circle diffeo f(phi) = phi + omega + (eps/2pi) sin(2pi phi).

    I' = I - log f'(phi), phi' = f(phi) + I'.  Preserves exp(I) d phi d I.
    Requires |eps| < 1 so f' > 0.
    """
    omega = float(omega)
    eps = float(eps)
    if not abs(eps) < 1.0:
        raise ParameterError("circle_diffeo: need |eps| < 1, got %r" % eps)

    def fval(phi):
        return phi + omega + (eps / TWO_PI) * np.sin(TWO_PI * phi)

    def fprime(phi):
        return 1.0 + eps * np.cos(TWO_PI * phi)

    def fwd(phi, i):
        i2 = i - np.log(fprime(phi))
        return fval(phi) + i2, i2

    def inv(phi, i):
        y = np.asarray(phi - i, dtype=np.float64)
        phi0 = _circle_inverse(y, omega, eps)
        return phi0, i + np.log(fprime(phi0))

    def jac(phi, i):
        fp = fprime(phi)
        fpp = -TWO_PI * eps * np.sin(TWO_PI * phi)
        kick = -fpp / fp
        one = np.ones_like(fp)
        return fp + kick, one, kick, one

    def dens(i):
        return np.exp(np.asarray(i, dtype=np.float64))

    def gen(phi, phi1):
        return np.exp(phi1 - fval(phi))

    return TwistFamily(
        name="circle_diffeo",
        params=(("omega", omega), ("eps", eps)),
        kind=kernels.FAMILY_CIRCLE_DIFFEO,
        kernel_params=np.array([omega, eps], dtype=np.float64),
        forward=fwd,
        inverse=inv,
        jac_elements=jac,
        exactness_density=dens,
        exactness_primitive=dens,
        generating_function=gen,
    )


def _circle_inverse(y, omega, eps):
    """Solve phi + omega + (eps/2pi) sin(2pi phi) = y on the real line."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    half = abs(eps) / TWO_PI + 1e-12
    lo = y - omega - half
    hi = y - omega + half
    for _ in range(54):
        mid = 0.5 * (lo + hi)
        g = mid + omega + (eps / TWO_PI) * np.sin(TWO_PI * mid) - y
        take = g <= 0.0
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(2):
        g = x + omega + (eps / TWO_PI) * np.sin(TWO_PI * x) - y
        x = x - g / (1.0 + eps * np.cos(TWO_PI * x))
    if x.shape == (1,):
        return float(x[0])
    return x


def custom_family(
    name: str,
    forward: Callable,
    inverse: Callable,
    params: Sequence[Tuple[str, float]] = (),
    jac_elements: Optional[Callable] = None,
    exactness_density: Optional[Callable] = None,
    exactness_primitive: Optional[Callable] = None,
    generating_function: Optional[Callable] = None,
    exact: bool = True,
) -> TwistFamily:
    """Wrap user-supplied lift callables as a family.

    The callables must be numpy-broadcastable and defined on the whole plane.
    Without ``jac_elements`` the Jacobian falls back to central differences.
    """
    return TwistFamily(
        name=name,
        params=tuple((str(k), float(v)) for k, v in params),
        kind=-1,
        kernel_params=np.empty(0, dtype=np.float64),
        forward=forward,
        inverse=inverse,
        jac_elements=jac_elements,
        exactness_density=exactness_density,
        exactness_primitive=exactness_primitive,
        generating_function=generating_function,
        exact=exact,
    )


BUILTIN_FAMILIES = {
    "standard": (builtin_standard, ("k",)),
    "standard_shifted": (builtin_standard_shifted, ("k", "shift")),
    "saddle_center": (builtin_saddle_center, ("alpha", "gamma")),
    "circle_diffeo": (builtin_circle_diffeo, ("omega", "eps")),
}


def family_from_config(name: str, params: dict) -> TwistFamily:
    """Instantiate a built-in family from its config-file name and parameters."""
    if name not in BUILTIN_FAMILIES:
        raise ParameterError(
            "unknown family %r (choose from %s)" % (name, sorted(BUILTIN_FAMILIES)))
    builder, wanted = BUILTIN_FAMILIES[name]
    extra = set(params) - set(wanted)
    if extra:
        raise ParameterError("family %s: unknown parameters %s" % (name, sorted(extra)))
    missing = [w for w in wanted if w not in params and w != "shift"]
    if missing:
        raise ParameterError("family %s: missing parameters %s" % (name, missing))
    return builder(**{k: float(v) for k, v in params.items()})


# ---------------------------------------------------------------------------
# stepping (winding-aware state)
# ---------------------------------------------------------------------------

def advance_state(family, fphi, fi, wphi, wi, n):
    """Advance reduced states n steps (n < 0 iterates the inverse).

    State arrays are (frac phi, frac I, integer winding phi, integer winding I)
    with the lifted point equal to (fphi + wphi, fi + wi).  Built-in families
    run on the compiled kernels; custom families loop in Python with the same
    deck bookkeeping.
    """
    if family.kind >= 0:
        return kernels.advance(family.kind, family.kernel_params,
                               fphi, fi, wphi, wi, n)
    return _advance_python(family, fphi, fi, wphi, wi, n)


def _advance_python(family, fphi, fi, wphi, wi, n):
    fphi = np.array(fphi, dtype=np.float64, copy=True)
    fi = np.array(fi, dtype=np.float64, copy=True)
    wphi = np.array(wphi, dtype=np.float64, copy=True)
    wi = np.array(wi, dtype=np.float64, copy=True)
    step = family.forward if n >= 0 else family.inverse
    sign = 1.0 if n >= 0 else -1.0
    for _ in range(abs(int(n))):
        p, q = step(fphi, fi)
        fi, jq = frac_split(q)
        fphi, jp = frac_split(p)
        # T(z + (m, j)) = T(z) + (m + j, j); the inverse subtracts j instead.
        wphi = wphi + sign * wi + jp
        wi = wi + jq
    return fphi, fi, wphi, wi


def trajectory_state(family, fphi, fi, wphi, wi, n):
    """Reduced orbit of a single seed: four arrays of length n+1."""
    if family.kind >= 0:
        return kernels.trajectory(family.kind, family.kernel_params,
                                  fphi, fi, wphi, wi, n)
    steps = abs(int(n))
    out = np.empty((4, steps + 1), dtype=np.float64)
    a = np.array([fphi]); b = np.array([fi])
    c = np.array([wphi]); d = np.array([wi])
    out[:, 0] = (a[0], b[0], c[0], d[0])
    unit = 1 if n >= 0 else -1
    for m in range(1, steps + 1):
        a, b, c, d = _advance_python(family, a, b, c, d, unit)
        out[:, m] = (a[0], b[0], c[0], d[0])
    return out[0], out[1], out[2], out[3]


def hit_times_state(family, phi, i, horizon, upper, lower):
    """First passage of I beyond [lower, upper] for each seed (0 = never)."""
    fphi, wphi = frac_split(np.atleast_1d(np.asarray(phi, dtype=np.float64)))
    fi, wi = frac_split(np.atleast_1d(np.asarray(i, dtype=np.float64)))
    if family.kind >= 0:
        return kernels.hit_times(family.kind, family.kernel_params,
                                 fphi, fi, wphi, wi, int(horizon), upper, lower)
    t_up = np.zeros(fphi.shape, dtype=np.int64)
    t_down = np.zeros(fphi.shape, dtype=np.int64)
    for m in range(1, int(horizon) + 1):
        fphi, fi, wphi, wi = _advance_python(family, fphi, fi, wphi, wi, 1)
        level = fi + wi
        t_up = np.where((t_up == 0) & (level > upper), m, t_up)
        t_down = np.where((t_down == 0) & (level < lower), m, t_down)
        if np.all((t_up > 0) & (t_down > 0)):
            break
    return t_up, t_down


def eval_lift(family, point: PlanePoint, n: int = 1) -> PlanePoint:
    """Apply the lift n times to one plane point (n < 0 for the inverse)."""
    fphi, wphi = frac_split(point.phi)
    fi, wi = frac_split(point.i)
    a = np.array([fphi]); b = np.array([fi])
    c = np.array([wphi]); d = np.array([wi])
    a, b, c, d = advance_state(family, a, b, c, d, n)
    phi = float(a[0] + c[0])
    i = float(b[0] + d[0])
    if not (math.isfinite(phi) and math.isfinite(i)) or max(abs(phi), abs(i)) > DIVERGENCE_CAP:
        raise DivergenceError(
            "orbit diverged after %d steps from (%.6g, %.6g)" % (n, point.phi, point.i),
            partial=(phi, i))
    return PlanePoint(phi, i)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureReport:
    """Grid-sampled structural constants of a family.

    ``deviation_angle`` is None when the cone condition on the vertical
    fails somewhere on the grid (the map is then not uniformly tilting
    verticals off themselves, at least not visibly at this resolution).
    """

    min_twist: float
    max_dphi: float
    drop_bound: float
    deviation_angle: Optional[float]
    periodicity_residual: float
    inverse_residual: float
    n_grid: int

    def ok(self, twist_floor: float = 0.0, residual_tol: float = 1e-9) -> bool:
        return (self.min_twist > twist_floor
                and self.periodicity_residual < residual_tol
                and self.inverse_residual < residual_tol)


def check_structure(family: TwistFamily, n_grid: int = 64) -> StructureReport:
    """Sample the fundamental square and report twist/periodicity diagnostics."""
    if n_grid < 2:
        raise ParameterError("check_structure: n_grid must be >= 2")
    g = np.linspace(0.0, 1.0, n_grid + 1)
    phi, i = np.meshgrid(g, g, indexing="ij")
    phi = phi.ravel()
    i = i.ravel()

    a, b, c, d = (np.broadcast_to(np.asarray(e, dtype=np.float64), phi.shape)
                  for e in jac_at(family, phi, i))
    for e in (a, b, c, d):
        if not np.all(np.isfinite(e)):
            raise NumericalError("check_structure: non-finite Jacobian entries")

    min_twist = float(np.min(b))
    max_dphi = float(np.max(np.abs(a)))

    p1, p2 = family.forward(phi, i)
    drop = float(np.max(i - p2))
    drop_bound = max(0.0, drop)

    det = a * d - b * c
    if np.all(b > 0.0) and np.all(det > 0.0):
        # Forward image of the vertical is (b, d); backward image is
        # (-b, a)/det.  Both stay a bounded angle away from the vertical
        # when these cotangents are finite.
        cot = max(float(np.max(np.abs(d) / b)), float(np.max(np.abs(a) / b)))
        deviation_angle = math.atan2(1.0, cot)
    else:
        deviation_angle = None

    q1, q2 = family.forward(phi + 1.0, i)
    r1, r2 = family.forward(phi, i + 1.0)
    periodicity_residual = float(max(
        np.max(np.abs(q1 - (p1 + 1.0))),
        np.max(np.abs(q2 - p2)),
        np.max(np.abs(r1 - (p1 + 1.0))),
        np.max(np.abs(r2 - (p2 + 1.0))),
    ))

    b1, b2 = family.inverse(p1, p2)
    inverse_residual = float(max(np.max(np.abs(b1 - phi)), np.max(np.abs(b2 - i))))

    return StructureReport(
        min_twist=min_twist,
        max_dphi=max_dphi,
        drop_bound=drop_bound,
        deviation_angle=deviation_angle,
        periodicity_residual=periodicity_residual,
        inverse_residual=inverse_residual,
        n_grid=n_grid,
    )


@lru_cache(maxsize=128)
def _cached_structure(family: TwistFamily, n_grid: int) -> StructureReport:
    return check_structure(family, n_grid)


def drop_bound(family: TwistFamily) -> float:
    """Cached bound a >= max(I - I' ) used to size action brackets."""
    return _cached_structure(family, 32).drop_bound


# ---------------------------------------------------------------------------
# exactness (net flux through a loop)
# ---------------------------------------------------------------------------

def check_exactness(family: TwistFamily, circle=0.0, n_quad: int = 2048) -> float:
    """Net flux of the preserved measure through a homotopically nontrivial loop.

    ``circle`` describes a graph loop I = psi(phi): a constant, a callable,
    or a (psi, dpsi) pair.  Returns the signed measure difference between the
    region below the image loop and below the original; zero (to quadrature
    accuracy) iff the family is exact.  Requires the family to declare the
    antiderivative of its preserved density.  Raises
    :class:`NonGraphImageError` when the image fails to be a graph over phi
    at the sampled resolution.
    """
    if family.exactness_primitive is None:
        raise ParameterError(
            "check_exactness: family %r declares no preserved-density "
            "antiderivative" % family.name)
    if n_quad < 2 or n_quad % 2:
        raise ParameterError("check_exactness: n_quad must be even and >= 2")

    psi, dpsi = _as_graph_loop(circle)
    x = np.linspace(0.0, 1.0, n_quad + 1)
    y = np.broadcast_to(np.asarray(psi(x), dtype=np.float64), x.shape)
    if abs(float(y[-1] - y[0])) > 1e-9:
        raise ParameterError("check_exactness: loop is not closed (psi(1) != psi(0))")
    if dpsi is None:
        dy = _periodic_gradient(y[:-1])
        dy = np.concatenate([dy, dy[:1]])
    else:
        dy = np.broadcast_to(np.asarray(dpsi(x), dtype=np.float64), x.shape)

    p1, p2 = family.forward(x, y)
    if np.any(np.diff(p1) <= 0.0):
        raise NonGraphImageError(
            "image of the loop is not a graph over the angle; refine the "
            "sampling or choose a flatter loop")

    a, b, _, _ = jac_at(family, x, y)
    dphi1 = a + b * dy  # d phi' / d phi along the loop

    prim = family.exactness_primitive
    integrand = np.asarray(prim(p2), dtype=np.float64) * dphi1 \
        - np.asarray(prim(y), dtype=np.float64)

    h = 1.0 / n_quad
    w = np.ones(n_quad + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(w, integrand))


def _as_graph_loop(circle):
    if callable(circle):
        return circle, None
    if isinstance(circle, tuple) and len(circle) == 2 and callable(circle[0]):
        return circle[0], circle[1]
    level = float(circle)
    return (lambda x: np.full_like(np.asarray(x, dtype=np.float64), level),
            lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)))


def _periodic_gradient(y):
    n = y.size
    h = 1.0 / n
    return (np.roll(y, -1) - np.roll(y, 1)) / (2.0 * h)
