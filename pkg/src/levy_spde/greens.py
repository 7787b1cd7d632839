"""Fundamental solutions, bump test functions and the convolution ``phi * rho_check``.

Kernels
-------
* heat, ``(4 pi t)^(-d/2) exp(-|x|^2 / 4t)`` for ``t > 0``;
* wave, ``1/2`` on ``|x| <= t`` (d = 1) and ``1 / (2 pi sqrt(t^2 - |x|^2))``
  on ``|x| < t`` (d = 2); d >= 3 is catalogued but not evaluable;
* Poisson, ``|x|/2`` (d = 1), ``ln(1/|x|) / (2 pi)`` (d = 2) and
  ``|x|^(2-d) / C_d`` with ``C_d = 2 pi^(d/2) (d-2) / Gamma(d/2)``.

Singular loci (the wave d = 2 light cone and the Poisson origin) evaluate to
``inf``, never to a large finite number.

Convolutions ``(phi * rho_check)(p) = int rho(o) phi(p + o) do`` are computed
in coordinates built around the kernel singularity (parabolic for heat,
light-cone polar for wave, spherical for Poisson). In those charts
``rho * Jacobian`` is bounded, so the batched adaptive cubature converges at
its normal rate, and every coordinate range is clipped to the support of phi.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np
from scipy import integrate

from .errors import ParameterError, UnsupportedEvaluation
from .quadrature import adaptive_cubature

_EPS = np.finfo(float).eps
# exp(-w^2/4) < exp(-40) beyond this parabolic radius
HEAT_W_MAX = 2.0 * math.sqrt(40.0)


class Operator(str, enum.Enum):
    HEAT = "heat"
    WAVE = "wave"
    POISSON = "poisson"


def sphere_area(d):
    """Surface area of the unit sphere in R^d (``|S^(d-1)|``)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def poisson_constant(d):
    """``C_d = 2 pi^(d/2) (d-2) / Gamma(d/2)`` for d >= 3."""
    return 2.0 * math.pi ** (d / 2.0) * (d - 2) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class GreenFunction:
    """Catalogue entry ``(operator, spatial dimension)``.

    Heat and wave kernels live on ``R_+ x R^d`` (points are ``(t, x)``),
    Poisson kernels on ``R^d``.
    """

    operator: Operator
    dim: int

    def __post_init__(self):
        try:
            op = Operator(self.operator)
        except ValueError:
            raise ParameterError(f"unknown operator {self.operator!r}") from None
        if int(self.dim) < 1:
            raise ParameterError("dim must be >= 1")
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def space_time(self):
        return self.operator is not Operator.POISSON

    @property
    def ndim(self):
        """Number of coordinates of a point (``d + 1`` for heat/wave)."""
        return self.dim + 1 if self.space_time else self.dim

    @property
    def pointwise(self):
        return not (self.operator is Operator.WAVE and self.dim >= 3)

    @property
    def id(self):
        return f"{self.operator.value}-d{self.dim}"

    def __call__(self, points):
        return eval_green(self, points)

    def to_dict(self):
        return {"operator": self.operator.value, "dim": self.dim}

    @classmethod
    def from_dict(cls, data):
        return cls(Operator(data["operator"]), int(data["dim"]))


def _as_points(points, ndim):
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    if p.shape[-1] != ndim:
        raise ParameterError(f"points must have {ndim} coordinates, got {p.shape[-1]}")
    return p, single


def eval_green(g, point):
    """Evaluate the kernel at one point or an (N, ndim) batch.

    Returns 0 outside the support and ``inf`` on singular loci.
    """
    if not g.pointwise:
        raise UnsupportedEvaluation(
            f"the wave kernel in dimension {g.dim} is not a function and cannot be evaluated")
    p, single = _as_points(point, g.ndim)
    if not np.all(np.isfinite(p)):
        raise ParameterError("points must be finite")
    d = g.dim
    if g.operator is Operator.HEAT:
        t = p[:, 0]
        r2 = np.sum(p[:, 1:] ** 2, axis=1)
        pos = t > 0
        ts = np.where(pos, t, 1.0)
        val = np.where(pos, (4.0 * np.pi * ts) ** (-d / 2.0) * np.exp(-r2 / (4.0 * ts)), 0.0)
    elif g.operator is Operator.WAVE:
        t = p[:, 0]
        r = np.sqrt(np.sum(p[:, 1:] ** 2, axis=1))
        if d == 1:
            val = np.where(r <= t, 0.5, 0.0)
        else:
            gap = t - r
            thresh = 8.0 * _EPS * np.abs(t)
            singular = (t >= 0) & (np.abs(gap) <= thresh)
            inside = gap > thresh
            prod = np.where(inside, gap * (t + r), 1.0)
            val = np.where(inside, 1.0 / (2.0 * np.pi * np.sqrt(prod)), 0.0)
            val = np.where(singular, np.inf, val)
    else:
        r = np.sqrt(np.sum(p ** 2, axis=1))
        if d == 1:
            val = 0.5 * r
        else:
            zero = r == 0.0
            rs = np.where(zero, 1.0, r)
            if d == 2:
                val = -np.log(rs) / (2.0 * np.pi)
            else:
                val = rs ** (2.0 - d) / poisson_constant(d)
            val = np.where(zero, np.inf, val)
    return float(val[0]) if single else val


def in_support(g, point):
    """Support predicate of the kernel (boolean array or bool)."""
    p, single = _as_points(point, g.ndim)
    if g.operator is Operator.HEAT:
        m = p[:, 0] > 0
    elif g.operator is Operator.WAVE:
        r = np.sqrt(np.sum(p[:, 1:] ** 2, axis=1))
        m = r <= p[:, 0] if g.dim == 1 else r < p[:, 0]
    else:
        m = np.ones(len(p), bool) if g.dim == 1 else np.any(p != 0, axis=1)
    return bool(m[0]) if single else m


# --- test functions ---------------------------------------------------------

def _bump_radial_integral(n):
    """``int_0^1 r^(n-1) exp(-1/(1-r^2)) dr``."""
    val, _ = integrate.quad(lambda r: r ** (n - 1) * math.exp(-1.0 / (1.0 - r * r)) if r < 1 else 0.0,
                            0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


@dataclass(frozen=True)
class TestFunction:
    """Smooth bump ``A exp(-1 / (1 - r^2))`` on the ellipsoid ``r < 1``.

    ``r^2 = sum(((x_i - center_i) / radii_i)^2)``; the function is exactly zero
    for ``r >= 1``.
    """

    __test__ = False  # keep pytest from collecting this class

    center: tuple
    radii: tuple
    amplitude: float = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        r = tuple(float(v) for v in np.atleast_1d(self.radii))
        if len(c) != len(r):
            raise ParameterError("center and radii must have equal length")
        if any(not (v > 0 and math.isfinite(v)) for v in r):
            raise ParameterError("radii must be positive and finite")
        if not all(math.isfinite(v) for v in c) or not math.isfinite(float(self.amplitude)):
            raise ParameterError("center and amplitude must be finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @property
    def ndim(self):
        return len(self.center)

    @property
    def terms(self):
        return ((1.0, self),)

    def __call__(self, points):
        return eval_test(self, points)

    def support_box(self):
        c, r = np.array(self.center), np.array(self.radii)
        return c - r, c + r

    def isotropic_from(self, start):
        """True when ``radii[start:]`` are all equal."""
        rest = self.radii[start:]
        return len(rest) > 0 and all(v == rest[0] for v in rest)

    def abs(self):
        return TestFunction(self.center, self.radii, abs(self.amplitude))

    def mass(self):
        return eval_test_mass(self)

    def first_moment(self):
        """``int y phi(y) dy`` (the bump is symmetric about its center)."""
        return np.array(self.center) * self.mass()

    def sup_norm(self):
        return abs(self.amplitude) * math.exp(-1.0)

    def __mul__(self, a):
        return TestFunction(self.center, self.radii, self.amplitude * float(a))

    __rmul__ = __mul__

    def __add__(self, other):
        return TestFunctionSum(self.terms + other.terms)

    def to_dict(self):
        return {"center": list(self.center), "radii": list(self.radii), "amplitude": self.amplitude}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["center"]), tuple(data["radii"]), float(data.get("amplitude", 1.0)))


@dataclass(frozen=True)
class TestFunctionSum:
    """Finite linear combination of bumps; convolutions are taken termwise."""

    __test__ = False

    terms: tuple

    @property
    def ndim(self):
        return self.terms[0][1].ndim

    def __call__(self, points):
        return sum(a * eval_test(phi, points) for a, phi in self.terms)

    def __mul__(self, a):
        return TestFunctionSum(tuple((c * float(a), phi) for c, phi in self.terms))

    __rmul__ = __mul__

    def __add__(self, other):
        return TestFunctionSum(self.terms + other.terms)


def eval_test(phi, point):
    p, single = _as_points(point, phi.ndim)
    r2 = np.sum(((p - np.array(phi.center)) / np.array(phi.radii)) ** 2, axis=1)
    inside = r2 < 1.0
    val = np.where(inside, phi.amplitude * np.exp(-1.0 / (1.0 - np.where(inside, r2, 0.0))), 0.0)
    return float(val[0]) if single else val


def eval_test_mass(phi):
    """``int phi``: a 1-D radial quadrature (relative accuracy well below 1e-8)."""
    n = phi.ndim
    return phi.amplitude * math.prod(phi.radii) * sphere_area(n) * _bump_radial_integral(n)


def rescale(phi, n, t):
    """Mollifier ``phi_n^t(x) = n^D phi(n (x - t))`` with ``D = phi.ndim``."""
    n = float(n)
    if not n > 0:
        raise ParameterError("scale n must be positive")
    t = np.broadcast_to(np.asarray(t, dtype=float), (phi.ndim,))
    center = tuple(t + np.array(phi.center) / n)
    radii = tuple(np.array(phi.radii) / n)
    return TestFunction(center, radii, phi.amplitude * n ** phi.ndim)


# --- convolution charts -----------------------------------------------------

def _frames(e):
    """Orthogonal matrices (T, d, d) whose first column is the unit vector ``e``."""
    T, d = e.shape
    e1 = np.zeros(d)
    e1[0] = 1.0
    v = e - e1
    nv = np.sum(v * v, axis=1)
    small = nv < 1e-24
    nv = np.where(small, 1.0, nv)
    H = np.eye(d)[None] - 2.0 * v[:, :, None] * v[:, None, :] / nv[:, None, None]
    H[small] = np.eye(d)
    return H


def _direction(delta):
    D = np.sqrt(np.sum(delta * delta, axis=1))
    e = np.zeros_like(delta)
    e[:, 0] = 1.0
    ok = D > 0
    e[ok] = delta[ok] / D[ok, None]
    return D, e


def _aperture(D, R):
    """Half-angle of the cone from the target that contains the ball B(c, R)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        half = np.where(D > R, np.arcsin(np.clip(R / np.where(D > 0, D, 1.0), 0.0, 1.0)), np.pi)
    return half


class _Chart:
    """Per-target chart parameters plus the integrand on the unit cube."""

    dim = 1

    def boxes(self):
        idx = np.flatnonzero(self.active)
        lo = np.zeros((len(idx), self.dim))
        hi = np.ones((len(idx), self.dim))
        return lo, hi, idx


class _HeatCartesian(_Chart):
    """``o = (sigma^2, sigma w)`` with Cartesian ``w``, clipped to supp(phi)."""

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        d = g.dim
        self.dim = 1 + d
        lo, hi = phi.support_box()
        t = pts[:, 0]
        tau_lo = np.maximum(0.0, lo[0] - t)
        tau_hi = hi[0] - t
        self.active = tau_hi > tau_lo
        self.s_lo = np.sqrt(tau_lo)
        self.s_hi = np.sqrt(np.maximum(tau_hi, tau_lo))
        self.a = lo[1:][None, :] - pts[:, 1:]
        self.b = hi[1:][None, :] - pts[:, 1:]

    def __call__(self, v, own):
        d = self.g.dim
        s_lo, s_hi = self.s_lo[own], self.s_hi[own]
        sig = s_lo + (s_hi - s_lo) * v[:, 0]
        jac = (s_hi - s_lo) * 2.0 * sig ** (d + 1)
        wl = np.clip(self.a[own] / sig[:, None], -HEAT_W_MAX, HEAT_W_MAX)
        wh = np.clip(self.b[own] / sig[:, None], -HEAT_W_MAX, HEAT_W_MAX)
        span = np.maximum(wh - wl, 0.0)
        w = wl + span * v[:, 1:]
        jac = jac * np.prod(span, axis=1)
        o = np.column_stack([sig ** 2, sig[:, None] * w])
        return eval_green(self.g, o) * jac * self.phi(self.p[own] + o)


class _HeatRadial(_Chart):
    """``o = (sigma^2, sigma q (cos psi e + sin psi e_perp))``, phi isotropic in space."""

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        self.dim = 3
        lo, hi = phi.support_box()
        t = pts[:, 0]
        tau_lo = np.maximum(0.0, lo[0] - t)
        tau_hi = hi[0] - t
        self.active = tau_hi > tau_lo
        self.s_lo = np.sqrt(tau_lo)
        self.s_hi = np.sqrt(np.maximum(tau_hi, tau_lo))
        self.R = phi.radii[1]
        self.D, e = _direction(np.array(phi.center[1:])[None, :] - pts[:, 1:])
        F = _frames(e)
        self.e, self.eperp = F[:, :, 0], F[:, :, 1]
        self.psi_max = _aperture(self.D, self.R)
        self.sphere = sphere_area(g.dim - 1)

    def __call__(self, v, own):
        d = self.g.dim
        s_lo, s_hi = self.s_lo[own], self.s_hi[own]
        sig = s_lo + (s_hi - s_lo) * v[:, 0]
        D = self.D[own]
        ql = np.clip((D - self.R) / sig, 0.0, HEAT_W_MAX)
        qh = np.clip((D + self.R) / sig, 0.0, HEAT_W_MAX)
        q = ql + (qh - ql) * v[:, 1]
        pm = self.psi_max[own]
        psi = pm * v[:, 2]
        jac = ((s_hi - s_lo) * (qh - ql) * pm * 2.0 * sig ** (d + 1)
               * self.sphere * q ** (d - 1) * np.sin(psi) ** (d - 2))
        w = q[:, None] * (np.cos(psi)[:, None] * self.e[own] + np.sin(psi)[:, None] * self.eperp[own])
        o = np.column_stack([sig ** 2, sig[:, None] * w])
        return eval_green(self.g, o) * jac * self.phi(self.p[own] + o)


class _Wave1(_Chart):
    """``o = (tau, tau u)`` with ``|u| <= 1``."""

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        self.dim = 2
        lo, hi = phi.support_box()
        t, x = pts[:, 0], pts[:, 1]
        self.t_lo = np.maximum(0.0, lo[0] - t)
        self.t_hi = hi[0] - t
        self.a, self.b = lo[1] - x, hi[1] - x
        reach = np.maximum(np.abs(self.a), np.abs(self.b))
        near = np.minimum(np.abs(self.a), np.abs(self.b))
        near = np.where((self.a <= 0) & (self.b >= 0), 0.0, near)
        self.active = (self.t_hi > self.t_lo) & (near < self.t_hi) & (reach > 0)

    def __call__(self, v, own):
        tl, th = self.t_lo[own], self.t_hi[own]
        tau = tl + (th - tl) * v[:, 0]
        ul = np.clip(self.a[own] / tau, -1.0, 1.0)
        uh = np.clip(self.b[own] / tau, -1.0, 1.0)
        u = ul + (uh - ul) * v[:, 1]
        jac = (th - tl) * (uh - ul) * tau
        o = np.column_stack([tau, tau * u])
        return eval_green(self.g, o) * jac * self.phi(self.p[own] + o)


class _Wave2(_Chart):
    """``o = (tau, tau sin(beta) (cos theta, sin theta))``, beta in [0, pi/2)."""

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        self.dim = 3
        lo, hi = phi.support_box()
        t = pts[:, 0]
        self.t_lo = np.maximum(0.0, lo[0] - t)
        self.t_hi = hi[0] - t
        delta = np.array(phi.center[1:])[None, :] - pts[:, 1:]
        self.D = np.sqrt(np.sum(delta ** 2, axis=1))
        self.th_c = np.arctan2(delta[:, 1], delta[:, 0])
        self.R = max(phi.radii[1:])
        self.half = _aperture(self.D, self.R)
        self.active = (self.t_hi > self.t_lo) & (self.D - self.R < self.t_hi)

    def __call__(self, v, own):
        tl, th = self.t_lo[own], self.t_hi[own]
        tau = tl + (th - tl) * v[:, 0]
        D = self.D[own]
        bl = np.arcsin(np.clip((D - self.R) / tau, 0.0, 1.0))
        bh = np.arcsin(np.clip((D + self.R) / tau, 0.0, 1.0))
        beta = bl + (bh - bl) * v[:, 1]
        half = self.half[own]
        theta = self.th_c[own] + half * (2.0 * v[:, 2] - 1.0)
        sb = np.sin(beta)
        jac = (th - tl) * (bh - bl) * 2.0 * half * tau ** 2 * sb * np.cos(beta)
        o = np.column_stack([tau, tau * sb * np.cos(theta), tau * sb * np.sin(theta)])
        rho = eval_green(self.g, o)
        rho = np.where(jac > 0, rho, 0.0)
        return rho * jac * self.phi(self.p[own] + o)


class _Poisson1(_Chart):
    """Line integral over ``[a - x, b - x]`` with a break at the kink ``o = 0``."""

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        self.dim = 1
        lo, hi = phi.support_box()
        self.a = lo[0] - pts[:, 0]
        self.b = hi[0] - pts[:, 0]
        self.active = np.ones(len(pts), bool)

    def boxes(self):
        n = len(self.p)
        cut = -self.a / (self.b - self.a)
        split = (cut > 0) & (cut < 1)
        lo = [np.zeros(n)]
        hi = [np.where(split, cut, 1.0)]
        own = [np.arange(n)]
        idx = np.flatnonzero(split)
        lo.append(cut[idx])
        hi.append(np.ones(len(idx)))
        own.append(idx)
        return np.concatenate(lo)[:, None], np.concatenate(hi)[:, None], np.concatenate(own)

    def __call__(self, v, own):
        a, b = self.a[own], self.b[own]
        o = (a + (b - a) * v[:, 0])[:, None]
        return eval_green(self.g, o) * (b - a) * self.phi(self.p[own] + o)


class _PoissonPolar(_Chart):
    """Polar coordinates around the target (d = 2)."""

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        self.dim = 2
        delta = np.array(phi.center)[None, :] - pts
        self.D = np.sqrt(np.sum(delta ** 2, axis=1))
        self.th_c = np.arctan2(delta[:, 1], delta[:, 0])
        self.R = max(phi.radii)
        self.half = _aperture(self.D, self.R)
        self.r_lo = np.maximum(0.0, self.D - self.R)
        self.r_hi = self.D + self.R
        self.active = np.ones(len(pts), bool)

    def __call__(self, v, own):
        rl, rh = self.r_lo[own], self.r_hi[own]
        r = rl + (rh - rl) * v[:, 0]
        half = self.half[own]
        theta = self.th_c[own] + half * (2.0 * v[:, 1] - 1.0)
        jac = (rh - rl) * 2.0 * half * r
        o = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        rho = np.where(r > 0, eval_green(self.g, np.where(r[:, None] > 0, o, 1.0)), 0.0)
        return rho * jac * self.phi(self.p[own] + o)


class _PoissonSpherical(_Chart):
    """Spherical coordinates around the target with the pole toward phi's center (d >= 3).

    With an isotropic phi only ``(r, psi)`` are integrated; otherwise the full
    set ``(r, psi_1, ..., psi_{d-2}, theta)``.
    """

    def __init__(self, phi, g, pts):
        self.phi, self.g, self.p = phi, g, pts
        d = g.dim
        self.iso = phi.isotropic_from(0)
        self.dim = 2 if self.iso else d
        self.D, e = _direction(np.array(phi.center)[None, :] - pts)
        self.F = _frames(e)
        self.R = max(phi.radii)
        self.psi_max = _aperture(self.D, self.R)
        self.r_lo = np.maximum(0.0, self.D - self.R)
        self.r_hi = self.D + self.R
        self.active = np.ones(len(pts), bool)
        self.sphere = sphere_area(d - 1)

    def __call__(self, v, own):
        d = self.g.dim
        rl, rh = self.r_lo[own], self.r_hi[own]
        r = rl + (rh - rl) * v[:, 0]
        pm = self.psi_max[own]
        psi1 = pm * v[:, 1]
        jac = (rh - rl) * pm * r ** (d - 1) * np.sin(psi1) ** (d - 2)
        F = self.F[own]
        if self.iso:
            jac = jac * self.sphere
            omega = np.cos(psi1)[:, None] * F[:, :, 0] + np.sin(psi1)[:, None] * F[:, :, 1]
        else:
            coords = np.empty((len(r), d))
            coords[:, 0] = np.cos(psi1)
            run = np.sin(psi1)
            for k in range(2, d - 1):
                psi = np.pi * v[:, k]
                jac = jac * np.pi * np.sin(psi) ** (d - 1 - k)
                coords[:, k - 1] = run * np.cos(psi)
                run = run * np.sin(psi)
            theta = 2.0 * np.pi * v[:, d - 1]
            jac = jac * 2.0 * np.pi
            coords[:, d - 2] = run * np.cos(theta)
            coords[:, d - 1] = run * np.sin(theta)
            omega = np.einsum("tij,tj->ti", F, coords)
        o = r[:, None] * omega
        # rho * r^(d-1) is bounded; evaluate rho away from r = 0 only
        safe = r > 0
        rho = np.where(safe, eval_green(self.g, np.where(safe[:, None], o, 1.0)), 0.0)
        return rho * jac * self.phi(self.p[own] + o)


def _chart_for(phi, g, pts):
    d = g.dim
    if g.operator is Operator.HEAT:
        if d >= 2 and phi.isotropic_from(1):
            return _HeatRadial(phi, g, pts)
        return _HeatCartesian(phi, g, pts)
    if g.operator is Operator.WAVE:
        return _Wave1(phi, g, pts) if d == 1 else _Wave2(phi, g, pts)
    if d == 1:
        return _Poisson1(phi, g, pts)
    if d == 2:
        return _PoissonPolar(phi, g, pts)
    return _PoissonSpherical(phi, g, pts)


POINT_CHUNK = 2048


def convolve_batch(phi, g, points, rtol=1e-6, atol=None, order=5, max_rounds=60,
                   return_error=False):
    """Evaluate ``(phi * rho_check)`` at an (N, ndim) batch of points.

    Parameters
    ----------
    phi : TestFunction or TestFunctionSum
    g : GreenFunction
    points : array_like, shape (N, ndim)
    rtol, atol : float
        Per-point tolerances of the adaptive cubature. ``atol`` defaults to a
        tiny multiple of ``|A| * prod(radii)`` so that points where the
        convolution is negligibly small terminate.

    Returns
    -------
    values : ndarray (N,)
    errors : ndarray (N,), only if ``return_error``

    Raises
    ------
    AccuracyError
        if some point does not reach the tolerance; the exception carries the
        best estimates and error bounds.
    """
    if not g.pointwise:
        raise UnsupportedEvaluation(f"no pointwise kernel for {g.id}")
    pts, _ = _as_points(points, g.ndim)
    if phi.ndim != g.ndim:
        raise ParameterError(f"test function has {phi.ndim} coordinates, kernel needs {g.ndim}")
    if len(pts) > POINT_CHUNK:
        parts = [convolve_batch(phi, g, pts[i:i + POINT_CHUNK], rtol, atol, order, max_rounds, True)
                 for i in range(0, len(pts), POINT_CHUNK)]
        total = np.concatenate([p[0] for p in parts])
        err = np.concatenate([p[1] for p in parts])
        return (total, err) if return_error else total
    total = np.zeros(len(pts))
    err = np.zeros(len(pts))
    for coef, term in phi.terms:
        if term.amplitude == 0.0 or coef == 0.0:
            continue
        chart = _chart_for(term, g, pts)
        lo, hi, owner = chart.boxes()
        if len(owner) == 0:
            continue
        tol_abs = atol if atol is not None else 1e-14 * abs(term.amplitude) * math.prod(term.radii)
        res = adaptive_cubature(chart, lo, hi, owner=owner, n_targets=len(pts), rtol=rtol,
                                atol=tol_abs, order=order, max_rounds=max_rounds)
        total += coef * res.value
        err += abs(coef) * res.error
    if return_error:
        return total, err
    return total


def convolve_check(phi, g, point, rtol=1e-6, atol=None, **kw):
    """``(phi * rho_check)(point)``; scalar for a single point, array for a batch."""
    p = np.asarray(point, dtype=float)
    val = convolve_batch(phi, g, np.atleast_2d(p), rtol=rtol, atol=atol, **kw)
    return float(val[0]) if p.ndim == 1 else val
