"""Symmetric alpha-stable and compound-Poisson space-time white noise.

Stable increments come from the Chambers-Mallows-Stuck transform of a
uniform angle and a unit exponential. Both variates are produced by a
counter-based Philox generator keyed by ``(seed, cell index)``, so any cell of
any realization can be regenerated on its own and batches over seeds or cells
agree bit for bit with one-at-a-time generation.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._philox import uniform_pairs
from .errors import NumericalDomainError, ParameterError, ResourceError

MAX_CELLS = 2 ** 31


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ParameterError("seed must lie in [0, 2**64)")
    return seed


def _check_alpha(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    return alpha


@dataclass(frozen=True)
class StableParams:
    """Stability index and scale of a symmetric stable law.

    The characteristic function is ``exp(-scale**alpha * |u|**alpha)``.
    """

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        scale = float(self.scale)
        if not (scale >= 0.0 and math.isfinite(scale)):
            raise ParameterError(f"scale must be finite and >= 0, got {self.scale}")
        object.__setattr__(self, "scale", scale)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(-(self.scale ** self.alpha) * np.abs(u) ** self.alpha)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box ``origin + [0, extent]`` split into ``cells`` per axis."""

    dim: int
    origin: tuple
    extent: tuple
    cells: tuple

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise ParameterError("dim must be >= 1")
        origin = tuple(float(v) for v in np.atleast_1d(self.origin))
        extent = tuple(float(v) for v in np.atleast_1d(self.extent))
        cells = tuple(int(v) for v in np.atleast_1d(self.cells))
        if not (len(origin) == len(extent) == len(cells) == dim):
            raise ParameterError("origin, extent and cells must all have length dim")
        if not all(math.isfinite(v) for v in origin + extent):
            raise ParameterError("origin and extent must be finite")
        if any(e <= 0 for e in extent):
            raise ParameterError("extent entries must be positive")
        if any(c <= 0 for c in cells):
            raise ParameterError("cell counts must be positive")
        if math.prod(cells) > MAX_CELLS:
            raise ResourceError(f"{math.prod(cells)} cells exceeds the limit of {MAX_CELLS}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "cells", cells)

    @property
    def n_cells(self):
        return math.prod(self.cells)

    @property
    def widths(self):
        return np.array(self.extent) / np.array(self.cells)

    @property
    def cell_volume(self):
        return float(np.prod(self.widths))

    @property
    def volume(self):
        return float(np.prod(self.extent))

    def axis_midpoints(self, axis):
        h = self.extent[axis] / self.cells[axis]
        return self.origin[axis] + h * (np.arange(self.cells[axis]) + 0.5)

    def cell_indices(self):
        """Integer index vectors of all cells, C order, shape (n_cells, dim)."""
        grids = np.indices(self.cells).reshape(self.dim, -1)
        return grids.T

    def midpoints(self):
        """Cell midpoints in C order, shape (n_cells, dim)."""
        idx = self.cell_indices()
        return np.array(self.origin) + (idx + 0.5) * self.widths

    def contains(self, points):
        p = np.atleast_2d(points)
        lo = np.array(self.origin)
        hi = lo + np.array(self.extent)
        return np.all((p >= lo) & (p <= hi), axis=1)


def _cms(u1, u2, alpha):
    """Standard SaS variates (CF ``exp(-|u|**alpha)``) from two uniforms."""
    theta = np.pi * (u1 - 0.5)
    w = -np.log(u2)
    if alpha == 2.0:
        return 2.0 * np.sin(theta) * np.sqrt(w)
    if alpha == 1.0:
        return np.tan(theta)
    return (np.sin(alpha * theta) / np.cos(theta) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * theta) / w) ** ((1.0 - alpha) / alpha))


def _standard_stable(alpha, seed, index):
    u1, u2 = uniform_pairs(seed, index)
    return _cms(u1, u2, alpha)


def sample_sas(params, n, seed):
    """Draw ``n`` i.i.d. symmetric stable samples.

    Parameters
    ----------
    params : StableParams
    n : int
    seed : int
        64-bit seed; sample ``k`` depends only on ``(seed, k)``.

    Returns
    -------
    numpy.ndarray of shape (n,)
    """
    if not isinstance(params, StableParams):
        raise ParameterError("params must be a StableParams instance")
    n = int(n)
    if n < 1:
        raise ParameterError("n must be >= 1")
    seed = _check_seed(seed)
    if params.scale == 0.0:
        return np.zeros(n)
    return params.scale * _standard_stable(params.alpha, seed, np.arange(n, dtype=np.uint64))


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """One realization of stable white noise on a grid: one increment per cell."""

    grid: GridSpec
    alpha: float
    increments: np.ndarray
    seed: int

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float)
        if inc.shape != (self.grid.n_cells,):
            raise ParameterError("increments length must equal the grid cell count")
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    def __eq__(self, other):
        return (isinstance(other, NoiseRealization) and self.grid == other.grid
                and self.alpha == other.alpha and self.seed == other.seed
                and np.array_equal(self.increments, other.increments))

    __hash__ = None

    def reshaped(self):
        return self.increments.reshape(self.grid.cells)


def sample_white_noise(grid, alpha, seed):
    """Sample i.i.d. SaS increments with scale ``v**(1/alpha)`` on every cell."""
    alpha = _check_alpha(alpha)
    seed = _check_seed(seed)
    inc = sample_white_noise_batch(grid, alpha, [seed])[0]
    return NoiseRealization(grid, alpha, inc, seed)


def sample_white_noise_batch(grid, alpha, seeds, cells=None):
    """Increments for many seeds at once, shape (len(seeds), n).

    ``cells`` optionally restricts generation to the given flat cell indices;
    each row then equals the matching entries of ``sample_white_noise``.
    """
    alpha = _check_alpha(alpha)
    seeds = np.array([_check_seed(s) for s in seeds], dtype=np.uint64)
    index = (np.arange(grid.n_cells, dtype=np.uint64) if cells is None
             else np.asarray(cells, dtype=np.uint64))
    scale = grid.cell_volume ** (1.0 / alpha)
    return scale * _standard_stable(alpha, seeds[:, None], index[None, :])


def _eval_field(f, points):
    vals = np.asarray(f(points), dtype=float)
    if vals.shape == ():
        vals = np.full(len(points), float(vals))
    vals = vals.reshape(len(points))
    if not np.all(np.isfinite(vals)):
        bad = points[~np.isfinite(vals)][0]
        raise NumericalDomainError(f"integrand is not finite at {bad.tolist()}")
    return vals


def pair_noise(noise, f):
    """Discrete stochastic integral ``sum_cells f(midpoint) * increment``.

    ``f`` receives an (N, dim) array of midpoints and returns N values.
    """
    vals = _eval_field(f, noise.grid.midpoints())
    return float(np.dot(vals, noise.increments))


# --- compound-Poisson noise -------------------------------------------------

@dataclass(frozen=True)
class CompoundPoissonUniform:
    """Jumps uniform on [-a, a] at total rate ``rate``."""

    rate: float
    half_width: float

    def __post_init__(self):
        if not (self.rate > 0 and self.half_width > 0):
            raise ParameterError("rate and half_width must be positive")

    @property
    def total_mass(self):
        return float(self.rate)

    def density(self, z):
        z = np.asarray(z, dtype=float)
        return np.where(np.abs(z) <= self.half_width, self.rate / (2 * self.half_width), 0.0)

    def sample_jumps(self, u, v):
        return self.half_width * (2.0 * u - 1.0)


@dataclass(frozen=True)
class CompoundPoissonTwoPoint:
    """Jumps ``+a`` or ``-a`` with equal probability at total rate ``rate``."""

    rate: float
    magnitude: float

    def __post_init__(self):
        if not (self.rate > 0 and self.magnitude > 0):
            raise ParameterError("rate and magnitude must be positive")

    @property
    def total_mass(self):
        return float(self.rate)

    def sample_jumps(self, u, v):
        return np.where(u < 0.5, -self.magnitude, self.magnitude)


@dataclass(frozen=True)
class TruncatedStable:
    """Stable Levy density ``1/(2|z|**(alpha+1))`` restricted to ``eps <= |z| <= R``."""

    alpha: float
    eps: float
    R: float

    def __post_init__(self):
        if not (0.0 < float(self.alpha) < 2.0):
            raise ParameterError("alpha must lie in (0, 2)")
        if not self.eps > 0:
            raise ParameterError("inner cutoff eps must be > 0 (infinite mass otherwise)")
        if not self.R > self.eps:
            raise ParameterError("outer cutoff R must exceed eps")

    @property
    def total_mass(self):
        a = self.alpha
        return (self.eps ** -a - self.R ** -a) / a

    def density(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        inside = (z >= self.eps) & (z <= self.R)
        return np.where(inside, 0.5 / np.where(inside, z, 1.0) ** (self.alpha + 1), 0.0)

    def magnitude_cdf(self, m):
        a = self.alpha
        m = np.clip(np.asarray(m, dtype=float), self.eps, self.R)
        return (self.eps ** -a - m ** -a) / (self.eps ** -a - self.R ** -a)

    def magnitude_quantile(self, p):
        a = self.alpha
        p = np.asarray(p, dtype=float)
        return (self.eps ** -a - p * (self.eps ** -a - self.R ** -a)) ** (-1.0 / a)

    def sample_jumps(self, u, v):
        return np.where(v < 0.5, -1.0, 1.0) * self.magnitude_quantile(u)


@dataclass(frozen=True)
class LevyMeasureSpec:
    """Finite symmetric Levy measure used for compound-Poisson noise."""

    kind: object

    def __post_init__(self):
        if not isinstance(self.kind, (CompoundPoissonUniform, CompoundPoissonTwoPoint, TruncatedStable)):
            raise ParameterError(f"unsupported Levy measure kind {self.kind!r}")

    @property
    def total_mass(self):
        return self.kind.total_mass

    @classmethod
    def uniform(cls, rate, half_width):
        return cls(CompoundPoissonUniform(rate, half_width))

    @classmethod
    def two_point(cls, rate, magnitude):
        return cls(CompoundPoissonTwoPoint(rate, magnitude))

    @classmethod
    def truncated_stable(cls, alpha, eps, R):
        return cls(TruncatedStable(alpha, eps, R))


@dataclass(frozen=True, eq=False)
class JumpNoise:
    """Points ``(location, jump)`` of a compound-Poisson random measure on a box."""

    domain: GridSpec
    locations: np.ndarray
    jumps: np.ndarray
    seed: int
    measure: LevyMeasureSpec

    @property
    def points(self):
        return list(zip(map(tuple, self.locations), self.jumps.tolist()))

    def __len__(self):
        return len(self.jumps)


_JUMP_STREAM = 0x4A554D50  # separates jump streams from stable-noise streams


def sample_jump_noise(domain, measure, seed):
    """Sample a compound-Poisson point set on the box of ``domain``.

    The count is Poisson with mean ``total_mass * volume``; locations are
    uniform on the box and jumps are i.i.d. from the normalized measure.
    """
    if not isinstance(measure, LevyMeasureSpec):
        raise ParameterError("measure must be a LevyMeasureSpec")
    seed = _check_seed(seed)
    mean = measure.total_mass * domain.volume
    if not math.isfinite(mean):
        raise ParameterError("Levy measure has infinite total mass")
    rng = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, _JUMP_STREAM]))
    count = int(rng.poisson(mean)) if mean > 0 else 0
    lo = np.array(domain.origin)
    locations = lo + rng.random((count, domain.dim)) * np.array(domain.extent)
    u = rng.random(count)
    v = rng.random(count)
    jumps = np.asarray(measure.kind.sample_jumps(u, v), dtype=float).reshape(count)
    locations.setflags(write=False)
    jumps.setflags(write=False)
    return JumpNoise(domain, locations, jumps, seed, measure)


def pair_jump_noise(noise, f):
    """``sum_points f(location) * jump`` (no compensator: the measure is symmetric and finite)."""
    if len(noise) == 0:
        return 0.0
    vals = _eval_field(f, noise.locations)
    return float(np.dot(vals, noise.jumps))
