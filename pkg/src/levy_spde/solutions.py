"""Mild fields, generalized pairings and the discrete Fubini check.

The mild field at ``p`` is the discrete stochastic integral
``sum_i rho(p - m_i) X_i`` over noise cells with midpoints ``m_i``; the
generalized pairing is ``sum_i (phi * rho_check)(m_i) X_i``.

Cell weights follow two rules:

* a midpoint lag that lands exactly on the singular set of ``rho`` is replaced
  by the midpoint of the lower half of the cell (in time);
* for the wave kernel in d = 2, cells straddling the light cone ``|x| = t``
  are averaged over a 4-per-axis sub-grid of midpoints.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, RefusedError, UnsupportedEvaluation, UnsupportedRefusal
from .greens import (Operator, TestFunction, TestFunctionSum, convolve_batch, eval_green,
                     eval_test_mass, rescale)
from .norms import existence_verdict

CONE_SUBDIVISION = 4
_CHUNK_ENTRIES = 2_000_000


def grid_id(grid):
    """Compact text id of a grid."""
    fmt = lambda v: ",".join(f"{x:.17g}" for x in v)
    return f"d{grid.dim}:o={fmt(grid.origin)}:e={fmt(grid.extent)}:c={','.join(map(str, grid.cells))}"


@dataclass
class Field:
    """Values of a random field at evaluation points."""

    eval_points: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eval_points = np.atleast_2d(np.asarray(self.eval_points, dtype=float))
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(self.values) != len(self.eval_points):
            raise ParameterError("eval_points and values must have the same length")

    def __len__(self):
        return len(self.values)


@dataclass
class FubiniReport:
    """Both sides of the Fubini identity for one noise realization.

    In refinement mode ``lhs``/``rhs`` are the finest-level values and
    ``level_diffs`` holds ``|lhs - rhs|`` per level.
    """

    lhs: float
    rhs: float
    abs_diff: float
    shared_grid: bool
    passed: bool
    level_diffs: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def mode(self):
        return "shared" if self.shared_grid else "refine"

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "abs_diff": self.abs_diff,
                "shared_grid": self.shared_grid, "mode": self.mode, "passed": self.passed,
                "level_diffs": list(self.level_diffs), "provenance": self.provenance}


# --- verdict gates ------------------------------------------------------------

def _check_grid(g, grid):
    if grid.dim != g.ndim:
        raise ParameterError(f"noise grid has dimension {grid.dim}, {g.id} needs {g.ndim}")


def _require_mild(g, alpha):
    verdict = existence_verdict(g.operator, g.dim, alpha)
    if verdict.mild_exists:
        return verdict
    if g.operator is Operator.WAVE and g.dim >= 3:
        raise UnsupportedRefusal(verdict.explain())
    raise RefusedError(verdict.explain())


def _require_generalized(g, alpha):
    verdict = existence_verdict(g.operator, g.dim, alpha)
    if not verdict.generalized_exists:
        raise RefusedError(verdict.explain())
    if not g.pointwise:
        raise UnsupportedEvaluation(f"no pointwise kernel for {g.id}")
    return verdict


# --- cell weights of the mild field ------------------------------------------

def _cone_straddle(lag, half):
    """Cells whose lag box ``lag +- half`` meets the cone ``|x| = t``, t > 0."""
    tau = lag[..., 0]
    ax = np.abs(lag[..., 1:])
    r_lo = np.sqrt(np.sum(np.maximum(ax - half[1:], 0.0) ** 2, axis=-1))
    r_hi = np.sqrt(np.sum((ax + half[1:]) ** 2, axis=-1))
    t_lo, t_hi = tau - half[0], tau + half[0]
    return (t_hi > r_lo) & (t_lo < r_hi) & (t_hi > 0)


def _shifted(g, lag, h_t):
    """``rho(lag)``, moving singular lags to the lower half-cell midpoint."""
    vals = eval_green(g, lag)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        moved = lag[bad].copy()
        moved[:, 0] += 0.25 * h_t
        vals[bad] = eval_green(g, moved)
    return vals


def _sub_offsets(widths, n):
    frac = (np.arange(n) + 0.5) / n - 0.5
    grids = np.meshgrid(*[frac * w for w in widths], indexing="ij")
    return np.column_stack([gg.ravel() for gg in grids])


def kernel_matrix(g, grid, eval_points, cells=None):
    """Weights ``K[j, i]`` with ``u(p_j) = sum_i K[j, i] X_i``.

    Parameters
    ----------
    g : GreenFunction
    grid : GridSpec
    eval_points : array_like, shape (N, ndim)
    cells : array of int, optional
        Restrict to these flat cell indices (columns follow this order).
    """
    if not g.pointwise:
        raise UnsupportedEvaluation(f"no pointwise kernel for {g.id}")
    p = np.atleast_2d(np.asarray(eval_points, dtype=float))
    if p.shape[1] != g.ndim:
        raise ParameterError(f"eval points need {g.ndim} coordinates")
    mids = grid.midpoints()
    if cells is not None:
        mids = mids[np.asarray(cells)]
    widths = grid.widths
    h_t = widths[0] if g.space_time else 0.0
    cone = g.operator is Operator.WAVE and g.dim == 2
    sub = _sub_offsets(widths, CONE_SUBDIVISION) if cone else None
    out = np.empty((len(p), len(mids)))
    rows = max(1, _CHUNK_ENTRIES // max(1, len(mids)))
    for s in range(0, len(p), rows):
        blk = p[s:s + rows]
        lag = blk[:, None, :] - mids[None, :, :]
        flat = lag.reshape(-1, g.ndim)
        vals = _shifted(g, flat, h_t)
        if cone:
            hit = np.flatnonzero(_cone_straddle(flat, 0.5 * widths))
            for a in range(0, len(hit), max(1, _CHUNK_ENTRIES // len(sub))):
                idx = hit[a:a + _CHUNK_ENTRIES // len(sub)]
                fine = (flat[idx][:, None, :] - sub[None, :, :]).reshape(-1, g.ndim)
                fv = _shifted(g, fine, h_t / CONE_SUBDIVISION).reshape(len(idx), len(sub))
                vals[idx] = fv.mean(axis=1)
        out[s:s + rows] = vals.reshape(len(blk), len(mids))
    return out


def default_eval_points(grid):
    """Cell midpoints moved half a time-cell forward (onto time-cell faces)."""
    pts = grid.midpoints()
    pts[:, 0] += 0.5 * grid.widths[0]
    return pts


def mild_field(g, noise, eval_points=None):
    """Mild solution ``u(p) = sum_i rho(p - m_i) X_i`` at ``eval_points``.

    Parameters
    ----------
    g : GreenFunction
    noise : NoiseRealization
    eval_points : array_like (N, ndim), optional
        Defaults to :func:`default_eval_points` of the noise grid.

    Returns
    -------
    Field

    Raises
    ------
    RefusedError
        when no mild solution exists for the equation, dimension and alpha
        (wave with d >= 3 raises :class:`UnsupportedRefusal`, which is also an
        :class:`UnsupportedEvaluation`).
    """
    _require_mild(g, noise.alpha)
    _check_grid(g, noise.grid)
    pts = default_eval_points(noise.grid) if eval_points is None else np.atleast_2d(
        np.asarray(eval_points, dtype=float))
    K = kernel_matrix(g, noise.grid, pts)
    values = K @ noise.increments
    prov = {"green": g.id, "seed": int(noise.seed), "grid": grid_id(noise.grid),
            "alpha": float(noise.alpha)}
    return Field(pts, values, prov)


# --- generalized pairings ---------------------------------------------------

def pairing_weights(phi, g, grid, rtol=1e-8):
    """``(phi * rho_check)(m_i)`` at every cell midpoint; reusable across seeds."""
    _check_grid(g, grid)
    return convolve_batch(phi, g, grid.midpoints(), rtol=rtol)


def generalized_pairing(phi, g, noise, rtol=1e-8, weights=None):
    """``<u_gen, phi> = sum_i (phi * rho_check)(m_i) X_i``.

    ``weights`` may carry precomputed :func:`pairing_weights` for this grid.
    """
    _require_generalized(g, noise.alpha)
    _check_grid(g, noise.grid)
    if weights is None:
        weights = pairing_weights(phi, g, noise.grid, rtol)
    return float(np.dot(weights, noise.increments))


def discrete_norm(weights, grid, alpha):
    """``v * sum |w_i|^alpha``, the scale^alpha of a pairing with these weights."""
    return grid.cell_volume * float(np.sum(np.abs(weights) ** alpha))


# --- Fubini -----------------------------------------------------------------

def _sign_parts(phi):
    """Split phi into its positive and negative bump terms."""
    terms = phi.terms if isinstance(phi, (TestFunction, TestFunctionSum)) else ()
    pos, neg = [], []
    for c, t in terms:
        s = c * t.amplitude
        if s > 0:
            pos.append((c, t))
        elif s < 0:
            neg.append((-c, t))
    wrap = lambda ts: TestFunctionSum(tuple(ts)) if ts else None
    return wrap(pos), wrap(neg)


def _shared(phi, g, noise):
    grid = noise.grid
    mids = grid.midpoints()
    K = kernel_matrix(g, grid, mids)
    v = grid.cell_volume
    lhs = rhs = 0.0
    for sign, part in zip((1.0, -1.0), _sign_parts(phi)):
        if part is None:
            continue
        w = v * part(mids)
        u = K @ noise.increments
        lhs += sign * float(np.dot(w, u))
        c = w @ K
        rhs += sign * float(np.dot(c, noise.increments))
    return lhs, rhs


def _support_subgrid(phi, grid, n):
    """Midpoints of the ``n``-fold refined grid lying in the support box of phi."""
    lo, hi = phi_support(phi)
    h = grid.widths / n
    axes = []
    for a in range(grid.dim):
        k = np.arange(grid.cells[a] * n)
        x = grid.origin[a] + (k + 0.5) * h[a]
        axes.append(x[(x > lo[a]) & (x < hi[a])])
    if any(len(x) == 0 for x in axes):
        return np.zeros((0, grid.dim)), float(np.prod(h))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh]), float(np.prod(h))


def phi_support(phi):
    boxes = [t.support_box() for _, t in phi.terms]
    return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)


def refinement_weights(phi, g, grid, levels=5, rtol=1e-4):
    """Seed-independent weights of both Fubini sides per refinement level.

    Returns arrays ``L`` and ``R`` of shape (levels, n_cells) such that the
    level-``k`` sides are ``L[k] @ X`` and ``R[k] @ X``. Level ``k`` integrates
    the mild field with midpoints of the grid refined ``2**(k+1)`` times per
    axis, and computes ``phi * rho_check`` with tolerance ``rtol * 4**-k``.
    """
    mids = grid.midpoints()
    L = np.zeros((levels, len(mids)))
    R = np.zeros((levels, len(mids)))
    rows = max(1, _CHUNK_ENTRIES // max(1, len(mids)))
    for k in range(levels):
        n = 2 ** (k + 1)
        for sign, part in zip((1.0, -1.0), _sign_parts(phi)):
            if part is None:
                continue
            pts, vol = _support_subgrid(part, grid, n)
            wq = vol * part(pts) if len(pts) else np.zeros(0)
            keep = wq != 0
            pts, wq = pts[keep], wq[keep]
            for s in range(0, len(pts), rows):
                L[k] += sign * (wq[s:s + rows] @ kernel_matrix(g, grid, pts[s:s + rows]))
            R[k] += sign * convolve_batch(part, g, mids, rtol=rtol * 4.0 ** (-k))
    return L, R


def refinement_passed(diffs, allowed=1):
    """Gaps shrink at every step except at most ``allowed`` steps, and overall."""
    d = np.asarray(diffs, dtype=float)
    if len(d) < 2:
        return False
    if d[0] == 0.0:
        return bool(np.all(d == 0.0))
    ups = int(np.sum(d[1:] >= d[:-1]))
    return bool(ups <= allowed and d[-1] < d[0])


def fubini_check(phi, g, noise, mode="shared", levels=5, rtol=1e-4):
    """Compare ``int u_mild phi`` with ``<X, phi * rho_check>``.

    Parameters
    ----------
    mode : {"shared", "refine"}
        ``shared`` evaluates the mild field at the cell midpoints and uses the
        same finite double sum on both sides, so the sides agree up to
        round-off. ``refine`` integrates the mild field on grids refined by
        ``2, 4, ..., 2**levels`` per axis and computes ``phi * rho_check`` by
        adaptive quadrature with tolerance ``rtol * 4**-k`` at level ``k``.

    Positive and negative parts of phi are processed separately and
    recombined.
    """
    _require_mild(g, noise.alpha)
    _require_generalized(g, noise.alpha)
    _check_grid(g, noise.grid)
    prov = {"green": g.id, "seed": int(noise.seed), "grid": grid_id(noise.grid),
            "alpha": float(noise.alpha)}
    mode = str(mode).lower()
    if mode in ("shared", "sharedgrid", "shared_grid"):
        lhs, rhs = _shared(phi, g, noise)
        diff = abs(lhs - rhs)
        return FubiniReport(lhs, rhs, diff, True, bool(diff <= 1e-9 * (1.0 + abs(lhs))), [diff], prov)
    if mode in ("refine", "refinement"):
        if levels < 2:
            raise ParameterError("refinement needs at least 2 levels")
        L, R = refinement_weights(phi, g, noise.grid, int(levels), rtol)
        lhs_l = [float(v) for v in L @ noise.increments]
        rhs_l = [float(v) for v in R @ noise.increments]
        diffs = [abs(a - b) for a, b in zip(lhs_l, rhs_l)]
        prov = dict(prov, levels=int(levels), rtol=float(rtol), lhs_levels=lhs_l, rhs_levels=rhs_l)
        return FubiniReport(lhs_l[-1], rhs_l[-1], diffs[-1], False, refinement_passed(diffs),
                            diffs, prov)
    raise ParameterError(f"unknown mode {mode!r}")


# --- mollifier probe ----------------------------------------------------------

def unit_bump(ndim):
    """Bump on the unit ball with integral 1."""
    raw = TestFunction((0.0,) * ndim, (1.0,) * ndim)
    return TestFunction((0.0,) * ndim, (1.0,) * ndim, 1.0 / eval_test_mass(raw))


def representation_probe(g, noise, t0, n_list=(2, 4, 8, 16), base=None, rtol=1e-9):
    """Pairings ``<u_gen, phi_n^{t0}>`` for each mollifier scale ``n``.

    ``phi_n^{t0} = n^D base(n (. - t0))`` with ``base`` the unit-mass bump by
    default. As ``n`` grows these approach the mild field at ``t0``.
    """
    _require_mild(g, noise.alpha)
    _check_grid(g, noise.grid)
    base = unit_bump(g.ndim) if base is None else base
    t0 = np.asarray(t0, dtype=float).reshape(g.ndim)
    return [generalized_pairing(rescale(base, n, t0), g, noise, rtol=rtol) for n in n_list]
