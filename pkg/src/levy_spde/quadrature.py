"""Quadrature building blocks.

* Gauss-Legendre tensor rules on batches of boxes.
* :func:`adaptive_cubature`, a batched h-adaptive cubature: many independent
  integrals (one per *target*) are refined together, each box carrying the
  index of the target it belongs to.
* :func:`summarize_ladder`, which turns a sequence of partial integrals
  obtained at successive dyadic refinements into a converged value (with a
  geometric-tail extrapolation) or a divergence verdict.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import AccuracyError


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def tensor_rule(n, dim):
    """Tensor-product Gauss-Legendre rule on the unit cube ``[0, 1]**dim``."""
    x, w = gauss_legendre(n)
    nodes = np.array(list(product(x, repeat=dim)), dtype=float).reshape(-1, dim)
    weights = np.array([np.prod(c) for c in product(w, repeat=dim)], dtype=float)
    return nodes, weights


def composite_rule(edges, n):
    """Composite Gauss-Legendre rule over consecutive panels ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    width = np.diff(edges)
    nodes = edges[:-1, None] + width[:, None] * x[None, :]
    weights = width[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


@lru_cache(maxsize=None)
def axis_indicator_weights(n, dim):
    """Weights measuring, per axis, how far the ``n``-point rule is from a
    lower-degree rule on the same nodes; shape (n**dim, dim)."""
    x, w = gauss_legendre(n)
    deg = max(n - 3, 0)
    V = np.vander(x, deg + 1, increasing=True).T
    moments = 1.0 / np.arange(1, deg + 2)
    w_low = np.linalg.lstsq(V, moments, rcond=None)[0]
    dw = w - w_low
    out = np.empty((n ** dim, dim))
    for k in range(dim):
        cols = [dw if j == k else w for j in range(dim)]
        out[:, k] = [np.prod(c) for c in product(*cols)]
    return out


def _apply_rule(f, lo, hi, owner, n, chunk, indicators=False):
    """Integrate ``f`` over each box with the ``n``-point tensor rule."""
    nb, dim = lo.shape
    nodes, weights = tensor_rule(n, dim)
    width = hi - lo
    vol = np.prod(width, axis=1)
    out = np.empty(nb)
    ind = np.empty((nb, dim)) if indicators else None
    per_box = len(weights)
    step = max(1, chunk // per_box)
    for s in range(0, nb, step):
        sl = slice(s, min(nb, s + step))
        pts = lo[sl, None, :] + width[sl, None, :] * nodes[None, :, :]
        own = np.repeat(owner[sl], per_box)
        vals = np.asarray(f(pts.reshape(-1, dim), own), dtype=float).reshape(-1, per_box)
        out[sl] = vol[sl] * (vals @ weights)
        if indicators:
            ind[sl] = np.abs(vals @ axis_indicator_weights(n, dim)) * vol[sl, None]
    return (out, ind) if indicators else out


@dataclass
class CubatureResult:
    value: np.ndarray
    error: np.ndarray
    converged: np.ndarray
    n_boxes: int = 0
    evaluations: int = 0
    info: dict = field(default_factory=dict)


def adaptive_cubature(f, lo, hi, owner=None, n_targets=None, rtol=1e-6, atol=0.0,
                      order=5, max_rounds=80, max_active=200_000, chunk=400_000,
                      raise_on_failure=True):
    """Batched adaptive cubature over axis-aligned boxes.

    Parameters
    ----------
    f : callable
        ``f(x, owner)`` with ``x`` of shape (N, D) and ``owner`` (N,) target
        indices; returns (N,) integrand values.
    lo, hi : array_like, shape (B, D)
        Initial boxes. Several boxes may belong to the same target.
    owner : array_like of int, shape (B,), optional
        Target index of each box (default: box ``i`` is target ``i``).
    rtol, atol : float or array
        A target is finished once its summed error estimate is below
        ``max(atol, rtol * |estimate|)``.
    order : int
        Each box is integrated with the ``order`` and ``order - 1`` point
        tensor Gauss-Legendre rules; their difference is the local error.

    Returns
    -------
    CubatureResult
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    nb, dim = lo.shape
    owner = np.arange(nb) if owner is None else np.asarray(owner, dtype=np.intp)
    if n_targets is None:
        n_targets = int(owner.max()) + 1 if nb else 0
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (n_targets,))
    rtol = np.broadcast_to(np.asarray(rtol, dtype=float), (n_targets,))

    span0 = hi - lo
    keep = np.all(span0 > 0, axis=1)
    lo, hi, owner, span0 = lo[keep], hi[keep], owner[keep], span0[keep]
    target_vol = np.bincount(owner, weights=np.prod(span0, axis=1), minlength=n_targets)
    rel_span = np.ones_like(lo)

    acc_val = np.zeros(n_targets)
    acc_err = np.zeros(n_targets)
    converged = np.ones(n_targets, dtype=bool)
    evaluations = 0
    n_boxes = 0
    npts = order ** dim + (order - 1) ** dim

    for _ in range(max_rounds):
        if len(lo) == 0:
            break
        q_hi, ind = _apply_rule(f, lo, hi, owner, order, chunk, indicators=True)
        q_lo = _apply_rule(f, lo, hi, owner, order - 1, chunk)
        evaluations += len(lo) * npts
        n_boxes += len(lo)
        err = np.abs(q_hi - q_lo)
        if not (np.all(np.isfinite(q_hi)) and np.all(np.isfinite(err))):
            bad = owner[~(np.isfinite(q_hi) & np.isfinite(err))]
            raise AccuracyError("non-finite integrand values in cubature",
                                diagnostics={"targets": np.unique(bad)})
        est = acc_val + np.bincount(owner, weights=q_hi, minlength=n_targets)
        tot_err = acc_err + np.bincount(owner, weights=err, minlength=n_targets)
        tol = np.maximum(atol, rtol * np.abs(est))
        target_done = tot_err <= tol
        vol = np.prod(hi - lo, axis=1)
        local_ok = err <= tol[owner] * vol / np.where(target_vol[owner] > 0, target_vol[owner], 1.0)
        accept = target_done[owner] | local_ok
        acc_val += np.bincount(owner[accept], weights=q_hi[accept], minlength=n_targets)
        acc_err += np.bincount(owner[accept], weights=err[accept], minlength=n_targets)
        split = ~accept
        if not np.any(split):
            lo = lo[:0]
            break
        lo, hi, owner, rel_span = lo[split], hi[split], owner[split], rel_span[split]
        ind = ind[split]
        if len(lo) > max_active:
            # keep refining the worst boxes, freeze the rest
            order_idx = np.argsort(err[split])[::-1]
            frozen = order_idx[max_active:]
            q_f = q_hi[split][frozen]
            e_f = err[split][frozen]
            acc_val += np.bincount(owner[frozen], weights=q_f, minlength=n_targets)
            acc_err += np.bincount(owner[frozen], weights=e_f, minlength=n_targets)
            live = order_idx[:max_active]
            lo, hi, owner, rel_span = lo[live], hi[live], owner[live], rel_span[live]
            ind = ind[live]
        # split where the integrand is least resolved; break ties by extent
        axis = np.argmax(ind * (1.0 + 1e-3 * rel_span), axis=1)
        rows = np.arange(len(lo))
        mid = 0.5 * (lo[rows, axis] + hi[rows, axis])
        lo2, hi2 = lo.copy(), hi.copy()
        hi[rows, axis] = mid
        lo2[rows, axis] = mid
        rel_span[rows, axis] *= 0.5
        lo = np.concatenate([lo, lo2])
        hi = np.concatenate([hi, hi2])
        owner = np.concatenate([owner, owner])
        rel_span = np.concatenate([rel_span, rel_span])
    else:
        if len(lo):
            q_hi = _apply_rule(f, lo, hi, owner, order, chunk)
            q_lo = _apply_rule(f, lo, hi, owner, order - 1, chunk)
            err = np.abs(q_hi - q_lo)
            acc_val += np.bincount(owner, weights=q_hi, minlength=n_targets)
            acc_err += np.bincount(owner, weights=err, minlength=n_targets)

    tol = np.maximum(atol, rtol * np.abs(acc_val))
    converged = acc_err <= tol * (1 + 1e-12)
    result = CubatureResult(acc_val, acc_err, converged, n_boxes, evaluations)
    if raise_on_failure and not np.all(converged):
        raise AccuracyError(
            f"cubature did not converge for {int(np.sum(~converged))} of {n_targets} targets",
            estimate=acc_val, error_bound=acc_err,
            diagnostics={"converged": converged},
        )
    return result


def panel_edges_toward(lo, hi, n_panels, end="lo"):
    """Dyadic panel boundaries on [lo, hi] graded toward one end.

    The first panel covers the half of the interval away from ``end``; each
    following panel halves the remaining distance. The last entry is the
    innermost cut, so the sub-interval between ``end`` and that cut is not
    covered.
    """
    length = hi - lo
    fracs = 2.0 ** -np.arange(n_panels + 1)
    if end == "lo":
        return lo + length * fracs
    return hi - length * fracs


@dataclass
class Ladder:
    """Outcome of a dyadic refinement sequence."""

    value: float
    error_bound: float
    diverged: bool
    converged: bool
    sequence: list
    ratios: list


def summarize_ladder(values, quad_errors=None, delta=0.05, consecutive=3, rtol=1e-8):
    """Classify partial integrals ``S_0, ..., S_K`` from successive refinements.

    Divergence requires the last ``consecutive`` ratios ``S_{k+1}/S_k`` to
    exceed ``1 + delta`` and the increments to stop shrinking. Otherwise the
    excluded tail is treated as geometric and removed by Aitken's delta-squared
    extrapolation; the error bound is the change between the last two
    extrapolated values plus the quadrature error of the last level.
    """
    s = np.asarray(values, dtype=float)
    qerr = np.zeros_like(s) if quad_errors is None else np.asarray(quad_errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = s[1:] / s[:-1]
    ratios = [float(r) for r in ratios]
    inc = np.diff(s)
    grows = (len(ratios) >= consecutive
             and all(np.isfinite(r) and r > 1 + delta for r in ratios[-consecutive:]))
    # equal increments (log divergence) must survive round-off
    not_shrinking = len(inc) >= 2 and abs(inc[-1]) >= (1 - 1e-9) * abs(inc[-2]) > 0
    if grows and not_shrinking:
        return Ladder(float("inf"), float("inf"), True, False, [float(v) for v in s], ratios)

    def aitken(k):
        d1, d0 = s[k] - s[k - 1], s[k - 1] - s[k - 2]
        if d1 == 0.0:
            return s[k]
        if d0 == 0.0 or d1 == d0:
            return s[k]
        q = d1 / d0
        if not (-1.0 < q < 1.0):
            return np.nan
        return s[k] + d1 * q / (1.0 - q)

    k = len(s) - 1
    if k >= 3:
        a_last, a_prev = aitken(k), aitken(k - 1)
        if np.isfinite(a_last) and np.isfinite(a_prev):
            value = float(a_last)
            err = abs(a_last - a_prev) + qerr[-1] + 4 * np.finfo(float).eps * abs(a_last)
        else:
            value, err = float(s[-1]), float("inf")
    elif k >= 1:
        value = float(s[-1])
        err = abs(s[-1] - s[-2]) + qerr[-1]
    else:
        value, err = float(s[-1]), float(qerr[-1])
    converged = bool(np.isfinite(err) and err <= max(rtol * abs(value), 1e-300) * 1e6)
    return Ladder(value, float(err), False, converged, [float(v) for v in s], ratios)
