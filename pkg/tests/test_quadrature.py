import math

import numpy as np
import pytest

from levy_spde.errors import AccuracyError
from levy_spde.quadrature import (adaptive_cubature, composite_rule, gauss_legendre,
                                  summarize_ladder, tensor_rule)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_gauss_legendre_exact_to_degree(n):
    x, w = gauss_legendre(n)
    for k in range(2 * n):
        assert np.dot(w, x ** k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_tensor_and_composite_rules():
    x, w = tensor_rule(4, 2)
    assert np.dot(w, x[:, 0] ** 3 * x[:, 1] ** 2) == pytest.approx(1 / 12, rel=1e-13)
    x, w = composite_rule([0.0, 1.0, 3.0], 5)
    assert np.dot(w, x ** 9) == pytest.approx(3.0 ** 10 / 10, rel=1e-13)


def test_adaptive_cubature_integrable_singularity():
    f = lambda v, own: 1.0 / np.sqrt(v[:, 0])
    res = adaptive_cubature(f, [[0.0]], [[1.0]], rtol=1e-9)
    assert res.value[0] == pytest.approx(2.0, rel=1e-8)


def test_adaptive_cubature_batched_targets():
    # two targets: int x y over unit square, and int exp(-x-y)
    lo = np.zeros((2, 2))
    hi = np.ones((2, 2))
    f = lambda v, own: np.where(own == 0, v[:, 0] * v[:, 1], np.exp(-v.sum(axis=1)))
    res = adaptive_cubature(f, lo, hi, rtol=1e-12)
    assert res.value[0] == pytest.approx(0.25, rel=1e-12)
    assert res.value[1] == pytest.approx((1 - math.exp(-1)) ** 2, rel=1e-11)


def test_adaptive_cubature_reports_failure():
    f = lambda v, own: 1.0 / v[:, 0]  # not integrable
    with pytest.raises(AccuracyError):
        adaptive_cubature(f, [[0.0]], [[1.0]], rtol=1e-10, max_rounds=12)


def test_ladder_geometric_tail_is_extrapolated():
    # partial sums of a geometric series 1 - q^k
    q = 0.5
    s = [1 - q ** (k + 1) for k in range(6)]
    lad = summarize_ladder(s)
    assert not lad.diverged
    assert lad.value == pytest.approx(1.0, abs=1e-12)


def test_ladder_growth_is_divergence():
    s = [2.0 ** k for k in range(6)]
    lad = summarize_ladder(s)
    assert lad.diverged and math.isinf(lad.value)


def test_ladder_slow_but_convergent_growth_not_flagged():
    # ratios stay above 1.05 for a while but increments shrink
    s = np.cumsum(0.9 ** np.arange(6) * 10)
    assert not summarize_ladder(list(s)).diverged
