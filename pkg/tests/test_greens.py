import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats as sstats

from levy_spde.errors import ParameterError, UnsupportedEvaluation
from levy_spde.greens import (GreenFunction, TestFunction, convolve_batch, convolve_check,
                              eval_green, eval_test, eval_test_mass, in_support, rescale)


def bump(x, c, r, a=1.0):
    s = sum(((xi - ci) / ri) ** 2 for xi, ci, ri in zip(x, c, r))
    return a * math.exp(-1.0 / (1.0 - s)) if s < 1 else 0.0


# --- kernels -------------------------------------------------------------------

def test_catalogue_ids_and_flags():
    assert GreenFunction("heat", 2).id == "heat-d2"
    assert GreenFunction("heat", 2).ndim == 3
    assert GreenFunction("poisson", 4).ndim == 4
    assert not GreenFunction("wave", 3).pointwise
    g = GreenFunction("wave", 2)
    assert GreenFunction.from_dict(g.to_dict()) == g
    with pytest.raises(ParameterError):
        GreenFunction("schrodinger", 1)
    with pytest.raises(ParameterError):
        GreenFunction("heat", 0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_heat_kernel_is_gaussian_density(d):
    rng = np.random.default_rng(d)
    pts = np.column_stack([rng.uniform(0.05, 2, 50), rng.normal(size=(50, d))])
    ref = [np.prod(sstats.norm.pdf(p[1:], scale=math.sqrt(2 * p[0]))) for p in pts]
    assert np.allclose(eval_green(GreenFunction("heat", d), pts), ref, rtol=1e-12)
    assert eval_green(GreenFunction("heat", d), [-0.1] + [0.0] * d) == 0.0
    assert eval_green(GreenFunction("heat", d), [0.0] * (d + 1)) == 0.0


def test_heat_kernel_unit_mass():
    g = GreenFunction("heat", 1)
    m = integrate.quad(lambda x: eval_green(g, [0.3, x]), -np.inf, np.inf)[0]
    assert m == pytest.approx(1.0, rel=1e-10)


def test_wave_kernels():
    g1 = GreenFunction("wave", 1)
    assert eval_green(g1, [1.0, 0.5]) == 0.5
    assert eval_green(g1, [1.0, 1.5]) == 0.0
    assert eval_green(g1, [-1.0, 0.0]) == 0.0
    g2 = GreenFunction("wave", 2)
    t, x, y = 2.0, 0.6, -0.8
    assert eval_green(g2, [t, x, y]) == pytest.approx(1 / (2 * math.pi * math.sqrt(t * t - 1.0)), rel=1e-13)
    assert eval_green(g2, [1.0, 1.2, 0.0]) == 0.0
    assert math.isinf(eval_green(g2, [1.0, 0.6, 0.8]))
    with pytest.raises(UnsupportedEvaluation):
        eval_green(GreenFunction("wave", 3), [1.0, 0.0, 0.0, 0.0])


def test_poisson_kernels():
    assert eval_green(GreenFunction("poisson", 1), [-3.0]) == 1.5
    assert eval_green(GreenFunction("poisson", 2), [0.0, 2.0]) == pytest.approx(-math.log(2) / (2 * math.pi))
    assert eval_green(GreenFunction("poisson", 3), [0.0, 0.0, 2.0]) == pytest.approx(1 / (8 * math.pi))
    # d >= 3: r^(2-d) / ((d-2) |S^(d-1)|); d = 5 has |S^4| = 8 pi^2 / 3
    assert eval_green(GreenFunction("poisson", 5), [1.0, 0, 0, 0, 0]) == pytest.approx(1 / (3 * 8 * math.pi ** 2 / 3))
    assert math.isinf(eval_green(GreenFunction("poisson", 3), [0.0, 0.0, 0.0]))


def test_support_predicate():
    assert bool(in_support(GreenFunction("wave", 1), [1.0, 0.9]))
    assert not bool(in_support(GreenFunction("wave", 1), [1.0, 1.1]))
    assert not bool(in_support(GreenFunction("heat", 2), [0.0, 0.0, 0.0]))


# --- test functions ----------------------------------------------------------------

def test_bump_values_and_support():
    phi = TestFunction((1.0, 0.0), (0.5, 2.0), 3.0)
    assert eval_test(phi, [1.0, 0.0]) == pytest.approx(3.0 * math.exp(-1.0))
    assert eval_test(phi, [1.5, 0.0]) == 0.0
    assert eval_test(phi, [1.2, 1.0]) == pytest.approx(bump((1.2, 1.0), (1.0, 0.0), (0.5, 2.0), 3.0))
    assert phi.sup_norm() == pytest.approx(3.0 / math.e)


def test_bump_mass_against_cubature():
    phi = TestFunction((0.3, -0.2), (0.7, 0.4), 2.0)
    ref = integrate.dblquad(lambda y, x: bump((x, y), phi.center, phi.radii, 2.0),
                            -0.4, 1.0, -0.6, 0.2, epsabs=1e-13)[0]
    assert eval_test_mass(phi) == pytest.approx(ref, rel=1e-8)


@given(n=st.floats(0.5, 20), t=st.floats(-3, 3))
def test_rescale_preserves_mass(n, t):
    phi = TestFunction((0.2, 0.1), (1.0, 0.5), 1.5)
    phn = rescale(phi, n, (t, -t))
    assert eval_test_mass(phn) == pytest.approx(eval_test_mass(phi), rel=1e-12)
    assert np.allclose(phn.center, np.array([t, -t]) + np.array(phi.center) / n)


def test_test_function_serialization_and_sums():
    phi = TestFunction((0.0, 1.0), (1.0, 1.0), -2.0)
    assert TestFunction.from_dict(phi.to_dict()) == phi
    s = phi + 2.0 * TestFunction((1.0, 1.0), (0.5, 0.5))
    x = np.array([[0.2, 1.1], [0.9, 1.0]])
    assert np.allclose(s(x), eval_test(phi, x) + 2 * eval_test(TestFunction((1.0, 1.0), (0.5, 0.5)), x))


def test_invalid_test_functions():
    with pytest.raises(ParameterError):
        TestFunction((0.0,), (0.0,))
    with pytest.raises(ParameterError):
        TestFunction((0.0, 0.0), (1.0,))


# --- convolutions ------------------------------------------------------------------

def _conv_reference(phi, g, p):
    """``int phi(s) rho(s - p) ds`` by nested quadrature with exact cone limits."""
    (t0, x0), (t1, x1) = phi.support_box()

    def inner(t):
        tau = t - p[0]
        lo, hi = x0, x1
        if g.operator == "wave":
            lo, hi = max(lo, p[1] - tau), min(hi, p[1] + tau)
        if hi <= lo:
            return 0.0
        f = lambda x: eval_test(phi, [t, x]) * eval_green(g, [tau, x - p[1]])
        return integrate.quad(f, lo, hi, epsabs=1e-14, limit=200)[0]

    return integrate.quad(inner, max(t0, p[0]), t1, epsabs=1e-13, limit=200)[0]


@pytest.mark.parametrize("op", ["heat", "wave"])
def test_convolution_space_time_d1(op):
    g = GreenFunction(op, 1)
    phi = TestFunction((1.0, 0.2), (0.4, 0.5))
    pts = np.array([[0.3, 0.0], [0.9, 0.4], [0.1, -0.8]])
    vals = convolve_batch(phi, g, pts, rtol=1e-9)
    for v, p in zip(vals, pts):
        assert v == pytest.approx(_conv_reference(phi, g, p), rel=1e-6, abs=1e-12)


def test_convolution_vanishes_after_support():
    phi = TestFunction((1.0, 0.0), (0.4, 0.5))
    assert convolve_check(phi, GreenFunction("heat", 1), [1.5, 0.0]) == 0.0


def test_poisson_d1_convolution():
    phi = TestFunction((0.5,), (0.8,))
    g = GreenFunction("poisson", 1)
    for x in (-2.0, 0.3, 2.5):
        ref = integrate.quad(lambda y: 0.5 * abs(x - y) * eval_test(phi, [y]), -0.3, 1.3, points=[x])[0]
        assert convolve_check(phi, g, [x], rtol=1e-9) == pytest.approx(ref, rel=1e-7)


@pytest.mark.parametrize("d", [3, 5])
def test_poisson_shell_theorem(d):
    phi = TestFunction((0.0,) * d, (1.0,) * d)
    g = GreenFunction("poisson", d)
    m = eval_test_mass(phi)
    x = np.zeros(d)
    x[0] = 1.7
    ref = m * eval_green(g, x)
    assert convolve_check(phi, g, x, rtol=1e-8) == pytest.approx(ref, rel=1e-6)


def test_poisson_d2_far_field():
    # outside a radial source the log potential is mass * rho(x)
    phi = TestFunction((0.0, 0.0), (1.0, 1.0))
    g = GreenFunction("poisson", 2)
    x = np.array([2.0, 1.0])
    ref = eval_test_mass(phi) * eval_green(g, x)
    assert convolve_check(phi, g, x, rtol=1e-9) == pytest.approx(ref, rel=1e-6)


def test_wave2_convolution_nested_reference():
    phi = TestFunction((1.0, 0.2, 0.0), (0.5, 0.6, 0.4))
    g = GreenFunction("wave", 2)
    p = np.array([0.9, 0.5, 0.1])

    def inner(tau):
        def radial(r):
            ang = integrate.quad(lambda th: eval_test(phi, p + [tau, r * math.cos(th), r * math.sin(th)]),
                                 0, 2 * math.pi, epsabs=1e-11, limit=200)[0]
            return ang * r / (2 * math.pi * math.sqrt(tau + r))
        return integrate.quad(radial, 0, tau, weight="alg", wvar=(0, -0.5), epsabs=1e-10)[0]

    ref = integrate.quad(inner, 0.0, 1.5 - p[0], epsabs=1e-9, limit=100)[0]
    assert convolve_check(phi, g, p, rtol=1e-8) == pytest.approx(ref, rel=1e-5)


def test_convolution_unsupported_for_wave3():
    phi = TestFunction((1.0, 0, 0, 0), (0.5,) * 4)
    with pytest.raises(UnsupportedEvaluation):
        convolve_check(phi, GreenFunction("wave", 3), [0.0] * 4)


@given(a=st.floats(-4, 4).filter(lambda v: abs(v) > 1e-3))
def test_convolution_homogeneous_in_amplitude(a):
    g = GreenFunction("heat", 1)
    phi = TestFunction((1.0, 0.0), (0.4, 0.4))
    pts = np.array([[0.5, 0.1], [0.8, -0.3]])
    assert np.allclose(convolve_batch(phi * a, g, pts, rtol=1e-10),
                       a * convolve_batch(phi, g, pts, rtol=1e-10), rtol=1e-12, atol=0)
