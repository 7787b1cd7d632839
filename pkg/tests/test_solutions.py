import math

import numpy as np
import pytest
from scipy import stats as sstats

from levy_spde.errors import ParameterError, RefusedError, UnsupportedEvaluation, UnsupportedRefusal
from levy_spde.greens import GreenFunction, TestFunction, convolve_batch, eval_test_mass
from levy_spde.noise import GridSpec, NoiseRealization, sample_white_noise, sample_white_noise_batch
from levy_spde.norms import existence_verdict
from levy_spde.solutions import (Field, default_eval_points, discrete_norm, fubini_check,
                                 generalized_pairing, kernel_matrix, mild_field, pairing_weights,
                                 refinement_passed, representation_probe, unit_bump)
from levy_spde.stats import empirical_cf

GRID = GridSpec(2, (0.0, -2.0), (2.0, 4.0), (8, 16))


def zero_noise(grid, alpha):
    return NoiseRealization(grid, alpha, np.zeros(grid.n_cells), 0)


# --- mild field --------------------------------------------------------------------

def test_mild_field_of_zero_noise_is_zero():
    f = mild_field(GreenFunction("heat", 1), zero_noise(GRID, 1.5))
    assert isinstance(f, Field)
    assert len(f) == GRID.n_cells
    assert np.all(f.values == 0.0)


def test_mild_field_is_linear_in_the_noise():
    g = GreenFunction("wave", 1)
    x1 = sample_white_noise(GRID, 1.2, 1).increments
    x2 = sample_white_noise(GRID, 1.2, 2).increments
    combo = NoiseRealization(GRID, 1.2, 2.0 * x1 - 3.0 * x2, 3)
    u = lambda x: mild_field(g, NoiseRealization(GRID, 1.2, x, 0)).values
    assert np.allclose(mild_field(g, combo).values, 2.0 * u(x1) - 3.0 * u(x2), rtol=1e-12, atol=1e-12)


def test_default_eval_points_sit_on_time_faces():
    p = default_eval_points(GRID)
    assert np.allclose(p[:, 0] / GRID.widths[0], np.round(p[:, 0] / GRID.widths[0]))
    assert np.allclose(p[:, 1], GRID.midpoints()[:, 1])


def test_kernel_matrix_heat_entries():
    g = GreenFunction("heat", 1)
    pts = np.array([[1.5, 0.3], [2.0, -1.0]])
    K = kernel_matrix(g, GRID, pts)
    m = GRID.midpoints()
    for j, p in enumerate(pts):
        lag = p - m
        ref = np.where(lag[:, 0] > 0, sstats.norm.pdf(lag[:, 1], scale=np.sqrt(2 * np.abs(lag[:, 0]))), 0.0)
        assert np.allclose(K[j], ref, rtol=1e-12, atol=0)


def test_kernel_matrix_wave1_entries():
    g = GreenFunction("wave", 1)
    p = np.array([[2.0, 0.1]])
    lag = p - GRID.midpoints()
    ref = np.where((lag[:, 0] > 0) & (np.abs(lag[:, 1]) <= lag[:, 0]), 0.5, 0.0)
    assert np.array_equal(kernel_matrix(g, GRID, p)[0], ref)


def test_kernel_matrix_moves_singular_lags():
    # the eval point coincides with a cell midpoint, so one lag is the apex of the light cone
    g = GreenFunction("wave", 2)
    grid = GridSpec(3, (0, -1, -1), (2, 2, 2), (4, 4, 4))
    K = kernel_matrix(g, grid, grid.midpoints()[[37]])
    assert np.all(np.isfinite(K))


def test_mild_field_law_matches_discrete_norm():
    # u(p) = sum K_i X_i is SaS with scale^alpha = v sum |K_i|^alpha
    g = GreenFunction("heat", 1)
    grid = GridSpec(2, (0.0, -2.0), (2.0, 4.0), (6, 8))
    alpha, M = 1.5, 20000
    p = np.array([[2.0, 0.25]])
    K = kernel_matrix(g, grid, p)[0]
    X = sample_white_noise_batch(grid, alpha, np.arange(M))
    u = X @ K
    s_a = discrete_norm(K, grid, alpha)
    single = mild_field(g, NoiseRealization(grid, alpha, X[5], 5), p).values[0]
    assert single == pytest.approx(u[5], rel=1e-12)
    for w in (0.5, 1.0, 2.0, 4.0):
        assert abs(empirical_cf(u, [w])[0] - math.exp(-s_a * w ** alpha)) < 5 / math.sqrt(M)


@pytest.mark.parametrize("eq,d,alpha", [("heat", 3, 1.8), ("heat", 2, 2.0), ("wave", 3, 1.0)])
def test_mild_refusal_matches_verdict(eq, d, alpha):
    g = GreenFunction(eq, d)
    grid = GridSpec(d + 1, (0.0,) * (d + 1), (1.0,) * (d + 1), (2,) * (d + 1))
    with pytest.raises(RefusedError) as info:
        mild_field(g, zero_noise(grid, alpha))
    assert existence_verdict(eq, d, alpha).explain() in str(info.value)
    if eq == "wave":
        assert isinstance(info.value, UnsupportedRefusal)
        assert isinstance(info.value, UnsupportedEvaluation)


def test_mild_accepted_below_threshold():
    g = GreenFunction("heat", 3)
    grid = GridSpec(4, (0.0,) * 4, (1.0,) * 4, (2,) * 4)
    assert len(mild_field(g, zero_noise(grid, 1.6))) == grid.n_cells


def test_grid_dimension_checked():
    with pytest.raises(ParameterError):
        mild_field(GreenFunction("heat", 2), zero_noise(GRID, 1.0))


def test_field_shape_validation():
    with pytest.raises(ParameterError):
        Field(np.zeros((3, 2)), np.zeros(2))


# --- generalized pairing ----------------------------------------------------------

PHI = TestFunction((1.0, 0.0), (0.3, 0.3))


def test_pairing_zero_amplitude_and_zero_noise():
    g = GreenFunction("heat", 1)
    nz = sample_white_noise(GRID, 1.5, 4)
    assert generalized_pairing(PHI * 0.0, g, nz) == 0.0
    assert generalized_pairing(PHI, g, zero_noise(GRID, 1.5)) == 0.0


def test_pairing_weights_are_convolutions_at_midpoints():
    g = GreenFunction("wave", 1)
    w = pairing_weights(PHI, g, GRID, rtol=1e-10)
    assert np.allclose(w, convolve_batch(PHI, g, GRID.midpoints(), rtol=1e-10), rtol=1e-12, atol=0)
    nz = sample_white_noise(GRID, 1.0, 9)
    assert generalized_pairing(PHI, g, nz, weights=w) == pytest.approx(float(w @ nz.increments), rel=1e-14)


def test_pairing_linear_in_phi():
    g = GreenFunction("heat", 1)
    psi = TestFunction((0.6, 0.5), (0.2, 0.4), -1.5)
    nz = sample_white_noise(GRID, 1.3, 5)
    lhs = generalized_pairing(2.0 * PHI + psi, g, nz, rtol=1e-10)
    rhs = 2.0 * generalized_pairing(PHI, g, nz, rtol=1e-10) + generalized_pairing(psi, g, nz, rtol=1e-10)
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-10)


def test_pairing_translation_covariance():
    # shifting phi by one spatial cell shifts the wave weights by one cell
    g = GreenFunction("wave", 1)
    h = GRID.widths[1]
    w0 = pairing_weights(PHI, g, GRID, rtol=1e-11).reshape(GRID.cells)
    w1 = pairing_weights(TestFunction((1.0, h), (0.3, 0.3)), g, GRID, rtol=1e-11).reshape(GRID.cells)
    assert np.allclose(w1[:, 1:], w0[:, :-1], rtol=1e-9, atol=1e-13)
    assert np.all(w0[:, -1] == 0.0)
    # same statement at the level of the pairing, with the noise rolled by one cell
    nz = sample_white_noise(GRID, 1.4, 8)
    rolled = NoiseRealization(GRID, 1.4, np.roll(nz.reshaped(), 1, axis=1).ravel(), 8)
    a = generalized_pairing(PHI, GreenFunction("wave", 1), nz, weights=w0.ravel())
    b = generalized_pairing(PHI, GreenFunction("wave", 1), rolled, weights=w1.ravel())
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_pairing_refusals():
    with pytest.raises(RefusedError):
        generalized_pairing(TestFunction((0.0,) * 3, (1.0,) * 3), GreenFunction("poisson", 3),
                            zero_noise(GridSpec(3, (-2,) * 3, (4,) * 3, (2,) * 3), 1.5))
    with pytest.raises(UnsupportedEvaluation):
        generalized_pairing(TestFunction((1.0,) + (0.0,) * 3, (0.5,) * 4), GreenFunction("wave", 3),
                            zero_noise(GridSpec(4, (0,) * 4, (2,) * 4, (2,) * 4), 1.5))


def test_poisson_pairing_allowed_in_high_dimension():
    g = GreenFunction("poisson", 5)
    grid = GridSpec(5, (-2,) * 5, (4,) * 5, (3,) * 5)
    nz = sample_white_noise(grid, 1.8, 1)
    val = generalized_pairing(TestFunction((0.0,) * 5, (1.0,) * 5), g, nz, rtol=1e-6)
    assert math.isfinite(val)


def test_discrete_norm_definition():
    w = np.array([1.0, -2.0, 0.5])
    assert discrete_norm(w, GRID, 1.5) == pytest.approx(GRID.cell_volume * (1 + 2 ** 1.5 + 0.5 ** 1.5))


# --- Fubini ------------------------------------------------------------------------

@pytest.mark.parametrize("op", ["heat", "wave"])
def test_fubini_shared_grid(op):
    g = GreenFunction(op, 1)
    phi = TestFunction((1.0, 0.0), (0.4, 0.6), 2.0) + TestFunction((0.5, 0.8), (0.3, 0.3), -1.0)
    rep = fubini_check(phi, g, sample_white_noise(GRID, 1.2, 17))
    assert rep.passed and rep.mode == "shared"
    assert rep.abs_diff <= 1e-12 * (1 + abs(rep.lhs))
    assert rep.to_dict()["provenance"]["seed"] == 17


def test_fubini_zero_noise():
    rep = fubini_check(PHI, GreenFunction("heat", 1), zero_noise(GRID, 1.5))
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.passed


def test_fubini_refinement_heat():
    rep = fubini_check(PHI, GreenFunction("heat", 1), sample_white_noise(GRID, 1.5, 3), mode="refine")
    assert rep.mode == "refine"
    assert len(rep.level_diffs) == 5
    assert rep.passed
    assert rep.level_diffs[-1] < rep.level_diffs[0]


def test_fubini_bad_mode():
    with pytest.raises(ParameterError):
        fubini_check(PHI, GreenFunction("heat", 1), zero_noise(GRID, 1.5), mode="sideways")


@pytest.mark.parametrize("diffs,ok", [
    ([1.0, 0.5, 0.2, 0.1], True),
    ([1.0, 1.2, 0.2, 0.1], True),
    ([1.0, 1.2, 0.2, 0.3], False),
    ([1.0, 0.5, 0.6, 1.1], False),
    ([0.0, 0.0, 0.0], True),
    ([1.0], False),
])
def test_refinement_pass_rule(diffs, ok):
    assert refinement_passed(diffs) is ok


# --- mollifier probe ------------------------------------------------------------

def test_unit_bump_has_unit_mass():
    for n in (1, 2, 3):
        assert eval_test_mass(unit_bump(n)) == pytest.approx(1.0, rel=1e-12)


def test_probe_of_zero_noise():
    grid = GridSpec(2, (0.0, -2.0), (2.0, 4.0), (4, 16))
    assert representation_probe(GreenFunction("heat", 1), zero_noise(grid, 1.5), (1.5, 0.0)) == [0.0] * 4


@pytest.mark.parametrize("op", ["heat", "wave"])
def test_probe_approaches_mild_field(op):
    g = GreenFunction(op, 1)
    grid = GridSpec(2, (0.0, -2.0), (2.0, 4.0), (4, 16))
    nz = sample_white_noise(grid, 1.5, 21)
    t0 = (1.5, 0.0)
    u = mild_field(g, nz, [t0]).values[0]
    gaps = [abs(v - u) for v in representation_probe(g, nz, t0)]
    assert gaps[-1] < gaps[-2] < gaps[0]
