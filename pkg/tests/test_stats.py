import math

import numpy as np
import pytest
from scipy import stats as sstats

from levy_spde.errors import ParameterError, RefusedError
from levy_spde.noise import StableParams, sample_sas
from levy_spde.stats import cf_test, empirical_cf, quantile_check, stable_cdf, stable_quantile


def test_empirical_cf_of_point_masses():
    assert np.allclose(empirical_cf(np.full(5, 0.7), [0.0, 1.0, 3.0]), np.exp(1j * np.array([0, 0.7, 2.1])))
    sym = np.array([-1.3, 1.3, -0.2, 0.2])
    emp = empirical_cf(sym, [0.4, 2.0])
    assert np.allclose(emp.imag, 0.0, atol=1e-15)
    with pytest.raises(ParameterError):
        empirical_cf([], [1.0])


def test_empirical_cf_of_scipy_cauchy():
    n = 10 ** 6
    x = sstats.cauchy.rvs(size=n, random_state=np.random.default_rng(0))
    for u in (0.5, 1.0, 2.0):
        assert abs(empirical_cf(x, [u])[0] - math.exp(-u)) < 4e-3


def test_cf_test_accepts_true_law():
    x = sample_sas(StableParams(1.5, 0.6), 10 ** 5, 3)
    r = cf_test(x, 1.5, 0.6)
    assert r.passed
    assert r.band == pytest.approx(4 / math.sqrt(10 ** 5))
    assert set(r.to_dict()) >= {"test", "params", "n", "band", "max_gap", "passed"}


def test_cf_test_rejects_wrong_law():
    x = sample_sas(StableParams(2.0), 10 ** 5, 4)
    assert not cf_test(x, 0.8).passed


def test_cf_test_power_between_nearby_alphas():
    rejections = sum(not cf_test(sample_sas(StableParams(1.3), 10 ** 5, 100 + k), 1.0).passed
                     for k in range(20))
    assert rejections >= 19


def test_cf_test_validation():
    with pytest.raises(ParameterError):
        cf_test([0.0, 1.0], 2.5)
    with pytest.raises(ParameterError):
        cf_test([0.0, 1.0], 1.0, scale=-1.0)


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 1.9])
@pytest.mark.parametrize("x", [-2.0, 0.3, 1.7])
def test_stable_cdf_against_scipy(alpha, x):
    ref = sstats.levy_stable.cdf(x, alpha, 0.0)
    assert stable_cdf(x, alpha) == pytest.approx(ref, abs=2e-6)


def test_stable_cdf_closed_cases_and_scale():
    assert stable_cdf(1.0, 1.0) == pytest.approx(0.75, abs=1e-14)
    assert stable_cdf(1.0, 2.0) == pytest.approx(sstats.norm.cdf(1.0, scale=math.sqrt(2)), abs=1e-14)
    assert stable_cdf(0.8, 1.4, scale=2.0) == pytest.approx(stable_cdf(0.4, 1.4), abs=1e-14)


def test_stable_quantiles():
    assert stable_quantile(0.75, 1.0) == pytest.approx(1.0, abs=1e-10)
    assert stable_quantile(0.75, 2.0) == pytest.approx(math.sqrt(2) * sstats.norm.ppf(0.75), abs=1e-10)
    assert stable_quantile(0.25, 1.3) == pytest.approx(-stable_quantile(0.75, 1.3), abs=1e-14)
    with pytest.raises(ParameterError):
        stable_quantile(1.0, 1.0)


def test_quantile_check_cauchy_and_gaussian():
    r = quantile_check(sample_sas(StableParams(1.0), 10 ** 5, 5), 1.0)
    assert r.passed
    assert r.theoretical[1] == pytest.approx(-1.0, abs=1e-9)
    # (q95 - q05) / (q75 - q25) = tan(0.45 pi) for the Cauchy law
    assert r.spread_ratio_theoretical == pytest.approx(math.tan(0.45 * math.pi), rel=1e-8)
    g = quantile_check(sample_sas(StableParams(2.0), 10 ** 5, 6), 2.0)
    assert g.passed
    assert g.theoretical[3] == pytest.approx(math.sqrt(2) * 0.6744897501960817, rel=1e-9)


def test_quantile_check_detects_wrong_law():
    assert not quantile_check(sample_sas(StableParams(0.7), 10 ** 5, 7), 1.8).passed


def test_quantile_check_refuses_small_samples():
    with pytest.raises(RefusedError):
        quantile_check(np.zeros(9999), 1.0)
