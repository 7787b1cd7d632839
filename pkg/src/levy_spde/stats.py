"""Characteristic-function and quantile checks for symmetric stable samples."""

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import integrate, optimize, special

from .errors import ParameterError, RefusedError

DEFAULT_U = (0.5, 1.0, 2.0)
MIN_QUANTILE_SAMPLES = 10_000


def empirical_cf(samples, u_values):
    """``(1/n) sum_k exp(i u X_k)`` for each ``u``.

    Returns
    -------
    numpy.ndarray of complex, shape (len(u_values),)
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("empirical_cf needs at least one sample")
    u = np.atleast_1d(np.asarray(u_values, dtype=float))
    out = np.empty(len(u), dtype=complex)
    for k, uk in enumerate(u):
        ux = uk * x
        out[k] = complex(np.mean(np.cos(ux)), np.mean(np.sin(ux)))
    return out


def stable_cf(u, alpha, scale=1.0):
    u = np.asarray(u, dtype=float)
    return np.exp(-(scale * np.abs(u)) ** alpha)


@dataclass
class CFTest:
    """Empirical versus theoretical characteristic function on a set of ``u``."""

    u_values: list
    empirical: list
    theoretical: list
    band: float
    n_samples: int
    passed: bool
    max_gap: float
    max_imag: float
    params: dict = field(default_factory=dict)
    test: str = "cf_test"

    def to_dict(self):
        return {"test": self.test, "params": self.params, "n": self.n_samples,
                "band": self.band, "max_gap": self.max_gap, "passed": self.passed}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def cf_test(samples, alpha, scale=1.0, u_values=DEFAULT_U, band_multiplier=4.0):
    """Compare the empirical CF with ``exp(-(scale |u|)^alpha)``.

    Passes when both the largest modulus gap and the largest imaginary part
    stay within ``band_multiplier / sqrt(n)``.
    """
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise ParameterError("alpha must lie in (0, 2]")
    if scale < 0:
        raise ParameterError("scale must be >= 0")
    x = np.asarray(samples, dtype=float).ravel()
    u = [float(v) for v in np.atleast_1d(u_values)]
    emp = empirical_cf(x, u)
    theo = stable_cf(u, alpha, scale)
    band = band_multiplier / math.sqrt(x.size)
    gap = float(np.max(np.abs(emp - theo)))
    imag = float(np.max(np.abs(emp.imag)))
    return CFTest(u, emp.tolist(), theo.tolist(), band, int(x.size), gap <= band and imag <= band,
                  gap, imag, {"alpha": alpha, "scale": float(scale), "band_multiplier": band_multiplier})


def stable_cdf(x, alpha, scale=1.0):
    """CDF of the symmetric stable law by Gil-Pelaez inversion of its CF.

    ``F(x) = 1/2 + (1/pi) int_0^inf exp(-v^alpha) sin(v x / scale) / v dv``;
    the integral is truncated where ``exp(-v^alpha) < 1e-17``.
    """
    y = float(x) / scale
    if y == 0.0:
        return 0.5
    if alpha == 2.0:
        return 0.5 * (1.0 + special.erf(y / 2.0))
    if alpha == 1.0:
        return 0.5 + math.atan(y) / math.pi
    upper = 40.0 ** (1.0 / alpha)
    f = lambda v: math.exp(-v ** alpha) * y * np.sinc(v * y / math.pi)
    # break the range into pieces of a few oscillation periods
    n_pieces = int(min(4000, max(8, upper * abs(y) / (4.0 * math.pi))))
    edges = np.linspace(0.0, upper, n_pieces + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return 0.5 + total / math.pi


def stable_quantile(p, alpha, scale=1.0):
    """Quantile of the symmetric stable law (root of :func:`stable_cdf`)."""
    if not 0.0 < p < 1.0:
        raise ParameterError("p must lie in (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -stable_quantile(1.0 - p, alpha, scale)
    hi = scale
    while stable_cdf(hi, alpha, scale) < p:
        hi *= 2.0
    return optimize.brentq(lambda x: stable_cdf(x, alpha, scale) - p, 0.0, hi, xtol=1e-12, rtol=1e-12)


@dataclass
class QuantileReport:
    probs: list
    empirical: list
    theoretical: list
    gaps: list
    max_gap: float
    spread_ratio_empirical: float
    spread_ratio_theoretical: float
    n: int
    tolerance: float
    passed: bool
    params: dict = field(default_factory=dict)
    test: str = "quantile_check"

    def to_dict(self):
        return {"test": self.test, "params": self.params, "n": self.n, "band": self.tolerance,
                "max_gap": self.max_gap, "passed": self.passed}


def quantile_check(samples, alpha, scale=1.0, probs=(0.05, 0.25, 0.5, 0.75, 0.95), tolerance=0.02):
    """Compare sample quantiles with those of the symmetric stable law.

    Also reports the spread ratio ``(q95 - q05) / (q75 - q25)``, which depends
    on ``alpha`` only. ``passed`` refers to the quartiles and the median.

    Raises
    ------
    RefusedError
        when fewer than 10^4 samples are given.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_QUANTILE_SAMPLES:
        raise RefusedError(f"quantile_check needs at least {MIN_QUANTILE_SAMPLES} samples, got {x.size}")
    alpha = float(alpha)
    if not (0.0 < alpha <= 2.0):
        raise ParameterError("alpha must lie in (0, 2]")
    probs = [float(p) for p in probs]
    emp = np.quantile(x, probs)
    theo = np.array([stable_quantile(p, alpha, scale) for p in probs])
    gaps = np.abs(emp - theo)
    central = [i for i, p in enumerate(probs) if 0.2 <= p <= 0.8]
    max_gap = float(np.max(gaps[central])) if central else float(np.max(gaps))

    def ratio(q):
        qs = dict(zip(probs, q))
        if all(k in qs for k in (0.05, 0.25, 0.75, 0.95)):
            return float((qs[0.95] - qs[0.05]) / (qs[0.75] - qs[0.25]))
        return float("nan")

    return QuantileReport(probs, emp.tolist(), theo.tolist(), gaps.tolist(), max_gap, ratio(emp),
                          ratio(theo), int(x.size), tolerance, max_gap <= tolerance,
                          {"alpha": alpha, "scale": float(scale)})
