"""The acceptance suite: nine desk-scale checks with fixed seeds.

Each ``criterion_N`` function returns a :class:`CriterionResult`; a criterion
passes only when its checks pass within its runtime budget.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import time

import numpy as np

from .greens import GreenFunction, TestFunction, rescale
from .noise import (GridSpec, LevyMeasureSpec, StableParams, pair_jump_noise, pair_noise,
                    sample_jump_noise, sample_sas, sample_white_noise, sample_white_noise_batch)
from .norms import (ShiftedKernel, existence_verdict, h1_check, heat_norm_closed,
                    lalpha_norm_quadrature, rajput_rosinski_functional, wave1_norm_closed,
                    wave2_norm_closed)
from .solutions import (discrete_norm, fubini_check, generalized_pairing, kernel_matrix,
                        pairing_weights, refinement_passed, refinement_weights, unit_bump)
from .stats import cf_test

ALPHA_LATTICE = tuple(round(0.25 + 0.1 * k, 2) for k in range(18))
D_LATTICE = tuple(range(1, 7))
CF_U = (0.5, 1.0, 2.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} criterion {self.number}: {self.title} ({self.seconds:.1f} s, budget {self.budget:.0f} s)"

    def to_dict(self):
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "details": self.details}


def _finish(number, title, ok, t0, budget, details):
    secs = time.perf_counter() - t0
    return CriterionResult(number, title, bool(ok) and secs <= budget, secs, budget, details)


# --- 1 -------------------------------------------------------------------------

def reference_verdict(equation, d, alpha):
    """Independent statement of the existence conditions in exact arithmetic."""
    a = Fraction(alpha).limit_denominator(1000)
    if equation == "heat":
        mild = a < 1 + Fraction(2, d)
        return mild, True, mild
    if equation == "wave":
        mild = d <= 2
        return mild, True, mild
    gen = d > 4 and Fraction(d, d - 2) < a < 2
    return False, gen, False


def criterion_1():
    t0 = time.perf_counter()
    mismatches = []
    for eq in ("heat", "wave", "poisson"):
        for d in D_LATTICE:
            for a in ALPHA_LATTICE:
                v = existence_verdict(eq, d, a)
                got = (v.mild_exists, v.generalized_exists, v.random_field_exists)
                if got != reference_verdict(eq, d, a):
                    mismatches.append((eq, d, a, got))
    spot = {
        "heat d=2 mild for all alpha": all(existence_verdict("heat", 2, a).mild_exists for a in ALPHA_LATTICE),
        "poisson d=5 generalized iff alpha > 5/3": all(
            existence_verdict("poisson", 5, a).generalized_exists == (a > 5 / 3) for a in ALPHA_LATTICE),
        "poisson d=6 generalized iff alpha > 3/2": all(
            existence_verdict("poisson", 6, a).generalized_exists == (a > 1.5) for a in ALPHA_LATTICE),
        "poisson d<=4 never": not any(existence_verdict("poisson", d, a).generalized_exists
                                      for d in range(1, 5) for a in ALPHA_LATTICE),
    }
    ok = not mismatches and all(spot.values())
    return _finish(1, "existence verdict lattice", ok, t0, 1.0,
                   {"cases": 3 * len(D_LATTICE) * len(ALPHA_LATTICE), "mismatches": mismatches, "spot": spot})


# --- 2 and 3 -------------------------------------------------------------------

def criterion_2(levels=5):
    t0 = time.perf_counter()
    rows = []
    for d in (1, 2, 3):
        for a in (0.5, 1.0, 1.5):
            if not a < 1 + 2 / d:
                continue
            for t in (0.5, 1.0, 2.0):
                exact = heat_norm_closed(t, a, d).value
                q = lalpha_norm_quadrature(GreenFunction("heat", d), (t,) + (0.0,) * d, a, levels=levels)
                rows.append({"d": d, "alpha": a, "t": t, "closed": exact, "quadrature": q.value,
                             "rel_gap": abs(q.value / exact - 1.0)})
    worst = max(r["rel_gap"] for r in rows)
    return _finish(2, "heat norm: closed form vs quadrature", worst <= 1e-4, t0, 60.0,
                   {"cases": len(rows), "worst_rel_gap": worst, "rows": rows})


def criterion_3(levels=5):
    t0 = time.perf_counter()
    rows = []
    for d, closed in ((1, wave1_norm_closed), (2, wave2_norm_closed)):
        g = GreenFunction("wave", d)
        for a in (0.5, 1.0, 1.5):
            for t in (1.0, 2.0):
                exact = closed(t, a).value
                q = lalpha_norm_quadrature(g, (t,) + (0.0,) * d, a, levels=levels)
                rows.append({"d": d, "alpha": a, "t": t, "closed": exact, "quadrature": q.value,
                             "rel_gap": abs(q.value / exact - 1.0)})
    worst = max(r["rel_gap"] for r in rows)
    return _finish(3, "wave norm: closed form vs quadrature", worst <= 1e-3, t0, 120.0,
                   {"cases": len(rows), "worst_rel_gap": worst, "rows": rows})


# --- 4 -------------------------------------------------------------------------

def criterion_4():
    t0 = time.perf_counter()
    out = {}
    ok = True
    for d, a in ((3, 1.8), (4, 1.6)):
        r = lalpha_norm_quadrature(GreenFunction("heat", d), (1.0,) + (0.0,) * d, a, levels=5)
        grow = len(r.ratios) >= 3 and all(x > 1.05 for x in r.ratios[-3:])
        expected = not existence_verdict("heat", d, a).mild_exists
        out[f"heat d={d} alpha={a}"] = {"diverged": r.diverged, "ratios": list(r.ratios)}
        ok &= r.diverged and grow and expected
    for d, a, want in ((3, 1.5, True), (3, 0.8, True), (5, 1.9, False)):
        phi = TestFunction((0.0,) * d, (1.0,) * d)
        r = h1_check(phi, GreenFunction("poisson", d), a)
        out[f"poisson d={d} alpha={a}"] = {"diverged": r.diverged, "value": r.value}
        ok &= r.diverged == want
    return _finish(4, "divergence detection", ok, t0, 120.0, out)


# --- 5 -------------------------------------------------------------------------

def criterion_5(trials=100, n=100_000, alphas=(0.5, 1.0, 1.5)):
    t0 = time.perf_counter()
    grid = GridSpec(2, (0.0, 0.0), (1.0, 1.0), (4, 4))
    cells = np.array([0, 5, 6])  # three whole cells, total volume 3/16
    vol = len(cells) * grid.cell_volume
    details = {}
    ok = True
    # the batched path must agree with pair_noise on full realizations
    for s in range(3):
        nz = sample_white_noise(grid, 1.5, 10 ** 6 + s)
        ind = lambda p: np.isin(np.ravel_multi_index(
            np.floor((p - grid.origin) / grid.widths).astype(int).T, grid.cells), cells).astype(float)
        direct = pair_noise(nz, ind)
        batched = sample_white_noise_batch(grid, 1.5, [10 ** 6 + s], cells=cells).sum()
        ok &= abs(direct - batched) <= 1e-12 * (1 + abs(direct))
    for a in alphas:
        sas_pass = sum(cf_test(sample_sas(StableParams(a), n, 5000 + k), a, 1.0, CF_U).passed
                       for k in range(trials))
        ind_pass = 0
        for k in range(trials):
            seeds = np.arange(n, dtype=np.uint64) + np.uint64(10_000_000 * (k + 1))
            vals = np.zeros(n)
            for c0 in range(0, n, 20_000):
                vals[c0:c0 + 20_000] = sample_white_noise_batch(grid, a, seeds[c0:c0 + 20_000],
                                                                cells=cells).sum(axis=1)
            ind_pass += cf_test(vals, a, vol ** (1.0 / a), CF_U).passed
        details[f"alpha={a}"] = {"sample_sas_pass_rate": sas_pass / trials,
                                 "indicator_pair_pass_rate": ind_pass / trials}
        ok &= sas_pass >= 0.99 * trials and ind_pass >= 0.99 * trials
    return _finish(5, "noise law (CF bands)", ok, t0, 300.0, details)


# --- 6 -------------------------------------------------------------------------

def _pairing_samples(weights, grid, alpha, seeds, chunk=1000):
    cells = np.flatnonzero(weights)
    w = weights[cells]
    out = np.empty(len(seeds))
    for s in range(0, len(seeds), chunk):
        X = sample_white_noise_batch(grid, alpha, seeds[s:s + chunk], cells=cells)
        out[s:s + chunk] = X @ w
    return out


def criterion_6(M=20_000, cells=(64, 64)):
    t0 = time.perf_counter()
    grid = GridSpec(2, (0.0, -2.0), (2.0, 4.0), cells)
    phi = TestFunction((1.0, 0.0), (0.5, 0.6), 10.0)
    details = {}
    ok = True
    for eq, a, base in (("heat", 1.5, 20_000_000), ("wave", 1.0, 30_000_000)):
        g = GreenFunction(eq, 1)
        w = pairing_weights(phi, g, grid)
        seeds = np.arange(M, dtype=np.uint64) + np.uint64(base)
        vals = _pairing_samples(w, grid, a, seeds)
        # spot check against the library entry point
        for s in (0, M - 1):
            nz = sample_white_noise(grid, a, int(seeds[s]))
            direct = generalized_pairing(phi, g, nz, weights=w)
            ok &= abs(direct - vals[s]) <= 1e-10 * (1 + abs(direct))
        scale = discrete_norm(w, grid, a) ** (1.0 / a)
        res = cf_test(vals, a, scale, CF_U, band_multiplier=5.0)
        details[eq] = {"alpha": a, "scale": scale, "max_gap": res.max_gap, "band": res.band,
                       "passed": res.passed}
        ok &= res.passed
    return _finish(6, "generalized-solution law", ok, t0, 600.0, details)


# --- 7 -------------------------------------------------------------------------

def _random_phi(rng, lo, hi, pieces=None):
    """Random bump (or signed pair of bumps) well inside the box [lo, hi]."""
    lo, hi = np.asarray(lo), np.asarray(hi)
    span = hi - lo
    pieces = pieces or int(rng.integers(1, 3))
    phi = None
    for _ in range(pieces):
        r = span * rng.uniform(0.1, 0.25, len(lo))
        c = lo + r + (span - 2 * r) * rng.uniform(0.25, 0.75, len(lo))
        term = TestFunction(tuple(c), tuple(r), float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)))
        phi = term if phi is None else phi + term
    return phi


def criterion_7(configs=100):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    details = {}
    ok = True
    shared = {"heat1": (GreenFunction("heat", 1), GridSpec(2, (0.0, -1.0), (2.0, 2.0), (24, 24)), 1.5),
              "wave1": (GreenFunction("wave", 1), GridSpec(2, (0.0, -1.0), (2.0, 2.0), (24, 24)), 1.2),
              "wave2": (GreenFunction("wave", 2), GridSpec(3, (0.0, -1.0, -1.0), (2.0, 2.0, 2.0), (8, 8, 8)), 1.2)}
    for name, (g, grid, a) in shared.items():
        lo = np.array(grid.origin)
        hi = lo + np.array(grid.extent)
        worst = 0.0
        passed = 0
        for k in range(configs):
            phi = _random_phi(rng, lo, hi)
            nz = sample_white_noise(grid, a, int(rng.integers(0, 2 ** 62)))
            r = fubini_check(phi, g, nz, mode="shared")
            worst = max(worst, r.abs_diff / (1 + abs(r.lhs)))
            passed += r.passed
        details[f"shared {name}"] = {"passed": passed, "worst_relative": worst}
        ok &= passed == configs
    grid = GridSpec(2, (0.0, -2.0), (2.0, 4.0), (8, 16))
    for name, a in (("heat", 1.5), ("wave", 1.5)):
        g = GreenFunction(name, 1)
        passed = 0
        for k in range(configs):
            phi = _random_phi(rng, (0.4, -1.0), (1.6, 1.0))
            L, R = refinement_weights(phi, g, grid, levels=5)
            nz = sample_white_noise(grid, a, int(rng.integers(0, 2 ** 62)))
            diffs = np.abs((L - R) @ nz.increments)
            passed += refinement_passed(diffs)
        details[f"refine {name}1"] = {"passed": passed, "configs": configs}
        ok &= passed >= 0.9 * configs
    return _finish(7, "stochastic Fubini", ok, t0, 600.0, details)


# --- 8 -------------------------------------------------------------------------

PROBE_GRID = GridSpec(2, (0.0, -2.0), (2.0, 4.0), (4, 16))
PROBE_POINT = (1.5, 0.0)


def criterion_8(configs=100, n_list=(2, 4, 8, 16)):
    t0 = time.perf_counter()
    details = {}
    ok = True
    base = unit_bump(2)
    for eq, a, seed0 in (("heat", 1.5, 40_000_000), ("wave", 1.5, 50_000_000)):
        g = GreenFunction(eq, 1)
        W = np.array([pairing_weights(rescale(base, n, PROBE_POINT), g, PROBE_GRID, rtol=1e-10)
                      for n in n_list])
        k0 = kernel_matrix(g, PROBE_GRID, [PROBE_POINT])[0]
        seeds = np.arange(configs, dtype=np.uint64) + np.uint64(seed0)
        X = sample_white_noise_batch(PROBE_GRID, a, seeds)
        gaps = np.abs(X @ W.T - (X @ k0)[:, None])
        good = np.all(gaps[:, -1:-3:-1] < gaps[:, -2:-4:-1], axis=1)
        details[eq] = {"passed": int(good.sum()), "median_gaps": np.median(gaps, axis=0).tolist()}
        ok &= good.sum() >= 0.9 * configs
    return _finish(8, "mollifier probe", ok, t0, 600.0, details)


# --- 9 -------------------------------------------------------------------------

def criterion_9(seeds=10_000):
    t0 = time.perf_counter()
    details = {}
    ok = True
    box = GridSpec(2, (0.0, 0.0), (1.0, 1.0), (1, 1))
    for label, m, ez2 in (("two_point", LevyMeasureSpec.two_point(3.0, 1.0), 1.0),
                          ("uniform", LevyMeasureSpec.uniform(3.0, 1.5), 1.5 ** 2 / 3.0)):
        one, left, right = np.empty(seeds), np.empty(seeds), np.empty(seeds)
        for s in range(seeds):
            jn = sample_jump_noise(box, m, 60_000_000 + s)
            one[s] = pair_jump_noise(jn, lambda p: np.ones(len(p)))
            left[s] = pair_jump_noise(jn, lambda p: (p[:, 0] < 0.5).astype(float))
            right[s] = pair_jump_noise(jn, lambda p: (p[:, 0] >= 0.5).astype(float))
        target = m.total_mass * box.volume * ez2
        var = float(np.var(one, ddof=1))
        corr = float(np.corrcoef(left, right)[0, 1])
        details[label] = {"variance": var, "target": target, "correlation": corr}
        ok &= abs(var / target - 1) <= 0.10 and abs(corr) < 0.05
    mismatches = []
    for d in D_LATTICE:
        g = GreenFunction("heat", d)
        for a in ALPHA_LATTICE:
            r = rajput_rosinski_functional(ShiftedKernel(g, (1.0,) + (0.0,) * d), StableParams(a))
            if r.finite != existence_verdict("heat", d, a).mild_exists:
                mismatches.append((d, a, r.value))
    details["functional_mismatches"] = mismatches
    ok &= not mismatches
    return _finish(9, "compound-Poisson noise and functional verdicts", ok, t0, 300.0, details)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def run_all(selection=None, echo=print):
    results = []
    for k in sorted(selection or CRITERIA):
        r = CRITERIA[k]()
        if echo:
            echo(r.line())
        results.append(r)
    return results
