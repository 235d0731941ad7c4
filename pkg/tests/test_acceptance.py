"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import csv
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from kernhazard import asymptotics as asy
from kernhazard.estimators import (
    EstimatorSpec,
    SortedSample,
    direct_density_ratio,
    direct_hazard,
    naive_hazard,
    terrell_scott_hazard,
)
from kernhazard.kernels import KERNELS, epanechnikov
from kernhazard.models import Exponential, Gamma, ScaledBeta, Uniform, Weibull
from kernhazard.montecarlo import SimulationSpec, normality_check, simulate

# symbolic-differentiation values of a4 with A14 = 3/35
A4_GOLDEN = [
    (Exponential(1.0), 0.0, 0.0),
    (Exponential(1.0), 0.5, 0.0),
    (Exponential(2.0), 0.3, 0.0),
    (Uniform(1.0), 0.3, 9.2928495834337683866),
    (Uniform(2.0), 0.5, 0.15607376924249352233),
]


def run_tables(tmp_path, *args):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "kernhazard.cli", "tables", "--output", str(tmp_path), *args],
                          capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    assert proc.returncode == 0, proc.stderr
    return elapsed


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def test_criterion_1_table1(tmp_path, verdict):
    elapsed = run_tables(tmp_path, "--table", "1")
    rows = read_csv(tmp_path / "table1.csv")
    errs = [abs(float(r["value"]) - float(r["paper"])) / abs(float(r["paper"])) for r in rows]
    bad = [r for r, e in zip(rows, errs) if e > 0.01]
    reported = read_csv(tmp_path / "discrepancies.csv")
    ok = len(rows) == 96 and len(reported) == len(bad) == 0 and elapsed < 5
    verdict(1, "Table 1 reproduction within 1%", ok,
            f"{len(rows) - len(bad)}/{len(rows)} cells, max rel err {max(errs):.2e}, {elapsed:.2f}s")


def _scipy_least_amse(model, est, eps):
    # independent route: scipy.stats density, numerical f', f'', scipy survival
    ref = stats.beta(model.r, model.s, scale=model.scale)
    x = ref.ppf(eps)
    d = 1e-4 * min(x, model.scale - x)
    f = ref.pdf
    f0 = f(x)
    f1 = (-f(x + 2 * d) + 8 * f(x + d) - 8 * f(x - d) + f(x - 2 * d)) / (12 * d)
    f2 = (-f(x + 2 * d) + 16 * f(x + d) - 30 * f0 + 16 * f(x - d) - f(x - 2 * d)) / (12 * d * d)
    m = ref.sf(x)
    if est == "direct":
        b = 0.1 * (m * (m * f2 + 4 * f0 * f1) + 3 * f0 ** 3) / m ** 5
        v = 0.3 * f0 / m
    else:
        b = 0.1 * (m * f2 + f0 * f1) / m ** 2
        v = 0.3 * f0 / m ** 2
    h = (v / (4 * b * b)) ** 0.2
    return h ** 4 * b * b + v / h


def test_criterion_2_tables_2_to_4(tmp_path, verdict):
    elapsed = run_tables(tmp_path, "--table", "2", "--table", "3", "--table", "4")
    reported = {(r["table"], r["params"], r["estimator"], r["epsilon"]) for r in read_csv(tmp_path / "discrepancies.csv")}
    matched = {"table2": 0, "table3": 0, "table4": 0}
    total = dict(matched)
    unreported, unconfirmed, degenerate = [], [], 0
    for name, fam in (("table2", "gamma"), ("table3", "weibull"), ("table4", "beta")):
        for r in read_csv(tmp_path / f"{name}.csv"):
            total[name] += 1
            value, paper = float(r["value"]), float(r["paper"])
            if math.isnan(value):
                degenerate += 1
                continue
            if abs(value - paper) <= 0.02 * abs(paper):
                matched[name] += 1
                continue
            key = (name, r["params"], r["estimator"], r["epsilon"])
            if key not in reported:
                unreported.append(key)
            if fam != "beta":
                unconfirmed.append(key)
                continue
            rr, ss = (float(t) for t in r["params"].split(","))
            oracle = _scipy_least_amse(ScaledBeta(rr, ss, 100.0), r["estimator"], float(r["epsilon"]))
            if abs(oracle - value) > 1e-6 * abs(value):
                unconfirmed.append(key)
    # gamma and Weibull must match outright; beta cells that disagree with the reference
    # table must be listed in the discrepancy report and reproduced by the independent oracle
    ok = (matched["table2"] == total["table2"] and matched["table3"] == total["table3"]
          and not unreported and not unconfirmed and elapsed < 10)
    n_disc = total["table4"] - matched["table4"]
    verdict(2, "Tables 2-4 least AMSE within 2% (discrepancy-report rule)", ok,
            f"gamma {matched['table2']}/{total['table2']}, weibull {matched['table3']}/{total['table3']}, "
            f"beta {matched['table4']}/{total['table4']} ({n_disc} beta cells reported as discrepancies and "
            f"reproduced by an independent scipy oracle), {degenerate} degenerate, {elapsed:.2f}s")


def test_criterion_3_exponential_ratio(verdict):
    e = Exponential(1.0)
    worst = 0.0
    for eps in (0.25, 0.5, 0.75):
        x0 = e.quantile(eps)
        for n, h in ((1, 1.0), (100, 0.3), (10_000, 0.05)):
            ratio = asy.amse("naive", e, x0, n, h).amse / asy.amse("direct", e, x0, n, h).amse
            worst = max(worst, abs(ratio - math.exp(x0)) / math.exp(x0))
    verdict(3, "exponential AMSE ratio equals exp(lambda x0)", worst <= 1e-12, f"max rel err {worst:.1e}")


PAIRS = [
    (Gamma(0.5, 100.0), 0.5, "direct"), (Gamma(10.0, 100.0), 0.25, "direct"),
    (Gamma(10.0, 100.0), 0.9, "naive"), (Weibull(0.5, 100.0), 0.5, "naive"),
    (Weibull(10.0, 100.0), 0.75, "direct"), (ScaledBeta(2.0, 5.0, 100.0), 0.5, "direct"),
    (ScaledBeta(5.0, 2.0, 1.0), 0.1, "naive"), (ScaledBeta(0.5, 0.5, 100.0), 0.95, "direct"),
    (Uniform(2.0), 0.3, "direct"), (Gamma(2.0, 1.0), 0.975, "naive"),
]


def test_criterion_4_optimal_bandwidth(verdict):
    start = time.perf_counter()
    worst = 0.0
    for model, eps, kind in PAIRS:
        x0 = model.quantile(eps)
        for n in (1, 100):
            h = asy.optimal_bandwidth(kind, model, x0, n)
            hn = asy.numeric_optimal_bandwidth(kind, model, x0, n)
            worst = max(worst, abs(hn - h) / h)
    elapsed = time.perf_counter() - start
    verdict(4, "closed-form h*/h** equal numeric argmin", worst <= 1e-3 and elapsed < 5,
            f"{len(PAIRS)} pairs, max rel diff {worst:.1e}, {elapsed:.2f}s")


def _brute_direct(x, kernel, h, pts):
    eta = lambda y: np.mean(np.where(x <= y, y - x, 0.0))  # noqa: E731
    mx = np.array([xj - eta(xj) for xj in x])
    return np.array([kernel.eval((mx - (p - eta(p))) / h).sum() / (len(x) * h) for p in pts])


def _brute_ratio(x, y, kernel, h, pts):
    g = lambda t: np.mean(y <= t)  # noqa: E731
    gx = np.array([g(xj) for xj in x])
    return np.array([kernel.eval((g(p) - gx) / h).sum() / (len(x) * h) for p in pts])


def test_criterion_5_oracle_equivalence(verdict):
    rng = np.random.default_rng(20240501)
    kernels = list(KERNELS.values())
    worst = 0.0
    for i in range(200):
        n = int(rng.integers(1, 201))
        x = rng.gamma(rng.uniform(0.3, 5), size=n) * rng.uniform(0.01, 100)
        y = rng.gamma(rng.uniform(0.3, 5), size=int(rng.integers(1, 201))) * x.mean()
        k = kernels[i % len(kernels)]
        h = rng.uniform(0.02, 1.5) * (x.std() + 1e-3 * x.mean())
        pts = rng.uniform(x.min() - h, x.max() + h, 4)
        a, b = direct_hazard(x, k, h, pts), _brute_direct(x, k, h, pts)
        c, d = direct_density_ratio(x, y, k, 0.25, pts), _brute_ratio(x, y, k, 0.25, pts)
        scale = max(1.0, np.abs(b).max(), np.abs(d).max())
        worst = max(worst, np.abs(a - b).max() / scale, np.abs(c - d).max() / scale)
    verdict(5, "direct estimators equal O(n^2) brute force", worst <= 1e-12,
            f"200 instances, max rel diff {worst:.1e}")


def test_criterion_6_equivariance(verdict):
    rng = np.random.default_rng(6)
    # location: exact on data whose differences are exact in floating point
    loc_fail = 0
    for _ in range(50):
        x = rng.integers(-4000, 4000, size=int(rng.integers(2, 150))) / 32.0
        pts = rng.integers(-4200, 4200, size=5) / 32.0
        base = direct_hazard(x, epanechnikov, 3.0, pts)
        a = float(rng.integers(-10_000, 10_000))
        loc_fail += int(not np.array_equal(direct_hazard(x + a, epanechnikov, 3.0, pts + a), base))
    # scale: H(cX; ch, c x0) = H(X; h, x0) / c
    worst_scale = 0.0
    for _ in range(50):
        x = rng.lognormal(size=int(rng.integers(2, 150)))
        pts = rng.uniform(0, x.max(), 5)
        base = direct_hazard(x, epanechnikov, 0.4, pts)
        c = float(np.exp(rng.uniform(-5, 5)))
        got = c * direct_hazard(c * x, epanechnikov, 0.4 * c, c * pts)
        worst_scale = max(worst_scale, float(np.max(np.abs(got - base) / np.maximum(np.abs(base), 1e-300))))
    # nonnegativity on fuzzed inputs
    neg = 0
    for _ in range(1000):
        x = rng.standard_cauchy(size=int(rng.integers(1, 60))) * 10 ** rng.uniform(-3, 3)
        h = 10 ** rng.uniform(-4, 3)
        pts = rng.uniform(x.min() - 2 * h, x.max() + 2 * h, 3)
        s = SortedSample(x)
        vals = np.concatenate([
            np.atleast_1d(direct_hazard(s, epanechnikov, h, pts)),
            np.atleast_1d(terrell_scott_hazard(s, epanechnikov, h, pts)),
            np.atleast_1d(naive_hazard(s, epanechnikov, h, pts, on_degenerate="nan")),
        ])
        neg += int(np.any(vals[~np.isnan(vals)] < 0))
    ok = loc_fail == 0 and worst_scale <= 1e-12 and neg == 0
    verdict(6, "location exact, scale equivariant, nonnegative", ok,
            f"location mismatches {loc_fail}/50, scale max rel {worst_scale:.1e}, negative {neg}/1000")


def test_criterion_7_normality(verdict):
    start = time.perf_counter()
    e = Exponential(1.0)
    res = normality_check(e, e.quantile(0.5), 2000, c=1.0, d=1 / 3, replications=2000, master_seed=7, workers=4)
    elapsed = time.perf_counter() - start
    verdict(7, "standardised direct estimator is N(0,1)", res.pvalue > 0.01 and elapsed < 60,
            f"KS D={res.statistic:.4f}, p={res.pvalue:.3f}, {elapsed:.1f}s")


def test_criterion_8_variance_dominance(verdict):
    start = time.perf_counter()
    model = Gamma(0.5, 100.0)
    n = 400
    # common normal-reference bandwidth in data units
    h = 1.06 * model.std() * n ** -0.2
    pts = [model.quantile(q) for q in (0.25, 0.5, 0.75)]
    spec = SimulationSpec(model, n, 2000, (EstimatorSpec("direct", epanechnikov, h),
                                           EstimatorSpec("naive", epanechnikov, h)), master_seed=8)
    res = simulate(spec, points=pts, workers=4)
    elapsed = time.perf_counter() - start
    ok = bool(np.all(res.variance[0] < res.variance[1])) and res.valid and elapsed < 60
    verdict(8, "direct variance below naive variance", ok,
            "var ratios " + ", ".join(f"{a / b:.3f}" for a, b in zip(res.variance[0], res.variance[1]))
            + f", {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_9_table5(tmp_path, verdict):
    elapsed = run_tables(tmp_path, "--table", "5", "--replications", "10000", "--seed", "0", "--workers", "4")
    rows = read_csv(tmp_path / "table5.csv")
    rates = {tuple(float(t) for t in r["params"].split(","))[:2]: (float(r["value"]), float(r["paper"]))
             for r in rows}
    parts, ok = [], elapsed < 900
    for key in [(3.0, 3.0), (2.0, 5.0), (5.0, 2.0)]:
        got, pub = rates[key]
        ok &= got > 0 and abs(got - pub) <= 5.0
        parts.append(f"B{key}: {got:.2f} vs {pub}")
    for key in [(0.5, 0.5), (1.0, 1.0)]:
        got, pub = rates[key]
        ok &= got > 0
        parts.append(f"B{key}: {got:.2f} (sign)")
    verdict(9, "Table 5 improvement rates", ok, "; ".join(parts) + f"; {elapsed:.0f}s")


FAMILIES = [Exponential(1.3), Uniform(2.0), Gamma(0.5, 100.0), Gamma(10.0, 100.0), Weibull(0.5, 100.0),
            Weibull(10.0, 100.0), ScaledBeta(2.0, 5.0, 100.0), ScaledBeta(0.5, 0.5, 1.0)]


def test_criterion_10_derivatives(verdict):
    worst_fd = 0.0
    for model in FAMILIES:
        for eps in (0.2, 0.45, 0.8):
            x = model.quantile(eps)
            lo, hi = model.support
            d = 1e-3 * min(x - lo, hi - x)
            for k in range(1, 5):
                g = lambda t: model.pdf_deriv(t, k - 1)  # noqa: E731
                fd = (-g(x + 2 * d) + 8 * g(x + d) - 8 * g(x - d) + g(x - 2 * d)) / (12 * d)
                exact = model.pdf_deriv(x, k)
                if model.family == "uniform":
                    # constant density: both sides must vanish exactly
                    worst_fd = max(worst_fd, 0.0 if exact == fd == 0.0 else math.inf)
                    continue
                worst_fd = max(worst_fd, abs(fd - exact) / abs(exact))
    worst_a2 = 0.0
    for model in FAMILIES:
        for eps in np.linspace(0.05, 0.95, 10):
            x = model.quantile(eps)
            b = asy.direct_bias_coeff(model, x)
            diff = abs(asy.a2(model, x) - b)
            worst_a2 = max(worst_a2, diff / abs(b) if b else diff)
    worst_a4 = max(abs(asy.a4(m, x) - want) / max(abs(want), 1.0) for m, x, want in A4_GOLDEN)
    ok = worst_fd < 1e-6 and worst_a2 <= 1e-10 and worst_a4 <= 1e-10
    verdict(10, "derivatives, a2 identity, a4 symbolic oracle", ok,
            f"fd {worst_fd:.1e}, a2 {worst_a2:.1e}, a4 {worst_a4:.1e}")


def test_criterion_11_determinism(verdict):
    spec = SimulationSpec(ScaledBeta(2.0, 5.0, 1.0), 100, 400,
                          (EstimatorSpec("direct", epanechnikov, 0.1), EstimatorSpec("terrell-scott", epanechnikov, 0.2)),
                          master_seed=2**63 - 25)
    runs = [simulate(spec), simulate(spec), simulate(spec, workers=4, chunk=37), simulate(spec, workers=3, chunk=100)]
    ok = all(np.array_equal(r.estimates, runs[0].estimates) and np.array_equal(r.mise, runs[0].mise)
             and r.improvement_rate == runs[0].improvement_rate for r in runs[1:])
    verdict(11, "serial and parallel runs bit-identical", ok, f"{len(runs)} runs, MISE {runs[0].mise}")
