import math

import numpy as np
import pytest
from scipy import stats

from kernhazard.models import (
    DomainError,
    Exponential,
    Gamma,
    ScaledBeta,
    SurvivalUnderflowError,
    Uniform,
    Weibull,
    parse_model,
)

MODELS = [
    Exponential(1.0),
    Exponential(2.5),
    Uniform(3.0),
    Gamma(0.5, 100.0),
    Gamma(10.0, 100.0),
    Weibull(0.5, 100.0),
    Weibull(10.0, 100.0),
    ScaledBeta(0.5, 0.5, 100.0),
    ScaledBeta(2.0, 5.0, 1.0),
    ScaledBeta(5.0, 2.0, 4.0),
]

SCIPY = {
    "exponential": lambda m: stats.expon(scale=1 / m.rate),
    "uniform": lambda m: stats.uniform(0, m.b),
    "gamma": lambda m: stats.gamma(m.shape, scale=m.scale),
    "weibull": lambda m: stats.weibull_min(m.shape, scale=m.scale),
    "beta": lambda m: stats.beta(m.r, m.s, scale=m.scale),
}


def _fd(fun, x, step):
    # five-point central difference
    return (-fun(x + 2 * step) + 8 * fun(x + step) - 8 * fun(x - step) + fun(x - 2 * step)) / (12 * step)


@pytest.mark.parametrize("model", MODELS, ids=str)
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_pdf_derivatives_match_finite_differences(model, order):
    for eps in (0.25, 0.5, 0.75):
        x = model.quantile(eps)
        step = 1e-3 * x
        got = model.pdf_deriv(x, order)
        fd = _fd(lambda t: model.pdf_deriv(t, order - 1), x, step)
        scale = max(abs(got), abs(fd))
        # absolute floor only matters where the derivative is exactly zero
        floor = 1e-10 * model.pdf(x) / x ** order
        assert abs(got - fd) <= 1e-6 * scale + floor, (x, got, fd)


@pytest.mark.parametrize("model", MODELS, ids=str)
def test_against_scipy(model):
    ref = SCIPY[model.family](model)
    q = np.array([0.01, 0.05, 0.3, 0.5, 0.8, 0.95, 0.99])
    x = ref.ppf(q)
    np.testing.assert_allclose(model.pdf(x), ref.pdf(x), rtol=1e-10)
    np.testing.assert_allclose(model.cdf(x), ref.cdf(x), rtol=1e-10)
    np.testing.assert_allclose(model.sf(x), ref.sf(x), rtol=1e-10)
    np.testing.assert_allclose(model.ppf(q), x, rtol=1e-10)
    assert model.mean() == pytest.approx(ref.mean(), rel=1e-12)
    assert model.std() == pytest.approx(ref.std(), rel=1e-12)


@pytest.mark.parametrize("model", MODELS, ids=str)
def test_quantile_roundtrip(model):
    for eps in (1e-6, 0.05, 0.5, 0.975, 1 - 1e-6):
        assert float(model.cdf(model.quantile(eps))) == pytest.approx(eps, rel=1e-10)


@pytest.mark.parametrize("model", MODELS, ids=str)
def test_sampler_ks(model):
    x = model.sample(100_000, seed=12345)
    assert stats.kstest(x, lambda t: model.cdf(t)).statistic < 0.01
    np.testing.assert_array_equal(x, model.sample(100_000, seed=12345))


def test_spec_examples():
    assert Exponential(1.0).pdf_deriv(0.0, 0) == 1.0
    assert Uniform(1.0).pdf_deriv(0.5, 1) == 0.0
    np.testing.assert_allclose(Exponential(3.0).hazard([0.0, 1.0, 7.5]), 3.0, rtol=1e-14)
    u = Uniform(2.0)
    np.testing.assert_allclose(u.hazard([0.0, 0.5, 1.9]), 1 / (2.0 - np.array([0.0, 0.5, 1.9])), rtol=1e-14)


def test_weibull_hazard_is_power_law():
    w = Weibull(3.0, 2.0)
    x = np.array([0.5, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(w.hazard(x) / x ** 2, 3.0 / 2.0 ** 3, rtol=1e-12)


def test_weibull_shape_one_is_exponential():
    w, e = Weibull(1.0, 4.0), Exponential(0.25)
    x = np.array([0.1, 1.0, 5.0, 12.0])
    np.testing.assert_allclose(w.pdf(x), e.pdf(x), rtol=1e-14)
    np.testing.assert_allclose(w.sf(x), e.sf(x), rtol=1e-14)
    np.testing.assert_allclose(w.hazard(x), 0.25, rtol=1e-13)


def test_gamma_shape_one_is_exponential():
    g, e = Gamma(1.0, 2.0), Exponential(0.5)
    x = np.array([0.1, 1.0, 5.0])
    np.testing.assert_allclose(g.hazard(x), e.hazard(x), rtol=1e-13)


def test_beta_hazard_diverges_at_right_end():
    b = ScaledBeta(2.0, 5.0, 3.0)
    x = 3.0 - np.logspace(-1, -4, 12)
    hz = b.hazard(x)
    assert np.all(np.diff(hz) > 0)
    assert hz[-1] > 1e3


def test_domain_errors():
    with pytest.raises(DomainError):
        Gamma(2.0, 1.0).pdf_deriv(0.0, 1)
    with pytest.raises(DomainError):
        ScaledBeta(2.0, 2.0, 1.0).pdf_deriv(1.0, 0)
    with pytest.raises(ValueError):
        Exponential(1.0).pdf_deriv(1.0, 5)
    with pytest.raises(SurvivalUnderflowError):
        Exponential(1.0).survival(800.0)
    with pytest.raises(ValueError):
        Exponential(1.0).quantile(1.0)
    with pytest.raises(ValueError):
        Gamma(-1.0, 1.0)


def test_pdf_zero_outside_support():
    assert Uniform(1.0).pdf(1.5) == 0.0
    assert Gamma(2.0, 1.0).pdf(-1.0) == 0.0
    assert ScaledBeta(2.0, 2.0, 1.0).pdf(1.0) == 0.0


def test_parse_model():
    m = parse_model("gamma:shape=1/2,scale=100")
    assert m == Gamma(0.5, 100.0)
    assert parse_model("exp:lambda=2") == Exponential(2.0)
    assert parse_model("beta:r=2,s=5,sigma=1") == ScaledBeta(2.0, 5.0, 1.0)
    assert parse_model("weibull:q=10,scale=100") == Weibull(10.0, 100.0)
    assert parse_model(str(Weibull(10.0, 100.0))) == Weibull(10.0, 100.0)
    with pytest.raises(ValueError):
        parse_model("lognormal:mu=0")
    with pytest.raises(ValueError):
        parse_model("gamma:alpha=2")


def test_sample_accepts_generator():
    rng = np.random.default_rng(7)
    x = Exponential(1.0).sample(10, rng)
    assert x.shape == (10,) and np.all(x > 0)
    assert math.isfinite(x.sum())
