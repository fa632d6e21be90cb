import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bprh import (
    FAMILIES,
    Exponential,
    ExponentialForm,
    InverseExponential,
    InverseWeibull,
    LinearFailureRate,
    Power,
    Rayleigh,
    ReflectedWeibull,
    Weibull,
    parse_baseline,
)
from bprh.verify import reference_baselines

BASELINES = reference_baselines()
IDS = [b.name for b in BASELINES]


def interior(b, n=41):
    return np.asarray(b.quantile(np.linspace(0.02, 0.98, n)))


def test_eight_families():
    assert set(FAMILIES) == {b.name for b in BASELINES}
    assert len(FAMILIES) == 8


def test_cdf_examples():
    assert Weibull(1.5, 1.2).cdf(0.0) == 0.0
    assert Weibull(1.5, 1.2).cdf(1.0) == pytest.approx(1 - math.exp(-1.5), abs=1e-15)
    assert Weibull(1.5, 1.2).cdf(1.0) == pytest.approx(0.776870, abs=5e-7)
    assert InverseWeibull(1.2).cdf(1e300) == 1.0
    assert InverseWeibull(1.2).cdf(np.inf) == 1.0


def test_pdf_examples():
    assert Exponential(1.0).pdf(1e-300) == pytest.approx(1.0)
    assert Rayleigh(1.0).pdf(1.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)
    assert Rayleigh(1.0).pdf(1.0) == pytest.approx(0.735759, abs=5e-7)
    for b in BASELINES:
        a, _ = b.support
        below = a - 1.0 if math.isfinite(a) else -1e300
        assert b.pdf(below) == 0.0
        assert b.cdf(below) == 0.0


def test_quantile_examples():
    assert Exponential(1.0).quantile(1 - math.exp(-1)) == pytest.approx(1.0, rel=1e-14)
    assert Weibull(1.5, 1.2).quantile(1 - math.exp(-1.5)) == pytest.approx(1.0, rel=1e-13)
    assert Power(2.0, 1.0).quantile(0.25) == pytest.approx(0.5, rel=1e-15)
    for u in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            Weibull(1.5, 1.2).quantile(u)


def test_reversed_hazard_examples():
    assert InverseExponential().reversed_hazard(1.0) == pytest.approx(1.0, rel=1e-15)
    c, b = 2.0, 3.0
    assert Power(c, b).reversed_hazard(b / 2) == pytest.approx(2 * c / b, rel=1e-14)
    with pytest.raises(ValueError, match="undefined"):
        Weibull(1.5, 1.2).reversed_hazard(0.0)


def test_support_endpoints():
    assert Exponential(1.0).support == (0.0, math.inf)
    assert ReflectedWeibull(1.0).support == (-math.inf, 0.0)
    assert Power(2.0, 3.0).support == (0.0, 3.0)


@pytest.mark.parametrize("b", BASELINES, ids=IDS)
def test_quantile_round_trip(b):
    u = np.random.default_rng(3).uniform(size=1000)
    u = u[(u > 0) & (u < 1)]
    assert np.max(np.abs(b.cdf(b.quantile(u)) - u)) < 1e-9


@pytest.mark.parametrize("b", BASELINES, ids=IDS)
def test_cdf_monotone(b):
    y = np.sort(np.concatenate([interior(b, 400), np.asarray(b.quantile([1e-6, 1 - 1e-6]))]))
    assert np.all(np.diff(b.cdf(y)) >= 0)


@pytest.mark.parametrize("b", BASELINES, ids=IDS)
def test_pdf_matches_derivative(b):
    y = interior(b)
    h = 1e-5 * np.maximum(1.0, np.abs(y))
    fd = (b.cdf(y + h) - b.cdf(y - h)) / (2 * h)
    assert np.max(np.abs(fd / b.pdf(y) - 1)) < 1e-6


@pytest.mark.parametrize("b", BASELINES, ids=IDS)
def test_pdf_integrates_to_one(b):
    a, c = b.support
    total, _ = integrate.quad(b.pdf, a, c, limit=200)
    assert total == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("b", BASELINES, ids=IDS)
def test_reversed_hazard_identity(b):
    y = interior(b)
    assert np.allclose(b.reversed_hazard(y) * b.cdf(y), b.pdf(y), rtol=1e-13, atol=0)
    assert np.all(b.reversed_hazard(y) > 0)


def test_linear_failure_rate_form():
    b = LinearFailureRate(0.8, 1.5)
    y = np.linspace(0.1, 3, 20)
    assert np.allclose(b.cdf(y), 1 - np.exp(-0.8 * y - 0.75 * y**2), rtol=1e-14)
    assert np.max(np.abs(b.cdf(b.quantile(np.linspace(0.01, 0.99, 99))) - np.linspace(0.01, 0.99, 99))) < 1e-12


def test_log_cdf_accurate_in_upper_tail():
    # F0 close to 1: log F0 must keep relative accuracy for high powers
    b = Weibull(1.5, 1.2)
    y = 20.0
    assert b.logcdf(y) == pytest.approx(-math.exp(-1.5 * y**1.2), rel=1e-12)


def test_clamping_outside_support():
    b = Power(2.0, 1.0)
    assert b.cdf(-1.0) == 0.0 and b.cdf(2.0) == 1.0
    assert ReflectedWeibull(0.7).cdf(5.0) == 1.0


def test_parse_baseline():
    b = parse_baseline("weibull:1.5,1.2")
    assert b == Weibull(1.5, 1.2)
    assert str(b) == "weibull:1.5,1.2"
    assert parse_baseline("iw:1.2") == InverseWeibull(1.2)
    assert parse_baseline(str(LinearFailureRate(0.8, 1.5))) == LinearFailureRate(0.8, 1.5)
    with pytest.raises(ValueError):
        parse_baseline("gamma:1,2")
    with pytest.raises(ValueError):
        parse_baseline("weibull:1.5")


def test_positive_parameters_required():
    with pytest.raises(ValueError, match="lam"):
        Weibull(-1.0, 1.2)
    with pytest.raises(ValueError):
        Power(2.0, 0.0)


def test_exponential_form():
    b = ExponentialForm(1.3, 2.0)
    y = np.array([-1.0, 0.0, 1.5])
    assert np.allclose(b.cdf(y), np.exp(1.3 * (y - 2.0)), rtol=1e-15)
    assert b.cdf(2.5) == 1.0


@settings(max_examples=60, deadline=None)
@given(
    lam=st.floats(0.1, 5), beta=st.floats(0.3, 4),
    u=st.floats(1e-6, 1 - 1e-6),
)
def test_weibull_round_trip_property(lam, beta, u):
    b = Weibull(lam, beta)
    assert abs(b.cdf(b.quantile(u)) - u) < 1e-9


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.2, 5), lo=st.floats(0.01, 10), width=st.floats(1e-3, 10))
def test_inverse_weibull_monotone_property(alpha, lo, width):
    b = InverseWeibull(alpha)
    assert b.cdf(lo) <= b.cdf(lo + width)
