import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from bprh import BPRHM1, BPRHM2, InverseWeibull, Weibull
from bprh.gof import (
    GofReport,
    _dominance_counts,
    bivariate_statistic,
    ecdf,
    format_gof_table,
    gof_suite,
    kolmogorov_sf,
    ks_bivariate,
    ks_statistic,
    ks_univariate,
    observed_cdf,
    observed_max_subsample,
)
from bprh.simulate import CensoredSample, draw_pairs, simulate_sample

M1 = BPRHM1(Weibull(1.5, 1.2), 1.3, 1.2, 1.0)
M2 = BPRHM2(InverseWeibull(1.2), 1.2, 1.4, 1.6, 1.8)
M3 = BPRHM2(InverseWeibull(2.1), 1.5, 1.6, 2.0, 1.8)


def test_ecdf_examples():
    F = ecdf([3.0])
    assert F(3.0) == 1.0 and F(2.999) == 0.0 and F(10.0) == 1.0
    F = ecdf([3.0, 1.0, 2.0])
    assert F(2.0) == pytest.approx(2 / 3) and F(3.0) == 1.0 and F(0.5) == 0.0
    with pytest.raises(ValueError):
        ecdf([])


def test_kolmogorov_sf_matches_scipy():
    x = np.linspace(0.05, 4.0, 400)
    assert np.max(np.abs(kolmogorov_sf(x) - special.kolmogorov(x))) < 1e-13


def test_reference_p_values():
    assert kolmogorov_sf(math.sqrt(100) * 0.0484) == pytest.approx(0.973, abs=0.02)
    assert kolmogorov_sf(math.sqrt(100) * 0.1803) == pytest.approx(0.003, abs=0.002)


def test_statistic_matches_scipy():
    x = np.random.default_rng(1).normal(size=300)
    assert ks_statistic(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-15)


def test_plug_in_bound():
    n = 100
    b = Weibull(1.5, 1.2)
    x = b.quantile(np.arange(1, n + 1) / (n + 1))
    r = ks_univariate(x, b.cdf)
    assert r.statistic <= 1 / (n + 1) + 1 / n


def test_invariance_under_log_transform():
    b = Weibull(1.5, 1.2)
    x = np.asarray(b.quantile(np.random.default_rng(2).uniform(size=200)))
    d = ks_statistic(x, b.cdf)
    d_log = ks_statistic(np.log(x), lambda t: b.cdf(np.exp(t)))
    assert abs(d - d_log) < 1e-12


def test_univariate_errors():
    with pytest.raises(ValueError, match="at least 5"):
        ks_univariate([1.0, 2.0, 3.0, 4.0], lambda t: t)
    with pytest.raises(ValueError, match="constant"):
        ks_univariate(np.arange(1.0, 10.0), lambda t: np.full_like(t, 0.5))
    with pytest.raises(ValueError, match="replicates"):
        ks_univariate(np.arange(1.0, 10.0) / 10, lambda t: t, mc_replicates=50)


def test_monte_carlo_refinement_agrees():
    x = np.asarray(Weibull(1.5, 1.2).quantile(np.random.default_rng(4).uniform(size=50)))
    a = ks_univariate(x, Weibull(1.5, 1.2).cdf)
    m = ks_univariate(x, Weibull(1.5, 1.2).cdf, mc_replicates=4000, seed=3)
    assert m.method == "monte_carlo" and m.replicates == 4000
    assert m.p_value == pytest.approx(a.p_value, abs=0.05)


def test_p_values_uniform_under_null():
    p = []
    for s in range(500):
        t1, t2 = draw_pairs(M1, 100, seed=s, method="oracle")
        p.append(ks_univariate(np.maximum(t1, t2), M1.max_cdf).p_value)
    assert stats.kstest(p, "uniform").pvalue > 0.01


def test_report_validation():
    with pytest.raises(ValueError):
        GofReport("max", 1.5, 0.5, "asymptotic", 10)
    with pytest.raises(ValueError):
        GofReport("max", 0.1, -0.1, "asymptotic", 10)
    with pytest.raises(ValueError):
        GofReport("bivariate", 0.1, 0.5, "monte_carlo", 10, replicates=100)
    r = GofReport("max", 0.1, 0.04, "asymptotic", 10)
    assert r.rejects(0.05) and not r.rejects(0.01)


def _brute_force(y1, y2, F):
    counts = np.array([np.count_nonzero((y1 <= a) & (y2 <= b)) for a, b in zip(y1, y2)])
    return np.max(np.abs(counts / y1.size - F)), counts


def test_bivariate_statistic_against_brute_force():
    rng = np.random.default_rng(5)
    y1 = rng.integers(0, 30, 400).astype(float)  # many ties on both axes
    y2 = rng.integers(0, 30, 400).astype(float)
    F = rng.uniform(size=400)
    d, counts = _brute_force(y1, y2, F)
    assert bivariate_statistic(y1, y2, F) == pytest.approx(d, abs=1e-15)
    assert np.array_equal(_dominance_counts(y1, y2), counts)


def test_bivariate_fenwick_path_matches_dense():
    t1, t2 = draw_pairs(M1, 2500, seed=6, method="oracle")
    F = M1.joint_cdf(t1, t2)
    below = (t1[None, :] <= t1[:, None]) & (t2[None, :] <= t2[:, None])
    dense = np.max(np.abs(below.mean(axis=1) - F))
    assert bivariate_statistic(t1, t2, F) == pytest.approx(dense, abs=1e-15)


def test_bivariate_null_and_magnitude():
    s = simulate_sample(M1, 100, seed=10, method="oracle")
    r = ks_bivariate(s, M1, replicates=500, seed=1)
    assert r.method == "monte_carlo" and r.replicates == 500
    assert 0.02 < r.statistic < 0.3
    assert ks_bivariate(s, M1, replicates=500, seed=1).p_value == r.p_value


def test_bivariate_detects_shift():
    s = simulate_sample(M1, 100, seed=11)
    shifted = CensoredSample.uncensored(s.y1 + 2.0, s.y2 + 2.0)
    assert ks_bivariate(shifted, M1, replicates=500).p_value < 0.005


def test_bivariate_errors():
    s = simulate_sample(M1, 9, seed=1)
    with pytest.raises(ValueError, match="at least 10"):
        ks_bivariate(s, M1)
    s = simulate_sample(M1, 20, seed=1)
    with pytest.raises(ValueError, match="replicates"):
        ks_bivariate(s, M1, replicates=199)


def test_observed_cdf_matches_quadrature():
    z = 1.3
    F = lambda t: M3.marginal_cdf(1, t)
    f = lambda t: M3.marginal_pdf(1, t)
    G = observed_cdf(F, (z,))
    head, _ = integrate.quad(lambda t: f(t) * t / z, 0, z, limit=200)
    norm = head + (1.0 - F(z))
    for t in (0.5, 1.0, 1.3, 2.0, 4.0):
        num, _ = integrate.quad(lambda s: f(s) * min(s / z, 1.0), 0, t, points=[min(t, z)], limit=200)
        assert G(t) == pytest.approx(num / norm, abs=1e-9)
    assert observed_cdf(F, ())(1.0) == pytest.approx(F(1.0))


def test_observed_subsamples_follow_adjusted_laws():
    s = simulate_sample(M3, 50_000, 0.2, seed=12)
    z1, z2 = s.plan.z1, s.plan.z2
    G1 = observed_cdf(lambda t: M3.marginal_cdf(1, t), (z1,))
    assert stats.kstest(s.y1[s.delta1 == 1], G1).pvalue > 0.01
    Gm = observed_cdf(M3.max_cdf, (z1, z2))
    assert stats.kstest(observed_max_subsample(s), Gm).pvalue > 0.01
    # the naive comparison against the uncensored marginal is biased
    assert stats.kstest(s.y1[s.delta1 == 1], lambda t: M3.marginal_cdf(1, t)).pvalue < 1e-6


def test_suite_and_table():
    s = simulate_sample(M2, 100, seed=13)
    reports = gof_suite(s, M2, replicates=200, seed=2)
    assert [r.target for r in reports] == ["bivariate", "max", "marginal1", "marginal2"]
    text = format_gof_table(reports, "title")
    for label in ("Bivariate", "Max{Y1,Y2}", "Y1", "Y2"):
        assert label in text
