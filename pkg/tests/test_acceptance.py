"""Acceptance criteria, one test per criterion (plus explicit known failures).

Each test records a PASS/FAIL line shown in the terminal summary under
"acceptance criteria".  Run with ``pytest tests/test_acceptance.py -v``.
"""

import time

import numpy as np
import pytest

from bprh import BPRHM1, BPRHM2, InverseWeibull, Weibull
from bprh.datasets import load_football
from bprh.fit import aic_table, mle_fit
from bprh.gof import ks_bivariate, ks_univariate, observed_cdf, observed_max_subsample
from bprh.simulate import draw_pairs, make_plan, simulate_sample
from bprh.verify import (
    FAMILY_TRANSFORMS,
    MomentCheckConfig,
    check_brlmp,
    check_conditional_moment_recursion,
    check_functional_equation,
    check_max_moment_recursion,
    check_orthant_moment_recursion,
    check_family_transform,
    reference_baselines,
)
from bprh import ExponentialForm
from oracles import marginal_by_quadrature, orthant_mass

pytestmark = pytest.mark.acceptance

M1 = BPRHM1(Weibull(1.5, 1.2), 1.3, 1.2, 1.0)
M2 = BPRHM2(InverseWeibull(1.2), 1.2, 1.4, 1.6, 1.8)
M3 = BPRHM2(InverseWeibull(2.1), 1.5, 1.6, 2.0, 1.8)
SEEDS = range(200)


def test_c1_deterministic_identities(record):
    t0 = time.perf_counter()
    worst_fe = worst_t1 = 0.0
    ok = True
    for b in reference_baselines():
        for m in (BPRHM1(b, 1.3, 1.2, 1.0), BPRHM2(b, 1.2, 1.4, 1.6, 1.8)):
            r = check_functional_equation(m, 1000, tol=1e-10)
            ok &= r.passed and r.n_points >= 900
            worst_fe = max(worst_fe, r.max_residual)
            if b.name in FAMILY_TRANSFORMS and b.name != "weibull":
                r = check_family_transform(m, tol=1e-12)
                ok &= r.passed
                worst_t1 = max(worst_t1, r.max_residual)
    brl = check_brlmp(BPRHM1(ExponentialForm(1.0, 1.0), 1.3, 1.2, 1.0), 1000, tol=1e-10)
    ok &= brl.passed and brl.n_points > 0
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10
    record(
        "C1 deterministic identities",
        ok,
        f"FE max {worst_fe:.1e} (<1e-10), BRLMP {brl.max_residual:.1e} (<1e-10), "
        f"family transforms {worst_t1:.1e} (<1e-12), {elapsed:.2f}s (<10s)",
    )
    assert ok


def test_c2_mixture_marginal(record):
    t0 = time.perf_counter()
    worst = 0.0
    n_points = 0
    cases = [(M2, 1), (M2, 2), (BPRHM2(InverseWeibull(1.2), 1.0, 1.5, 2.5, 1.8), 1), (BPRHM2(InverseWeibull(1.2), 1.0, 1.5, 2.5, 1.8), 2)]
    assert cases[2][0].is_degenerate(1)
    for m, i in cases:
        y = np.asarray(m.marginal_quantile(i, np.linspace(0.01, 0.99, 25)))
        worst = max(worst, float(np.max(np.abs(marginal_by_quadrature(m, i, y) - m.marginal_cdf(i, y)))))
        n_points += y.size
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 30 and n_points == 100
    record("C2 mixture marginal vs quadrature", ok, f"max |diff| {worst:.1e} over {n_points} points incl. degenerate branch, {elapsed:.1f}s")
    assert ok


def test_c3_singular_mass(record):
    t1, t2 = draw_pairs(M1, 10**6, seed=20240531, method="oracle")
    p = 1.0 / 3.5
    freq = float(np.mean(t1 == t2))
    se = np.sqrt(p * (1 - p) / 10**6)
    total = orthant_mass(M1, np.inf, np.inf)
    ok = abs(freq - p) < 3 * se and abs(total - 1) < 1e-5
    record("C3 singular mass", ok, f"tie freq {freq:.6f} vs {p:.6f} (z {abs(freq - p) / se:.2f}); total mass {total:.8f}")
    assert ok


def _moment_rows(perturb=0.0):
    cfg = MomentCheckConfig(mc_size=100_000, perturb=perturb)
    rows = check_max_moment_recursion(M1, cfg) + check_max_moment_recursion(M2, cfg)
    rows += check_conditional_moment_recursion(M2, cfg)
    rows += check_orthant_moment_recursion(M1, cfg)
    return rows


def test_c4_moment_suites(record):
    t0 = time.perf_counter()
    rows = [r for r in _moment_rows() if "above" not in r.check]
    var = [r for r in rows if r.quantity == "variance"]
    neg = _moment_rows(0.2)
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in var) and len(var) >= 3 * 4 and min(r.z for r in neg) > 10 and elapsed < 120
    ok_rec = all(r.passed for r in rows)
    record(
        "C4 moment suites",
        ok,
        f"{len(var)} variance constants, max z {max(r.z for r in var):.2f} (<=4); recursions n=1..3 all pass: {ok_rec}; "
        f"perturbed min z {min(r.z for r in neg):.1f} (>10); {elapsed:.1f}s",
    )
    assert ok and ok_rec


@pytest.mark.xfail(strict=True, reason="orthant region y_i > y_j: the stated coefficient alpha_i does not describe the truncated law")
def test_c4_orthant_above_diagonal(record):
    rows = [r for r in check_orthant_moment_recursion(M1, MomentCheckConfig()) if "above" in r.check]
    var = [r for r in rows if r.quantity == "variance"]
    ok = all(r.passed for r in var)
    record(
        "C4 orthant y_i > y_j (known failure)",
        ok,
        f"variance z {min(r.z for r in var):.0f}..{max(r.z for r in var):.0f} against 1/alpha_i^2",
        expected_failure=True,
    )
    assert ok


def _rejection_rates(model, p=0.0):
    plan = make_plan(model, p)
    zs = ((plan.z1,), (plan.z2,)) if plan.active else ((), ())
    Gm = observed_cdf(model.max_cdf, zs[0] + zs[1])
    G = [observed_cdf(lambda t, i=i: model.marginal_cdf(i, t), zs[i - 1]) for i in (1, 2)]
    rej = np.zeros(3)
    for s in SEEDS:
        S = simulate_sample(model, 100, p, seed=s, plan=plan)
        pv = [
            ks_univariate(observed_max_subsample(S), Gm).p_value,
            ks_univariate(S.y1[S.delta1 == 1], G[0]).p_value,
            ks_univariate(S.y2[S.delta2 == 1], G[1]).p_value,
        ]
        rej += np.array(pv) < 0.05
    return rej / len(SEEDS)


def test_c5_uncensored_regime(record):
    r1, r2 = _rejection_rates(M1), _rejection_rates(M2)
    ok = max(r1.max(), r2.max()) <= 0.09
    record("C5 uncensored univariate K-S regime", ok, f"rejection rates Max/Y1/Y2: BPRHM1 {r1.tolist()}, BPRHM2 {r2.tolist()} (<=0.09)")
    assert ok


def test_c6_censored_regime(record):
    S = simulate_sample(M3, 10**5, 0.2, seed=20240531)
    c1, c2 = S.censored_fraction()
    r = _rejection_rates(M3, 0.2)
    ok = 0.19 <= c1 <= 0.21 and 0.19 <= c2 <= 0.21 and r.max() <= 0.09
    record("C6 censored regime", ok, f"censored fractions {c1:.4f}, {c2:.4f}; rejection rates {r.tolist()} (<=0.09)")
    assert ok


@pytest.fixture(scope="module")
def football_fits():
    s = load_football()
    fits = {}
    for name in ("exponential", "weibull", "rayleigh", "lfr"):
        fits[name] = mle_fit("bprhm1", name, s)
    return s, fits


def test_c7_football_ks(record, football_fits):
    s, fits = football_fits
    m = fits["weibull"].model
    ks = [
        ks_univariate(np.maximum(s.y1, s.y2), m.max_cdf).statistic,
        ks_univariate(s.y1, lambda t: m.marginal_cdf(1, t)).statistic,
        ks_univariate(s.y2, lambda t: m.marginal_cdf(2, t)).statistic,
    ]
    ref = [0.1137, 0.1584, 0.1300]
    ok = all(abs(a - b) <= 0.03 for a, b in zip(ks, ref)) and s.n == 42
    record("C7 football Weibull K-S", ok, "Max/Y1/Y2 " + ", ".join(f"{a:.4f} (ref {b})" for a, b in zip(ks, ref)))
    assert ok


@pytest.mark.xfail(strict=True, reason="reference AIC values and ordering are not reproduced by the shipped football data")
def test_c7_football_aic(record, football_fits):
    _, fits = football_fits
    rows = aic_table(list(fits.values()))
    order = [r["label"] for r in rows]
    aic = {r["label"]: r["aic"] for r in rows}
    ok = (
        aic["weibull"] < aic["lfr"] < aic["rayleigh"] < aic["exponential"]
        and abs(aic["weibull"] - 55.12) <= 1.0
        and abs(aic["exponential"] - 84.5) <= 1.0
    )
    record(
        "C7 football AIC (known failure)",
        ok,
        "order " + " < ".join(f"{k} {aic[k]:.2f}" for k in order) + "; expected Weibull 55.12, Exponential 84.5",
        expected_failure=True,
    )
    assert ok


def test_c7_recovery_downgrade(record):
    s = simulate_sample(M1, 10_000, seed=20240531, method="oracle")
    res = mle_fit("bprhm1", "weibull", s)
    est = np.array(res.model.baseline.params + res.model.params)
    ref = np.array(M1.baseline.params + M1.params)
    rel = np.abs(est / ref - 1)
    ok = bool(np.all(rel < 0.15)) and res.converged
    record("C7 recovery (downgrade)", ok, f"max relative error {rel.max():.3f} (<0.15), converged {res.converged}")
    assert ok


def test_c8_bivariate_calibration(record):
    small = []
    for s in SEEDS:
        S = simulate_sample(M1, 100, seed=1000 + s, method="oracle")
        small.append(ks_bivariate(S, M1, replicates=500, seed=5000 + s).p_value < 0.05)
    frac = float(np.mean(small))
    ok = 0.02 <= frac <= 0.09
    record("C8 bivariate K-S calibration", ok, f"fraction p<0.05 = {frac:.3f} over 200 trials (in [0.02, 0.09])")
    assert ok
