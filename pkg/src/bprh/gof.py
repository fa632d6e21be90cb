"""Kolmogorov-Smirnov goodness of fit for the bivariate models.

Univariate tests cover ``max(Y1, Y2)`` and both marginals, with asymptotic
Kolmogorov p-values (optionally refined by Monte Carlo).  The bivariate test
uses the lower-orthant distance between the empirical and model cdf at the
sample points, calibrated by a parametric bootstrap from the exact sampler.

Left-censored samples are handled by testing only the observed part:

* marginal ``i`` uses the pairs with ``delta_i = 1``; conditionally on being
  observed, ``Y_i`` has density ``f_i(t) G_i(t) / P(observed)`` where
  ``G_i(t) = P(C_i <= t)``;
* the maximum uses the pairs whose largest recorded coordinate is observed,
  which is exactly the event ``max(T1, T2) >= C1, C2``; its law has density
  ``f_max(t) G_1(t) G_2(t) / norm``;
* the bivariate test compares recorded values with
  ``F(y1, y2) G_1(y1) G_2(y2)``, the exact cdf of ``(max(T1, C1), max(T2, C2))``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray

from .models import BivariatePRH
from .simulate import DEFAULT_SEED, CensoredSample, CensoringPlan, oracle_transform, uniform_block

__all__ = [
    "MIN_REPLICATES",
    "GofReport",
    "ecdf",
    "kolmogorov_sf",
    "ks_statistic",
    "ks_univariate",
    "ks_bivariate",
    "bivariate_statistic",
    "observed_cdf",
    "observed_max_subsample",
    "gof_suite",
    "format_gof_table",
]

MIN_REPLICATES = 200
_SERIES_TERMS = 100
_GL_NODES, _GL_WEIGHTS = leggauss(64)


@dataclass(frozen=True)
class GofReport:
    """Outcome of one K-S test."""

    target: str  # max, marginal1, marginal2 or bivariate
    statistic: float
    p_value: float
    method: str  # asymptotic or monte_carlo
    n: int
    replicates: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.statistic <= 1.0:
            raise ValueError(f"statistic must lie in [0, 1], got {self.statistic}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value must lie in [0, 1], got {self.p_value}")
        if self.method == "monte_carlo" and (self.replicates or 0) < MIN_REPLICATES:
            raise ValueError(f"monte carlo p-values need at least {MIN_REPLICATES} replicates")

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level

    def to_dict(self) -> dict:
        return asdict(self)


def ecdf(values: ArrayLike) -> Callable[[ArrayLike], NDArray]:
    """Right-continuous empirical distribution function of ``values``."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("ecdf of an empty sample")
    n = x.size

    def F(y):
        return np.searchsorted(x, np.asarray(y, dtype=float), side="right") / n

    return F


def kolmogorov_sf(x: ArrayLike) -> NDArray | float:
    """``P(K > x)`` for the Kolmogorov limit law, by its series (100 terms).

    For ``x < 1`` the theta-function form of the cdf converges faster and is
    used instead of the alternating series.
    """
    x = np.asarray(x, dtype=float)
    k = np.arange(1, _SERIES_TERMS + 1)[:, None]
    xs = np.maximum(x.ravel(), 1e-300)[None, :]
    alt = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * xs**2), axis=0)
    with np.errstate(over="ignore", divide="ignore"):
        theta = math.sqrt(2 * math.pi) / xs[0] * np.sum(
            np.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * xs**2)), axis=0
        )
    out = np.where(xs[0] < 1.0, 1.0 - theta, alt)
    out = np.clip(out, 0.0, 1.0).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def ks_statistic(values: ArrayLike, cdf: Callable[[NDArray], ArrayLike]) -> float:
    """``sup |F_n - F|`` evaluated at the sample points from both sides."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))


def ks_univariate(
    values: ArrayLike,
    cdf: Callable[[NDArray], ArrayLike],
    target: str = "max",
    mc_replicates: int | None = None,
    seed: int = DEFAULT_SEED,
) -> GofReport:
    """One-sample K-S test against a continuous ``cdf``.

    Parameters
    ----------
    values : array_like
        Sample, at least 5 points.
    cdf : callable
        Hypothesised distribution function (vectorised).
    target : str
        Label stored in the report.
    mc_replicates : int, optional
        If given, the p-value is the Monte Carlo exceedance fraction of the
        statistic under uniform samples of the same size instead of the
        asymptotic Kolmogorov tail.
    seed : int
        Seed for the Monte Carlo refinement.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n < 5:
        raise ValueError(f"ks_univariate needs at least 5 points, got {n}")
    F = np.asarray(cdf(np.sort(x)), dtype=float)
    if np.ptp(F) == 0.0:
        raise ValueError("theoretical cdf is constant over the sample")
    d = ks_statistic(x, cdf)
    if mc_replicates is None:
        return GofReport(target, d, float(kolmogorov_sf(math.sqrt(n) * d)), "asymptotic", n)
    if mc_replicates < MIN_REPLICATES:
        raise ValueError(f"need at least {MIN_REPLICATES} replicates, got {mc_replicates}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    u = np.sort(rng.random((mc_replicates, n)), axis=1)
    i = np.arange(1, n + 1)
    d_null = np.maximum((i / n - u).max(axis=1), (u - (i - 1) / n).max(axis=1))
    p = (1 + np.count_nonzero(d_null >= d)) / (mc_replicates + 1)
    return GofReport(target, d, float(p), "monte_carlo", n, mc_replicates)


# -- censoring-adjusted laws -------------------------------------------------


def _weight(s: NDArray, zs: tuple[float, ...]) -> NDArray:
    """``prod_k min(s / z_k, 1)`` for ``s >= 0``."""
    g = np.ones_like(s)
    for z in zs:
        g = g * np.clip(s / z, 0.0, 1.0)
    return g


def _weight_deriv(s: NDArray, zs: tuple[float, ...]) -> NDArray:
    out = np.zeros_like(s)
    for k, z in enumerate(zs):
        term = np.where((s > 0) & (s < z), 1.0 / z, 0.0)
        for m, w in enumerate(zs):
            if m != k:
                term = term * np.clip(s / w, 0.0, 1.0)
        out = out + term
    return out


def _integral_F_dweight(F: Callable, t: NDArray, zs: tuple[float, ...]) -> NDArray:
    """``int_0^t F(s) dG(s)`` with ``G`` the product weight, piecewise Gauss-Legendre."""
    knots = np.concatenate([[0.0], np.sort(np.asarray(zs, dtype=float))])
    total = np.zeros_like(t)
    for lo, hi in zip(knots[:-1], knots[1:]):
        upper = np.clip(t, lo, hi)
        half = 0.5 * (upper - lo)
        s = lo + half[:, None] * (_GL_NODES[None, :] + 1.0)
        vals = np.asarray(F(s.ravel()), dtype=float).reshape(s.shape) * _weight_deriv(s, zs)
        total = total + half * (vals @ _GL_WEIGHTS)
    return total


def observed_cdf(F: Callable, zs: tuple[float, ...]) -> Callable[[ArrayLike], NDArray]:
    """Distribution of ``T`` given ``T >= C_k`` for all ``k``, with ``C_k ~ U(0, z_k)``.

    Returns ``F`` itself when ``zs`` is empty.  Otherwise the law has density
    ``f(t) G(t) / norm`` with ``G(t) = prod_k min(t / z_k, 1)``, evaluated by
    parts as ``(F(t) G(t) - int_0^t F dG) / norm``.
    """
    if not zs:
        return lambda t: np.asarray(F(np.asarray(t, dtype=float)), dtype=float)
    zs = tuple(float(z) for z in zs)
    norm = 1.0 - float(_integral_F_dweight(F, np.array([max(zs)]), zs)[0])

    def G(t):
        t = np.asarray(t, dtype=float)
        flat = np.maximum(t.ravel(), 0.0)
        val = np.asarray(F(flat), dtype=float) * _weight(flat, zs) - _integral_F_dweight(F, flat, zs)
        return np.clip(val / norm, 0.0, 1.0).reshape(t.shape)

    return G


def observed_max_subsample(sample: CensoredSample) -> NDArray:
    """Recorded maxima whose largest coordinate is an observed event."""
    m = np.maximum(sample.y1, sample.y2)
    keep = ((sample.delta1 == 1) & (sample.y1 == m)) | ((sample.delta2 == 1) & (sample.y2 == m))
    return m[keep]


# -- bivariate test ----------------------------------------------------------


def _dominance_counts(y1: NDArray, y2: NDArray) -> NDArray:
    """``#{j: y1_j <= y1_i, y2_j <= y2_i}`` for every ``i`` with a Fenwick tree."""
    n = y1.size
    order = np.lexsort((y2, y1))
    ranks = np.searchsorted(np.sort(y2), y2, side="right")  # 1-based, ties share the top rank
    tree = np.zeros(n + 1, dtype=np.int64)
    counts = np.empty(n, dtype=np.int64)
    sorted_y1 = y1[order]
    k = 0
    while k < n:
        end = k
        while end < n and sorted_y1[end] == sorted_y1[k]:
            end += 1
        for idx in order[k:end]:
            r = ranks[idx]
            while r <= n:
                tree[r] += 1
                r += r & -r
        for idx in order[k:end]:
            r, c = ranks[idx], 0
            while r > 0:
                c += tree[r]
                r -= r & -r
            counts[idx] = c
        k = end
    return counts


def bivariate_statistic(y1: NDArray, y2: NDArray, F_model: NDArray) -> NDArray:
    """Orthant K-S distance; leading axes of the inputs are batch dimensions."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    n = y1.shape[-1]
    if n > 2000:
        if y1.ndim > 1:
            return np.array([bivariate_statistic(a, b, f) for a, b, f in zip(y1, y2, F_model)])
        Fn = _dominance_counts(y1, y2) / n
    else:
        below = (y1[..., None, :] <= y1[..., :, None]) & (y2[..., None, :] <= y2[..., :, None])
        Fn = below.sum(axis=-1) / n
    return np.max(np.abs(Fn - F_model), axis=-1)


def _recorded_cdf(model: BivariatePRH, plan: CensoringPlan, y1: NDArray, y2: NDArray) -> NDArray:
    F = np.asarray(model.joint_cdf(y1, y2), dtype=float)
    if plan.active:
        F = F * plan.observed_prob(1, y1) * plan.observed_prob(2, y2)
    return F


def ks_bivariate(
    sample: CensoredSample,
    model: BivariatePRH,
    replicates: int = 500,
    seed: int = DEFAULT_SEED,
    plan: CensoringPlan | None = None,
    chunk: int = 50,
) -> GofReport:
    """Bivariate K-S test with a parametric-bootstrap p-value.

    Replicate ``r`` draws ``n`` pairs from the exact sampler on its own stream
    ``(seed, r + 1)``, applies the same censoring plan and recomputes the
    statistic.  The p-value is ``(1 + #{D* >= D}) / (replicates + 1)``.
    """
    n = sample.n
    if n < 10:
        raise ValueError(f"ks_bivariate needs at least 10 pairs, got {n}")
    if replicates < MIN_REPLICATES:
        raise ValueError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")
    plan = sample.plan if plan is None else plan
    d = float(bivariate_statistic(sample.y1, sample.y2, _recorded_cdf(model, plan, sample.y1, sample.y2)))
    exceed = 0
    chunk = max(1, min(chunk, 5_000_000 // (n * n)))
    for start in range(0, replicates, chunk):
        reps = range(start, min(start + chunk, replicates))
        u = np.concatenate([uniform_block(seed, 0, n, stream=r + 1) for r in reps])
        t1, t2 = oracle_transform(model, u)
        if plan.active:
            t1 = np.maximum(t1, plan.z1 * u[:, 3])
            t2 = np.maximum(t2, plan.z2 * u[:, 4])
        t1 = t1.reshape(len(reps), n)
        t2 = t2.reshape(len(reps), n)
        d_star = bivariate_statistic(t1, t2, _recorded_cdf(model, plan, t1, t2))
        exceed += int(np.count_nonzero(d_star >= d))
    p = (1 + exceed) / (replicates + 1)
    return GofReport("bivariate", min(d, 1.0), p, "monte_carlo", n, replicates)


# -- suite -------------------------------------------------------------------


def gof_suite(
    sample: CensoredSample,
    model: BivariatePRH,
    replicates: int = 500,
    seed: int = DEFAULT_SEED,
    mc_replicates: int | None = None,
) -> list[GofReport]:
    """Bivariate, maximum and marginal tests, in that order."""
    plan = sample.plan
    z1 = (plan.z1,) if plan.active else ()
    z2 = (plan.z2,) if plan.active else ()
    reports = [ks_bivariate(sample, model, replicates, seed)]
    reports.append(
        ks_univariate(observed_max_subsample(sample), observed_cdf(model.max_cdf, z1 + z2), "max", mc_replicates, seed)
    )
    for i, zi, y, d in ((1, z1, sample.y1, sample.delta1), (2, z2, sample.y2, sample.delta2)):
        F = observed_cdf(lambda t, i=i: model.marginal_cdf(i, t), zi)
        reports.append(ks_univariate(y[d == 1], F, f"marginal{i}", mc_replicates, seed))
    return reports


_LABELS = {"bivariate": "Bivariate", "max": "Max{Y1,Y2}", "marginal1": "Y1", "marginal2": "Y2"}


def format_gof_table(reports: list[GofReport], title: str | None = None) -> str:
    """Plain-text table: test, n, K-S statistic, p-value."""
    lines = [title] if title else []
    lines.append(f"{'Test':<12} {'n':>6} {'K-S statistic':>14} {'p-value':>9}")
    for r in reports:
        p = f"{r.p_value:.4f}" if r.p_value >= 1e-4 else f"{r.p_value:.1e}"
        lines.append(f"{_LABELS.get(r.target, r.target):<12} {r.n:>6} {r.statistic:>14.4f} {p:>9}")
    return "\n".join(lines)
