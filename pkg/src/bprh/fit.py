"""Maximum likelihood for left-censored bivariate PRH samples, and AIC ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .baselines import Baseline, baseline_class
from .models import BPRHM1, BPRHM2, BivariatePRH, make_model
from .simulate import DEFAULT_SEED, CensoredSample

__all__ = [
    "TIE_RTOL",
    "FitResult",
    "loglik_contributions",
    "log_likelihood",
    "initial_model",
    "mle_fit",
    "aic_table",
    "format_aic_table",
]

TIE_RTOL = 1e-9


def tie_mask(sample: CensoredSample) -> NDArray:
    """Pairs recorded as ties, ``|y1 - y2| < 1e-9 * scale``."""
    scale = max(float(np.max(np.abs(np.concatenate([sample.y1, sample.y2])))), 1e-300)
    return np.abs(sample.y1 - sample.y2) < TIE_RTOL * scale


def loglik_contributions(model: BivariatePRH, sample: CensoredSample) -> NDArray:
    """Per-pair log-likelihood terms; ``-inf`` marks an impossible pair.

    ============  ============  =========================================
    delta1        delta2        contribution
    ============  ============  =========================================
    1             1             joint density (diagonal density on ties)
    0             1             ``dF/dy2`` at ``(y1, y2)``
    1             0             ``dF/dy1`` at ``(y1, y2)``
    0             0             ``F(y1, y2)``
    ============  ============  =========================================
    """
    y1, y2 = sample.y1, sample.y2
    d1, d2 = sample.delta1 == 1, sample.delta2 == 1
    out = np.full(sample.n, -np.inf)
    with np.errstate(all="ignore"):
        both = d1 & d2
        if isinstance(model, BPRHM1):
            ties = both & tie_mask(sample)
            if ties.any():
                out[ties] = model.log_diagonal_density(y1[ties])
            both = both & ~ties
        if both.any():
            out[both] = model.log_joint_density(y1[both], y2[both])
        m = ~d1 & d2
        if m.any():
            out[m] = model.log_cdf_partial(2, y1[m], y2[m])
        m = d1 & ~d2
        if m.any():
            out[m] = model.log_cdf_partial(1, y1[m], y2[m])
        m = ~d1 & ~d2
        if m.any():
            out[m] = model.log_joint_cdf(y1[m], y2[m])
    return np.where(np.isnan(out), -np.inf, out)


def log_likelihood(model: BivariatePRH, sample: CensoredSample) -> float:
    """Sum of :func:`loglik_contributions`; ``-inf`` if any pair is impossible."""
    c = loglik_contributions(model, sample)
    return float(np.sum(c)) if np.all(np.isfinite(c)) else -math.inf


@dataclass
class FitResult:
    """Best fit found by :func:`mle_fit`."""

    model: BivariatePRH
    log_likelihood: float
    k: int
    iterations: int
    converged: bool
    standard_errors: dict[str, float] | None = None
    label: str = ""
    message: str = ""
    aic: float = field(init=False)

    def __post_init__(self) -> None:
        self.aic = 2 * self.k - 2 * self.log_likelihood
        if not self.label:
            self.label = self.model.baseline.name

    def param_dict(self) -> dict[str, float]:
        names = _param_names(self.model)
        return dict(zip(names, self.model.baseline.params + self.model.params))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "model": self.model.to_dict(),
            "params": self.param_dict(),
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "k": self.k,
            "iterations": self.iterations,
            "converged": self.converged,
            "standard_errors": self.standard_errors,
            "message": self.message,
        }


def _param_names(model: BivariatePRH) -> list[str]:
    return [f"baseline.{f.name}" for f in fields(model.baseline)] + list(model.param_names)


def _split(model: BivariatePRH, theta: NDArray) -> BivariatePRH:
    nb = model.baseline.n_params
    return model.with_params(model.baseline.with_params(theta[:nb]), theta[nb:])


# -- initialisation ----------------------------------------------------------


def _fit_max_law(baseline: Baseline, values: NDArray) -> tuple[Baseline, float]:
    """MLE of ``F0**theta`` on ``values`` (the observed maxima)."""
    x0 = np.log(np.r_[baseline.params, 1.0])
    nb = baseline.n_params

    def nll(z):
        p = np.exp(z)
        try:
            b = baseline.with_params(p[:nb])
        except ValueError:
            return np.inf
        t = p[nb]
        with np.errstate(all="ignore"):
            ll = math.log(t) + (t - 1.0) * np.asarray(b.logcdf(values)) + np.asarray(b.logpdf(values))
        s = float(np.sum(ll))
        return -s if np.isfinite(s) else np.inf

    res = minimize(nll, x0, method="Nelder-Mead", options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 2000})
    p = np.exp(res.x) if np.isfinite(res.fun) else np.exp(x0)
    return baseline.with_params(p[:nb]), float(p[nb])


def initial_model(family: str, baseline_family: str | type[Baseline], sample: CensoredSample) -> BivariatePRH:
    """Moment-style starting point.

    The baseline and ``theta`` come from fitting ``F0**theta`` to the maxima
    (the law of ``max(Y1, Y2)``); ``theta`` is then split using the observed
    region frequencies ``P(Y1 > Y2)``, ``P(Y1 < Y2)`` and ``P(Y1 = Y2)``.
    """
    cls = baseline_class(baseline_family) if isinstance(baseline_family, str) else baseline_family
    m = np.maximum(sample.y1, sample.y2)
    obs = (sample.delta1 == 1) | (sample.delta2 == 1)
    values = m[obs] if obs.sum() >= 2 else m
    b0 = _guess(cls, values)
    baseline, theta = _fit_max_law(b0, values)
    ties = tie_mask(sample)
    gt = np.count_nonzero((sample.y1 > sample.y2) & ~ties) + 0.5
    lt = np.count_nonzero((sample.y1 < sample.y2) & ~ties) + 0.5
    eq = np.count_nonzero(ties) + 0.5
    if family.lower() == "bprhm1":
        tot = gt + lt + eq
        return make_model(baseline, "bprhm1", (theta * gt / tot, theta * lt / tot, theta * eq / tot))
    tot = gt + lt
    # -log(F0(min)/F0(max)) is exponential with rate theta'_(min coordinate)
    L1 = np.asarray(baseline.logcdf(sample.y1))
    L2 = np.asarray(baseline.logcdf(sample.y2))
    gap = np.abs(L1 - L2)
    rates = []
    for mask in (sample.y1 < sample.y2, sample.y1 > sample.y2):
        g = gap[mask & np.isfinite(gap)]
        rates.append(1.0 / float(np.mean(g)) if g.size and np.mean(g) > 0 else theta)
    return make_model(baseline, "bprhm2", (theta * gt / tot, theta * lt / tot, rates[0], rates[1]))


def _guess(cls: type[Baseline], values: NDArray) -> Baseline:
    n = len(fields(cls))
    probe = cls(*([1.0] * n))
    return probe.with_params(probe.initial_guess(values))


# -- estimation --------------------------------------------------------------


def _hessian(f, x: NDArray, rel_step: float = 1e-4) -> NDArray:
    """Central finite-difference Hessian."""
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 1e-3)
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


def standard_errors(model: BivariatePRH, sample: CensoredSample) -> dict[str, float] | None:
    """Square roots of the diagonal of the inverse observed information.

    Returns ``None`` when the finite-difference Hessian is not positive definite.
    """
    x = np.array(model.baseline.params + model.params)

    def nll(theta):
        try:
            return -log_likelihood(_split(model, theta), sample)
        except ValueError:
            return math.inf

    H = _hessian(nll, x)
    if not np.all(np.isfinite(H)):
        return None
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    cov = np.linalg.inv(H)
    return dict(zip(_param_names(model), np.sqrt(np.diag(cov)).tolist()))


def mle_fit(
    family: str,
    baseline_family: str | type[Baseline],
    sample: CensoredSample,
    starts: int = 5,
    max_iter: int = 20000,
    tol: float = 1e-8,
    seed: int = DEFAULT_SEED,
    compute_se: bool = False,
    init: BivariatePRH | None = None,
) -> FitResult:
    """Maximise the censored log-likelihood by multistart Nelder-Mead.

    The search runs on log-parameters.  Start 0 is :func:`initial_model`;
    the remaining starts jitter it by a log-normal factor (sd 0.5).  Every
    start is polished by one restart from its own optimum.  The run is
    converged when the final simplex has function spread below ``tol``.

    Parameters
    ----------
    family : {"bprhm1", "bprhm2"}
    baseline_family : str or Baseline subclass
    sample : CensoredSample
    starts : int
        Number of starting points.
    max_iter : int
        Iteration cap per Nelder-Mead run.
    tol : float
        Simplex function-spread tolerance.
    seed : int
        Seed for the jittered starts.
    compute_se : bool
        Also compute finite-difference standard errors.
    init : BivariatePRH, optional
        Replace the automatic starting point.
    """
    base = init if init is not None else initial_model(family, baseline_family, sample)
    k = base.baseline.n_params + len(base.params)
    if sample.n < 2 * (k + 1):
        raise ValueError(f"need at least {2 * (k + 1)} pairs to fit {k} parameters, got {sample.n}")
    x_init = np.log(np.array(base.baseline.params + base.params))

    def objective(z):
        try:
            model = _split(base, np.exp(z))
        except ValueError:
            return math.inf
        ll = log_likelihood(model, sample)
        return -ll if np.isfinite(ll) else math.inf

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF17]))
    jitters = rng.normal(0.0, 0.5, size=(max(starts, 1) - 1, k))
    x_starts = [x_init] + [x_init + j for j in jitters]
    opts = {"xatol": 1e-7, "fatol": tol, "maxiter": max_iter, "maxfev": 2 * max_iter, "adaptive": k > 4}

    best = None
    iterations = 0
    for x0 in x_starts:
        if not np.isfinite(objective(x0)):
            continue
        res = minimize(objective, x0, method="Nelder-Mead", options=opts)
        iterations += int(res.nit)
        res2 = minimize(objective, res.x, method="Nelder-Mead", options=opts)
        iterations += int(res2.nit)
        if res2.fun <= res.fun:
            res = res2
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        return FitResult(base, -math.inf, k, iterations, False, message="no start gave a finite likelihood")
    spread = float(np.ptp(best.final_simplex[1]))
    model = _split(base, np.exp(best.x))
    ll = log_likelihood(model, sample)
    se = standard_errors(model, sample) if compute_se else None
    return FitResult(model, ll, k, iterations, spread < tol, se, message=str(best.message))


# -- model selection ---------------------------------------------------------


def aic_table(fits: list[FitResult]) -> list[dict]:
    """Rows sorted by AIC (stable) with the difference to the best model."""
    if len(fits) < 2:
        raise ValueError("aic_table needs at least two fits")
    ranked = sorted(fits, key=lambda f: f.aic)
    best = ranked[0].aic
    return [
        {"label": f.label, "k": f.k, "log_likelihood": f.log_likelihood, "aic": f.aic, "delta_aic": f.aic - best}
        for f in ranked
    ]


def format_aic_table(rows: list[dict]) -> str:
    lines = [f"{'Model':<20} {'k':>3} {'log L':>11} {'AIC':>10} {'dAIC':>8}"]
    for r in rows:
        lines.append(
            f"{r['label']:<20} {r['k']:>3} {r['log_likelihood']:>11.4f} {r['aic']:>10.4f} {r['delta_aic']:>8.3f}"
        )
    return "\n".join(lines)
