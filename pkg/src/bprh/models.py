"""Bivariate proportional reversed hazards models.

Two members of the class whose component-wise maximum follows ``F0**theta``:

* :class:`BPRHM1` with ``F(y1, y2) = F0(y1)**a1 * F0(y2)**a2 * F0(min)**a3``.
  It puts positive mass ``a3 / (a1 + a2 + a3)`` on the diagonal ``y1 = y2``.
* :class:`BPRHM2` with the status-dependent density

      theta1' theta2 f0(y1) f0(y2) F0(y1)**(theta1'-1) F0(y2)**(theta-theta1'-1),  y1 < y2
      theta1 theta2' f0(y1) f0(y2) F0(y1)**(theta-theta2'-1) F0(y2)**(theta2'-1), y2 < y1

  with ``theta = theta1 + theta2``; absolutely continuous.

Both can be written as ``F(y1, y2) = F0(hi)**theta * G(ratio)`` where ``hi`` is
the larger argument and ``ratio = F0(lo) / F0(hi)``.  Most evaluations are
carried out on ``log F0`` so that large exponents do not lose precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .baselines import Baseline, parse_baseline

__all__ = [
    "BivariatePRH",
    "BPRHM1",
    "BPRHM2",
    "UnsupportedFamilyError",
    "make_model",
    "model_from_dict",
    "DEGENERATE_TOL",
]

#: ``|theta1 + theta2 - theta_i'|`` below which the log form of the mixture
#: marginal is used.
DEGENERATE_TOL = 1e-9


class UnsupportedFamilyError(ValueError):
    """Operation not defined for this model family."""


def _out(x: NDArray) -> float | NDArray:
    return float(x) if np.ndim(x) == 0 else x


def _pair(y1: ArrayLike, y2: ArrayLike) -> tuple[NDArray, NDArray]:
    a, b = np.broadcast_arrays(np.asarray(y1, dtype=float), np.asarray(y2, dtype=float))
    return a, b


def _bisect_increasing(g, target: NDArray, n_iter: int = 100) -> NDArray:
    """Solve ``g(u) = target`` for ``u`` in ``(0, 1)``, ``g`` increasing, vectorized."""
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = g(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BivariatePRH:
    """Shared behaviour of the two model families.

    Subclasses provide the family-specific pieces on log scale:
    ``_log_cdf``, ``_log_partial2`` (log of dF/dy2, left derivative on the
    diagonal), ``_log_density``, ``_log_marginal_cdf`` and the swap of
    coordinates.
    """

    baseline: Baseline

    # -- parameters ----------------------------------------------------------

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in fields(self) if f.name != "baseline")

    @property
    def params(self) -> tuple[float, ...]:
        return tuple(getattr(self, n) for n in self.param_names)

    def __post_init__(self) -> None:
        bad = [n for n in self.param_names if not (getattr(self, n) > 0)]
        if bad:
            raise ValueError(
                f"{self.family}: parameters must be positive, got "
                + ", ".join(f"{n}={getattr(self, n)!r}" for n in bad)
            )

    @property
    def family(self) -> str:
        return type(self).__name__.lower()

    @property
    def theta(self) -> float:
        """Proportionality parameter of ``max(Y1, Y2)``."""
        raise NotImplementedError

    def with_params(self, baseline: Baseline | None = None, params=None):
        baseline = self.baseline if baseline is None else baseline
        params = self.params if params is None else tuple(float(p) for p in params)
        return type(self)(baseline, *params)

    def swapped(self) -> "BivariatePRH":
        """Model of ``(Y2, Y1)``."""
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "baseline": str(self.baseline),
            "params": list(self.params),
        }

    def __str__(self) -> str:
        ps = ",".join(f"{p:g}" for p in self.params)
        return f"{self.family.upper()}({self.baseline}; {ps})"

    # -- distribution functions ---------------------------------------------

    def log_joint_cdf(self, y1: ArrayLike, y2: ArrayLike) -> float | NDArray:
        y1, y2 = _pair(y1, y2)
        L1 = np.asarray(self.baseline.logcdf(y1))
        L2 = np.asarray(self.baseline.logcdf(y2))
        with np.errstate(invalid="ignore"):
            out = self._log_cdf(L1, L2)
        out = np.where(np.isneginf(L1) | np.isneginf(L2), -np.inf, out)
        return _out(out)

    def joint_cdf(self, y1: ArrayLike, y2: ArrayLike) -> float | NDArray:
        """``P(Y1 <= y1, Y2 <= y2)``."""
        return _out(np.exp(np.asarray(self.log_joint_cdf(y1, y2))))

    def log_cdf_partial(self, j: int, y1: ArrayLike, y2: ArrayLike) -> float | NDArray:
        """``log dF/dy_j`` at ``(y1, y2)``.

        ``dF/dy2 (y1, y2)`` is the density of ``Y2`` at ``y2`` jointly with
        ``Y1 <= y1``; on the diagonal the derivative from below in ``y2`` is
        used so that a tie ``Y1 = Y2 = y2`` counts as ``Y1 <= y1``.
        """
        if j == 1:
            return self.swapped().log_cdf_partial(2, y2, y1)
        if j != 2:
            raise ValueError("j must be 1 or 2")
        y1, y2 = _pair(y1, y2)
        L1 = np.asarray(self.baseline.logcdf(y1))
        L2 = np.asarray(self.baseline.logcdf(y2))
        lp2 = np.asarray(self.baseline.logpdf(y2))
        with np.errstate(invalid="ignore"):
            out = self._log_partial2(L1, L2, lp2, y1 >= y2)
        out = np.where(np.isneginf(L1) | np.isneginf(lp2), -np.inf, out)
        return _out(out)

    def cdf_partial(self, j: int, y1: ArrayLike, y2: ArrayLike) -> float | NDArray:
        return _out(np.exp(np.asarray(self.log_cdf_partial(j, y1, y2))))

    def log_joint_density(self, y1: ArrayLike, y2: ArrayLike) -> float | NDArray:
        y1, y2 = _pair(y1, y2)
        self._check_off_diagonal(y1, y2)
        L1 = np.asarray(self.baseline.logcdf(y1))
        L2 = np.asarray(self.baseline.logcdf(y2))
        lp1 = np.asarray(self.baseline.logpdf(y1))
        lp2 = np.asarray(self.baseline.logpdf(y2))
        with np.errstate(invalid="ignore"):
            out = self._log_density(L1, L2, y1 > y2) + lp1 + lp2
        out = np.where(np.isneginf(lp1) | np.isneginf(lp2), -np.inf, out)
        return _out(out)

    def joint_density(self, y1: ArrayLike, y2: ArrayLike) -> float | NDArray:
        """Density of the absolutely continuous part at an off-diagonal point."""
        return _out(np.exp(np.asarray(self.log_joint_density(y1, y2))))

    def _check_off_diagonal(self, y1: NDArray, y2: NDArray) -> None:
        pass

    def log_diagonal_density(self, y: ArrayLike) -> float | NDArray:
        raise UnsupportedFamilyError(f"{self.family} has no singular diagonal component")

    def diagonal_density(self, y: ArrayLike) -> float | NDArray:
        """Density of the singular component along ``y1 = y2 = y``."""
        return _out(np.exp(np.asarray(self.log_diagonal_density(y))))

    def log_marginal_cdf(self, i: int, y: ArrayLike) -> float | NDArray:
        if i not in (1, 2):
            raise ValueError("i must be 1 or 2")
        L = np.asarray(self.baseline.logcdf(np.asarray(y, dtype=float)))
        with np.errstate(invalid="ignore"):
            out = self._log_marginal_u(i, L)
        return _out(np.where(np.isneginf(L), -np.inf, out))

    def marginal_cdf(self, i: int, y: ArrayLike) -> float | NDArray:
        """Distribution function of ``Y_i``."""
        return _out(np.exp(np.asarray(self.log_marginal_cdf(i, y))))

    def marginal_pdf(self, i: int, y: ArrayLike) -> float | NDArray:
        y = np.asarray(y, dtype=float)
        L = np.asarray(self.baseline.logcdf(y))
        lp = np.asarray(self.baseline.logpdf(y))
        with np.errstate(invalid="ignore", over="ignore"):
            out = np.exp(self._log_marginal_u_deriv(i, L) + lp)
        return _out(np.where(np.isneginf(lp) | np.isneginf(L), 0.0, out))

    def marginal_quantile(self, i: int, u: ArrayLike) -> float | NDArray:
        """Inverse of :meth:`marginal_cdf`; ``u`` must lie in ``(0, 1)``."""
        u = np.asarray(u, dtype=float)
        if not np.all((u > 0) & (u < 1)):
            raise ValueError("marginal_quantile requires 0 < u < 1")
        return _out(np.asarray(self.baseline.quantile(self._marginal_quantile_u(i, u))))

    def _marginal_quantile_u(self, i: int, u: NDArray) -> NDArray:
        """Value ``v = F0(y)`` with ``F_Yi(y) = u``."""
        logu = np.log(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _bisect_increasing(lambda v: self._log_marginal_u(i, np.log(v)), logu)

    def max_cdf(self, y: ArrayLike) -> float | NDArray:
        """Distribution function of ``max(Y1, Y2)``: ``F0(y)**theta``."""
        return _out(np.exp(self.theta * np.asarray(self.baseline.logcdf(y))))

    def max_quantile(self, u: ArrayLike) -> float | NDArray:
        u = np.asarray(u, dtype=float)
        return self.baseline.quantile_log(np.log(u) / self.theta)

    def region_probabilities(self) -> tuple[float, float, float]:
        """``(P(Y1 > Y2), P(Y1 < Y2), P(Y1 = Y2))``."""
        raise NotImplementedError

    # -- reversed hazard vectors --------------------------------------------

    def rhr_vector_roy(self, y1: ArrayLike, y2: ArrayLike) -> tuple[NDArray, NDArray]:
        """Gradient of ``log F``: ``(lambda1(y1 | Y2 <= y2), lambda2(y2 | Y1 <= y1))``."""
        logF = np.asarray(self.log_joint_cdf(y1, y2))
        if np.any(np.isneginf(logF)):
            raise ValueError("reversed hazard vector undefined where F(y1, y2) = 0")
        lam1 = np.exp(np.asarray(self.log_cdf_partial(1, y1, y2)) - logF)
        lam2 = np.exp(np.asarray(self.log_cdf_partial(2, y1, y2)) - logF)
        return _out(lam1), _out(lam2)

    def conditional_rhr_coefficients(self) -> tuple[float, float]:
        """Constants ``c_i`` with ``r_{i|j}(y_i | y_j) = c_i r0(y_i)`` for ``y_i < y_j``."""
        raise NotImplementedError

    def rhr_vector_cond(self, y1: ArrayLike, y2: ArrayLike) -> tuple[NDArray, NDArray, NDArray]:
        """Three-component reversed hazard vector.

        First component is the reversed hazard of ``max(Y1, Y2)`` at
        ``y = max(y1, y2)``; the other two are the rates of ``Y_i`` given
        ``Y_j = y_j`` and ``Y_i <= y_i``, evaluated with the closed form valid
        for ``y_i < y_j``.
        """
        y1, y2 = _pair(y1, y2)
        if np.any(np.isneginf(np.asarray(self.log_joint_cdf(y1, y2)))):
            raise ValueError("reversed hazard vector undefined where F(y1, y2) = 0")
        r0 = self.baseline.reversed_hazard
        c1, c2 = self.conditional_rhr_coefficients()
        first = self.theta * np.asarray(r0(np.maximum(y1, y2)))
        return _out(first), _out(c1 * np.asarray(r0(y1))), _out(c2 * np.asarray(r0(y2)))


@dataclass(frozen=True)
class BPRHM1(BivariatePRH):
    """``F(y1, y2) = F0(y1)**alpha1 F0(y2)**alpha2 F0(min(y1, y2))**alpha3``."""

    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def theta(self) -> float:
        return self.alpha1 + self.alpha2 + self.alpha3

    def swapped(self):
        return BPRHM1(self.baseline, self.alpha2, self.alpha1, self.alpha3)

    def region_probabilities(self):
        t = self.theta
        return (self.alpha1 / t, self.alpha2 / t, self.alpha3 / t)

    def conditional_rhr_coefficients(self):
        return (self.alpha1 + self.alpha3, self.alpha2 + self.alpha3)

    def _log_cdf(self, L1, L2):
        return self.alpha1 * L1 + self.alpha2 * L2 + self.alpha3 * np.minimum(L1, L2)

    def _log_partial2(self, L1, L2, lp2, y1_ge_y2):
        a1, a2, a3 = self.params
        ge = math.log(a2 + a3) + lp2 + (a2 + a3 - 1.0) * L2 + a1 * L1
        lt = math.log(a2) + lp2 + (a2 - 1.0) * L2 + (a1 + a3) * L1
        return np.where(y1_ge_y2, ge, lt)

    def _check_off_diagonal(self, y1, y2):
        if np.any(y1 == y2):
            raise ValueError("BPRHM1 joint_density is off-diagonal only; use diagonal_density for y1 == y2")

    def _log_density(self, L1, L2, y1_gt_y2):
        a1, a2, a3 = self.params
        gt = math.log(a1 * (a2 + a3)) + (a1 - 1.0) * L1 + (a2 + a3 - 1.0) * L2
        lt = math.log(a2 * (a1 + a3)) + (a1 + a3 - 1.0) * L1 + (a2 - 1.0) * L2
        return np.where(y1_gt_y2, gt, lt)

    def log_diagonal_density(self, y):
        y = np.asarray(y, dtype=float)
        L = np.asarray(self.baseline.logcdf(y))
        lp = np.asarray(self.baseline.logpdf(y))
        with np.errstate(invalid="ignore"):
            out = math.log(self.alpha3) + lp + (self.theta - 1.0) * L
        return _out(np.where(np.isneginf(lp), -np.inf, out))

    def _exponent(self, i):
        return (self.alpha1 if i == 1 else self.alpha2) + self.alpha3

    def _log_marginal_u(self, i, L):
        return self._exponent(i) * L

    def _log_marginal_u_deriv(self, i, L):
        k = self._exponent(i)
        return math.log(k) + (k - 1.0) * L

    def _marginal_quantile_u(self, i, u):
        return np.exp(np.log(u) / self._exponent(i))


@dataclass(frozen=True)
class BPRHM2(BivariatePRH):
    """Status-dependent model with parameters ``theta1, theta2, theta1p, theta2p``.

    ``theta_ip`` is the proportionality constant of the reversed hazard of
    ``Y_i`` while the other component is still the larger one.
    """

    theta1: float
    theta2: float
    theta1p: float
    theta2p: float

    @property
    def theta(self) -> float:
        return self.theta1 + self.theta2

    def swapped(self):
        return BPRHM2(self.baseline, self.theta2, self.theta1, self.theta2p, self.theta1p)

    def region_probabilities(self):
        t = self.theta
        return (self.theta1 / t, self.theta2 / t, 0.0)

    def conditional_rhr_coefficients(self):
        return (self.theta1p, self.theta2p)

    def is_degenerate(self, i: int) -> bool:
        """True on the branch ``theta1 + theta2 = theta_i'`` of the mixture marginal."""
        tp = self.theta1p if i == 1 else self.theta2p
        return abs(self.theta - tp) < DEGENERATE_TOL

    def mixture_weights(self, i: int) -> tuple[float, float]:
        """Weights of ``u**theta_i'`` and ``u**theta`` in the marginal of ``Y_i``."""
        if self.is_degenerate(i):
            raise ValueError(f"marginal {i} is on the degenerate (log) branch")
        ti, tj = (self.theta1, self.theta2) if i == 1 else (self.theta2, self.theta1)
        tp = self.theta1p if i == 1 else self.theta2p
        den = ti + tj - tp
        w = (tj / den, (ti - tp) / den)
        assert abs(w[0] + w[1] - 1.0) < 1e-12
        return w

    def _E(self, i, l):
        """``(exp(-eps l) - 1) / eps`` with ``eps = theta - theta_i'``; ``-l`` when ``eps = 0``."""
        tp = self.theta1p if i == 1 else self.theta2p
        eps = self.theta - tp
        if abs(eps) < DEGENERATE_TOL:
            return -l
        return np.expm1(-eps * l) / eps

    def _log_affine_E(self, i, a, b, l):
        """``log(a + b * E_i(l))`` for ``l <= 0``, stable as ``l -> -inf``."""
        tp = self.theta1p if i == 1 else self.theta2p
        eps = self.theta - tp
        l = np.asarray(l, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            direct = np.log(a + b * self._E(i, l))
            if eps <= DEGENERATE_TOL:
                return direct
            # a + b (e^x - 1)/eps = (a - b/eps) + (b/eps) e^x with x = -eps l
            x = -eps * l
            c = b / eps
            tail = math.log(c) + x + np.log1p((a - c) / c * np.exp(-x))
        return np.where(x > 1.0, tail, direct)

    def _log_marginal_u(self, i, L):
        # G_i(u) = u**theta * (1 + theta_j * E_i(log u))
        tj = self.theta2 if i == 1 else self.theta1
        return self.theta * L + self._log_affine_E(i, 1.0, tj, L)

    def _log_marginal_u_deriv(self, i, L):
        # G_i'(u) = u**(theta-1) * (theta_i + theta_j theta_i' E_i(log u))
        ti, tj = (self.theta1, self.theta2) if i == 1 else (self.theta2, self.theta1)
        tp = self.theta1p if i == 1 else self.theta2p
        return (self.theta - 1.0) * L + self._log_affine_E(i, ti, tj * tp, L)

    def _log_cdf(self, L1, L2):
        # F0(hi)**theta * G_other(F0(lo) / F0(hi))
        t = self.theta
        ge = t * L1 + self._log_marginal_u(2, np.minimum(L2 - L1, 0.0))
        lt = t * L2 + self._log_marginal_u(1, np.minimum(L1 - L2, 0.0))
        return np.where(L1 >= L2, ge, lt)

    def _log_partial2(self, L1, L2, lp2, y1_ge_y2):
        t = self.theta
        ge = (t - 1.0) * L2 + lp2 + self._log_affine_E(2, self.theta2, self.theta1 * self.theta2p, np.minimum(L2 - L1, 0.0))
        lt = math.log(self.theta2) + lp2 + (t - 1.0) * L2 + self.theta1p * (L1 - L2)
        return np.where(y1_ge_y2, ge, lt)

    def _log_density(self, L1, L2, y1_gt_y2):
        t = self.theta
        t1, t2, t1p, t2p = self.params
        gt = math.log(t1 * t2p) + (t - t2p - 1.0) * L1 + (t2p - 1.0) * L2
        lt = math.log(t1p * t2) + (t1p - 1.0) * L1 + (t - t1p - 1.0) * L2
        return np.where(y1_gt_y2, gt, lt)


_FAMILY_CLASSES = {"bprhm1": BPRHM1, "bprhm2": BPRHM2}


def make_model(baseline: Baseline | str, family: str, params) -> BivariatePRH:
    """Build a validated model, e.g. ``make_model("weibull:1.5,1.2", "bprhm1", (1.3, 1.2, 1.0))``."""
    if isinstance(baseline, str):
        baseline = parse_baseline(baseline)
    try:
        cls = _FAMILY_CLASSES[family.lower()]
    except KeyError:
        raise ValueError(f"unknown model family {family!r}; expected bprhm1 or bprhm2") from None
    params = tuple(float(p) for p in params)
    expected = 3 if cls is BPRHM1 else 4
    if len(params) != expected:
        raise ValueError(f"{family} expects {expected} parameters, got {len(params)}")
    return cls(baseline, *params)


def model_from_dict(d: dict[str, Any]) -> BivariatePRH:
    """Inverse of :meth:`BivariatePRH.to_dict`."""
    return make_model(d["baseline"], d["family"], d["params"])
