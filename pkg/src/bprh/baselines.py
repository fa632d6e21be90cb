"""Baseline distribution families ``F0`` for proportional reversed hazards models.

Every family is written either in *hazard form*, ``F0(y) = 1 - exp(-H(y))``,
or in *reversed form*, ``F0(y) = exp(-K(y))``.  The split lets ``log F0`` be
evaluated without cancellation on both tails, which matters once ``F0`` is
raised to powers of order ten inside the bivariate models.

All evaluators accept scalars or arrays and return ``float`` / ``ndarray``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import astuple, dataclass, fields, replace
from typing import ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "Baseline",
    "Weibull",
    "Exponential",
    "Rayleigh",
    "InverseWeibull",
    "InverseExponential",
    "Power",
    "ReflectedWeibull",
    "LinearFailureRate",
    "ExponentialForm",
    "FAMILIES",
    "parse_baseline",
]


def _scalar_or_array(x: NDArray) -> float | NDArray:
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class Baseline(ABC):
    """Base class of a baseline distribution with support ``(a, b)``."""

    name: ClassVar[str] = ""
    aliases: ClassVar[tuple[str, ...]] = ()

    def __post_init__(self) -> None:
        bad = [f.name for f in fields(self) if not (getattr(self, f.name) > 0)]
        if bad:
            raise ValueError(
                f"{self.name}: parameters must be positive, got "
                + ", ".join(f"{k}={getattr(self, k)!r}" for k in bad)
            )

    # family-specific pieces -------------------------------------------------

    @property
    @abstractmethod
    def support(self) -> tuple[float, float]:
        """Support endpoints ``(a, b)``; either may be infinite."""

    @abstractmethod
    def _logcdf_inside(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _logpdf_inside(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _rhr_inside(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _quantile(self, u: NDArray) -> NDArray: ...

    @abstractmethod
    def initial_guess(self, values: ArrayLike) -> tuple[float, ...]:
        """Rough parameter values for starting an optimizer on ``values``."""

    # generic machinery ------------------------------------------------------

    @property
    def params(self) -> tuple[float, ...]:
        return astuple(self)

    def with_params(self, params) -> "Baseline":
        names = [f.name for f in fields(self)]
        return replace(self, **dict(zip(names, (float(p) for p in params))))

    @property
    def n_params(self) -> int:
        return len(fields(self))

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(repr(float(p)) for p in self.params)

    def _masks(self, y: NDArray) -> tuple[NDArray, NDArray, NDArray]:
        a, b = self.support
        below = y <= a
        above = y >= b
        return below, above, ~(below | above)

    def logcdf(self, y: ArrayLike) -> float | NDArray:
        """``log F0(y)``; ``-inf`` below the support and ``0`` above it."""
        y = np.asarray(y, dtype=float)
        below, above, inside = self._masks(y)
        out = np.zeros(y.shape)
        out[below] = -np.inf
        if inside.any():
            with np.errstate(over="ignore", divide="ignore"):
                out[inside] = self._logcdf_inside(y[inside])
        return _scalar_or_array(out)

    def cdf(self, y: ArrayLike) -> float | NDArray:
        return _scalar_or_array(np.exp(np.asarray(self.logcdf(y))))

    def logpdf(self, y: ArrayLike) -> float | NDArray:
        y = np.asarray(y, dtype=float)
        _, _, inside = self._masks(y)
        out = np.full(y.shape, -np.inf)
        if inside.any():
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                out[inside] = self._logpdf_inside(y[inside])
        return _scalar_or_array(out)

    def pdf(self, y: ArrayLike) -> float | NDArray:
        return _scalar_or_array(np.exp(np.asarray(self.logpdf(y))))

    def reversed_hazard(self, y: ArrayLike) -> float | NDArray:
        """Reversed hazard rate ``f0(y) / F0(y)``.

        Raises
        ------
        ValueError
            If ``F0(y) = 0`` for any requested point (the rate is undefined
            at or below the lower support endpoint).
        """
        y = np.asarray(y, dtype=float)
        below, above, inside = self._masks(y)
        if below.any():
            raise ValueError(
                f"{self.name}: reversed hazard undefined where F0(y) = 0 "
                f"(y <= {self.support[0]})"
            )
        out = np.zeros(y.shape)
        if inside.any():
            out[inside] = self._rhr_inside(y[inside])
        return _scalar_or_array(out)

    def quantile(self, u: ArrayLike) -> float | NDArray:
        """Inverse of :meth:`cdf` on ``(0, 1)``."""
        u = np.asarray(u, dtype=float)
        if not np.all((u > 0) & (u < 1)):
            raise ValueError(f"{self.name}: quantile requires 0 < u < 1")
        return _scalar_or_array(self._quantile(u))

    def quantile_log(self, logu: ArrayLike) -> float | NDArray:
        """Quantile addressed by ``log u`` (``log u < 0``); avoids ``exp`` round trips."""
        logu = np.asarray(logu, dtype=float)
        if not np.all(logu < 0):
            raise ValueError(f"{self.name}: quantile_log requires log u < 0")
        return _scalar_or_array(self._quantile_log(logu))

    def _quantile_log(self, logu: NDArray) -> NDArray:
        return self._quantile(np.exp(logu))


@dataclass(frozen=True)
class _HazardForm(Baseline):
    """``F0 = 1 - exp(-H)`` with cumulative hazard ``H`` and hazard ``h``."""

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    @abstractmethod
    def _H(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _h(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _Hinv(self, x: NDArray) -> NDArray: ...

    def _logcdf_inside(self, y):
        return np.log(-np.expm1(-self._H(y)))

    def _logpdf_inside(self, y):
        H = self._H(y)
        with np.errstate(divide="ignore"):
            return np.log(self._h(y)) - H

    def _rhr_inside(self, y):
        return self._h(y) / np.expm1(self._H(y))

    def _quantile(self, u):
        return self._Hinv(-np.log1p(-u))

    def _quantile_log(self, logu):
        # -log(1 - u) with u = exp(logu)
        return self._Hinv(-np.log(-np.expm1(logu)))


@dataclass(frozen=True)
class _ReversedForm(Baseline):
    """``F0 = exp(-K)`` with ``k = -K'`` equal to the reversed hazard."""

    @abstractmethod
    def _K(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _k(self, y: NDArray) -> NDArray: ...

    @abstractmethod
    def _Kinv(self, x: NDArray) -> NDArray: ...

    def _logcdf_inside(self, y):
        return -self._K(y)

    def _logpdf_inside(self, y):
        with np.errstate(divide="ignore"):
            return np.log(self._k(y)) - self._K(y)

    def _rhr_inside(self, y):
        return self._k(y)

    def _quantile(self, u):
        return self._Kinv(-np.log(u))

    def _quantile_log(self, logu):
        return self._Kinv(-logu)


@dataclass(frozen=True)
class Weibull(_HazardForm):
    """``F0(y) = 1 - exp(-lam * y**beta)``, ``y > 0``."""

    lam: float
    beta: float
    name: ClassVar[str] = "weibull"
    aliases: ClassVar[tuple[str, ...]] = ("w",)

    def _H(self, y):
        return self.lam * y**self.beta

    def _h(self, y):
        return self.lam * self.beta * y ** (self.beta - 1.0)

    def _Hinv(self, x):
        return (x / self.lam) ** (1.0 / self.beta)

    def initial_guess(self, values):
        med = float(np.median(values))
        beta = 1.5
        return (math.log(2.0) / med**beta, beta)


@dataclass(frozen=True)
class Exponential(_HazardForm):
    """``F0(y) = 1 - exp(-lam * y)``, ``y > 0``."""

    lam: float
    name: ClassVar[str] = "exponential"
    aliases: ClassVar[tuple[str, ...]] = ("exp", "e")

    def _H(self, y):
        return self.lam * y

    def _h(self, y):
        return np.full_like(y, self.lam)

    def _Hinv(self, x):
        return x / self.lam

    def initial_guess(self, values):
        return (1.0 / float(np.mean(values)),)


@dataclass(frozen=True)
class Rayleigh(_HazardForm):
    """``F0(y) = 1 - exp(-lam * y**2)``, ``y > 0``."""

    lam: float
    name: ClassVar[str] = "rayleigh"
    aliases: ClassVar[tuple[str, ...]] = ("r",)

    def _H(self, y):
        return self.lam * y * y

    def _h(self, y):
        return 2.0 * self.lam * y

    def _Hinv(self, x):
        return np.sqrt(x / self.lam)

    def initial_guess(self, values):
        return (1.0 / float(np.mean(np.square(values))),)


@dataclass(frozen=True)
class LinearFailureRate(_HazardForm):
    """``F0(y) = 1 - exp(-a0*y - b0*y**2/2)``, hazard ``a0 + b0*y``."""

    a0: float
    b0: float
    name: ClassVar[str] = "lfr"
    aliases: ClassVar[tuple[str, ...]] = ("linearfailurerate", "linear_failure_rate")

    def _H(self, y):
        return self.a0 * y + 0.5 * self.b0 * y * y

    def _h(self, y):
        return self.a0 + self.b0 * y

    def _Hinv(self, x):
        # positive root of b0/2 y^2 + a0 y - x, written without cancellation
        return 2.0 * x / (self.a0 + np.sqrt(self.a0**2 + 2.0 * self.b0 * x))

    def initial_guess(self, values):
        m = float(np.mean(values))
        return (0.5 / m, 0.5 / m**2)


@dataclass(frozen=True)
class InverseWeibull(_ReversedForm):
    """``F0(y) = exp(-y**(-alpha))``, ``y > 0``."""

    alpha: float
    name: ClassVar[str] = "inverseweibull"
    aliases: ClassVar[tuple[str, ...]] = ("iw", "inverse_weibull")

    @property
    def support(self):
        return (0.0, math.inf)

    def _K(self, y):
        return y ** (-self.alpha)

    def _k(self, y):
        return self.alpha * y ** (-self.alpha - 1.0)

    def _Kinv(self, x):
        return x ** (-1.0 / self.alpha)

    def initial_guess(self, values):
        return (1.5,)


@dataclass(frozen=True)
class InverseExponential(_ReversedForm):
    """``F0(y) = exp(-lam / y)``, ``y > 0``; ``lam = 1`` is the standard form."""

    lam: float = 1.0
    name: ClassVar[str] = "inverseexponential"
    aliases: ClassVar[tuple[str, ...]] = ("ie", "inverse_exponential")

    @property
    def support(self):
        return (0.0, math.inf)

    def _K(self, y):
        return self.lam / y

    def _k(self, y):
        return self.lam / (y * y)

    def _Kinv(self, x):
        return self.lam / x

    def initial_guess(self, values):
        return (float(np.median(values)),)


@dataclass(frozen=True)
class Power(_ReversedForm):
    """``F0(y) = (y / b)**c`` on ``0 <= y < b``."""

    c: float
    b: float
    name: ClassVar[str] = "power"
    aliases: ClassVar[tuple[str, ...]] = ("pow",)

    @property
    def support(self):
        return (0.0, self.b)

    def _K(self, y):
        return -self.c * np.log(y / self.b)

    def _k(self, y):
        return self.c / y

    def _Kinv(self, x):
        return self.b * np.exp(-x / self.c)

    def initial_guess(self, values):
        return (1.0, 1.05 * float(np.max(values)))


@dataclass(frozen=True)
class ReflectedWeibull(_ReversedForm):
    """``F0(y) = exp(-c * y**2)`` on ``y < 0``."""

    c: float
    name: ClassVar[str] = "reflectedweibull"
    aliases: ClassVar[tuple[str, ...]] = ("rw", "reflected_weibull")

    @property
    def support(self):
        return (-math.inf, 0.0)

    def _K(self, y):
        return self.c * y * y

    def _k(self, y):
        return -2.0 * self.c * y

    def _Kinv(self, x):
        return -np.sqrt(x / self.c)

    def initial_guess(self, values):
        return (1.0 / float(np.mean(np.square(values))),)


@dataclass(frozen=True)
class ExponentialForm(_ReversedForm):
    """``F0(y) = exp(c * (y - b))`` on ``y <= b``.

    The only baseline shape under which the bivariate class has the
    reversed lack-of-memory property under additive shifts.  Not one of the
    fitting families; used by the characterization checks.
    """

    c: float
    b: float = 1.0
    name: ClassVar[str] = "expform"
    aliases: ClassVar[tuple[str, ...]] = ("exponentialform",)

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"expform: c must be positive, got c={self.c!r}")
        if not math.isfinite(self.b):
            raise ValueError(f"expform: b must be finite, got b={self.b!r}")

    @property
    def support(self):
        return (-math.inf, self.b)

    def _K(self, y):
        return self.c * (self.b - y)

    def _k(self, y):
        return np.full_like(y, self.c)

    def _Kinv(self, x):
        return self.b - x / self.c

    def initial_guess(self, values):
        v = np.asarray(values, dtype=float)
        return (1.0 / float(np.std(v) or 1.0), float(np.max(v)) + 1e-3)


#: The eight fitting families, keyed by canonical name.
FAMILIES: dict[str, type[Baseline]] = {
    cls.name: cls
    for cls in (
        Weibull,
        Exponential,
        Rayleigh,
        InverseWeibull,
        InverseExponential,
        Power,
        ReflectedWeibull,
        LinearFailureRate,
    )
}

_LOOKUP: dict[str, type[Baseline]] = {}
for _cls in (*FAMILIES.values(), ExponentialForm):
    _LOOKUP[_cls.name] = _cls
    for _alias in _cls.aliases:
        _LOOKUP[_alias] = _cls


def baseline_class(name: str) -> type[Baseline]:
    try:
        return _LOOKUP[name.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown baseline family {name!r}; expected one of {sorted(FAMILIES)}"
        ) from None


def parse_baseline(text: str) -> Baseline:
    """Parse ``"family:p1,p2"`` strings such as ``"weibull:1.5,1.2"`` or ``"ie"``."""
    name, _, rest = text.partition(":")
    cls = baseline_class(name)
    values = [float(v) for v in rest.split(",") if v.strip()] if rest else []
    try:
        return cls(*values)
    except TypeError:
        n = len([f for f in fields(cls)])
        raise ValueError(
            f"{cls.name}: expected up to {n} parameter(s), got {len(values)} in {text!r}"
        ) from None
