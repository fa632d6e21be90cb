"""Sampling from the bivariate models, with optional left censoring.

Random numbers come from a counter-based generator (Philox) keyed by
``(seed, stream)``.  Pair ``i`` always consumes the same eight uniforms, so a
sample is reproducible bit for bit regardless of how it is chunked.

Three samplers are provided:

``"recipe"``
    Max-then-ratio construction: draw ``max(Y1, Y2)`` from ``F0**theta``, pick
    which coordinate is the maximum, then place the other one through
    ``F0(t_other) = F0(t_max) * R`` where ``R`` follows the family's
    conditional ratio law (including the atom at ``R = 1`` of BPRHM1).
``"literal"``
    Same skeleton, but ``R = F0(F_other^{-1}(U3))`` and the branch test
    ``U1 >= P(Y1 > Y2)`` selects ``Y1`` as the maximum, the recipe taken
    word for word.  Kept for comparison; it does not reproduce BPRHM1's
    ties nor, in general, the correct marginals.
``"oracle"``
    Independent exact constructions: ``(max(V1, V3), max(V2, V3))`` for
    BPRHM1 and region / maximum / conditional ratio for BPRHM2.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray

from .models import BPRHM1, BPRHM2, BivariatePRH, model_from_dict

__all__ = [
    "DEFAULT_SEED",
    "CalibrationError",
    "CensoringPlan",
    "CensoredSample",
    "SampleFormatError",
    "uniform_block",
    "censoring_threshold",
    "censoring_fraction",
    "recipe_transform",
    "oracle_transform",
    "draw_pairs",
    "draw_pair_paper",
    "draw_pair_oracle",
    "simulate_sample",
]

DEFAULT_SEED = 20240531
UNIFORMS_PER_PAIR = 8
SAMPLERS = ("recipe", "literal", "oracle")

_GL_NODES, _GL_WEIGHTS = leggauss(128)


class CalibrationError(ValueError):
    """The requested censoring fraction cannot be reached."""


class SampleFormatError(ValueError):
    """Malformed sample CSV."""


def uniform_block(seed: int, start: int, count: int, stream: int = 0) -> NDArray:
    """Uniforms for pairs ``start .. start+count-1``, shape ``(count, 8)``.

    Each pair owns two Philox counters; ``stream`` selects an independent key
    (used for bootstrap replicates).
    """
    key = np.random.SeedSequence([int(seed), int(stream)]).generate_state(2, np.uint64)
    bitgen = np.random.Philox(key=key)
    bitgen.advance(2 * int(start))
    u = np.random.Generator(bitgen).random((int(count), UNIFORMS_PER_PAIR))
    # Generator.random is on [0, 1); keep every draw strictly positive
    return np.where(u == 0.0, 2.0**-60, u)


# -- censoring --------------------------------------------------------------


@dataclass(frozen=True)
class CensoringPlan:
    """Censoring times ``c_i = z_i * U`` calibrated to a target fraction ``p``."""

    p: float = 0.0
    z1: float = 0.0
    z2: float = 0.0

    @property
    def active(self) -> bool:
        return self.p > 0

    def observed_prob(self, i: int, y) -> NDArray:
        """``P(c_i <= y)``, the probability that an event at ``y`` is observed."""
        z = self.z1 if i == 1 else self.z2
        y = np.asarray(y, dtype=float)
        if not self.active:
            return np.ones_like(y)
        return np.clip(y / z, 0.0, 1.0)


def censoring_fraction(model: BivariatePRH, i: int, z: float) -> float:
    """``(1/z) * integral_0^z F_Yi(c) dc`` by 128-point Gauss-Legendre."""
    c = 0.5 * z * (_GL_NODES + 1.0)
    return float(0.5 * np.dot(_GL_WEIGHTS, model.marginal_cdf(i, c)))


def censoring_threshold(model: BivariatePRH, i: int, p: float, rtol: float = 1e-10) -> float:
    """Upper bound ``z_i`` of the censoring-time law giving censoring fraction ``p``.

    The fraction ``(1/z) int_0^z F_Yi`` is the running average of a
    nondecreasing function, so it increases in ``z`` from ``F_Yi(0+)`` to 1
    and bisection finds the unique root.

    Raises
    ------
    CalibrationError
        If ``p`` lies outside the attainable range ``(F_Yi(0+), 1)``.
    """
    if not 0 < p < 1:
        raise CalibrationError(f"censoring fraction must be in (0, 1), got {p}")
    a, b = model.baseline.support
    lowest = float(model.marginal_cdf(i, max(a, 0.0) if a > 0 else np.nextafter(0.0, 1.0)))
    if p <= lowest:
        raise CalibrationError(
            f"censoring fraction {p} not attainable for Y{i}: "
            f"attainable range is ({lowest:.6g}, 1)"
        )
    hi = float(model.marginal_quantile(i, 0.5)) if b > 0 else 1.0
    hi = max(hi, 1e-12)
    for _ in range(2000):
        if censoring_fraction(model, i, hi) > p:
            break
        hi *= 2.0
    else:  # pragma: no cover - average of a cdf always reaches any p < 1
        raise CalibrationError(f"could not bracket censoring threshold for p={p}")
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if censoring_fraction(model, i, mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def make_plan(model: BivariatePRH, p: float) -> CensoringPlan:
    if p == 0:
        return CensoringPlan()
    return CensoringPlan(p, censoring_threshold(model, 1, p), censoring_threshold(model, 2, p))


# -- pair samplers ----------------------------------------------------------


def _ratio_law(model: BivariatePRH, y1_is_max: NDArray, u3: NDArray) -> NDArray:
    """``log R`` for the conditional ratio ``F0(other) / F0(max)``."""
    if isinstance(model, BPRHM1):
        a1, a2, a3 = model.params
        # given Y1 >= Y2: strict with prob a1/(a1+a3), R ~ W**(1/(a2+a3)); else a tie.
        # the Y2 branch is Y2 > Y1 and carries no atom
        strict = np.where(y1_is_max, a1 / (a1 + a3), 1.0)
        expo = np.where(y1_is_max, a2 + a3, a1 + a3)
        logr = np.log(np.minimum(u3 / strict, 1.0)) / expo
        return np.where(u3 <= strict, logr, 0.0)
    if isinstance(model, BPRHM2):
        expo = np.where(y1_is_max, model.theta2p, model.theta1p)
        return np.log(u3) / expo
    raise TypeError(f"unsupported model {type(model).__name__}")


def recipe_transform(model: BivariatePRH, u: NDArray, literal: bool = False) -> tuple[NDArray, NDArray]:
    """Map uniforms ``u[:, 0:3]`` to pairs with the max-then-ratio construction."""
    u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
    p_gt, p_lt, p_tie = model.region_probabilities()
    log_fmax = np.log(u2) / model.theta
    if literal:
        y1_is_max = u1 >= p_gt
        v2 = model._marginal_quantile_u(2, u3)
        v1 = model._marginal_quantile_u(1, u3)
        logr = np.log(np.where(y1_is_max, v2, v1))
    else:
        y1_is_max = u1 <= p_gt + p_tie
        logr = _ratio_law(model, y1_is_max, u3)
    q = model.baseline.quantile_log
    t_max = np.asarray(q(log_fmax))
    # R = 1 must reproduce t_max exactly, hence the shared log argument
    t_other = np.where(logr == 0.0, t_max, np.asarray(q(np.minimum(log_fmax + logr, log_fmax))))
    t1 = np.where(y1_is_max, t_max, t_other)
    t2 = np.where(y1_is_max, t_other, t_max)
    return t1, t2


def oracle_transform(model: BivariatePRH, u: NDArray) -> tuple[NDArray, NDArray]:
    """Exact reference sampler driven by ``u[:, 0:3]``."""
    q = model.baseline.quantile_log
    if isinstance(model, BPRHM1):
        v = [np.asarray(q(np.log(u[:, k]) / a)) for k, a in enumerate(model.params)]
        return np.maximum(v[0], v[2]), np.maximum(v[1], v[2])
    if isinstance(model, BPRHM2):
        first_is_max = u[:, 0] < model.theta1 / model.theta
        log_fmax = np.log(u[:, 1]) / model.theta
        t_max = np.asarray(q(log_fmax))
        expo = np.where(first_is_max, model.theta2p, model.theta1p)
        t_other = np.asarray(q(log_fmax + np.log(u[:, 2]) / expo))
        return np.where(first_is_max, t_max, t_other), np.where(first_is_max, t_other, t_max)
    raise TypeError(f"unsupported model {type(model).__name__}")


def draw_pairs(
    model: BivariatePRH,
    n: int,
    seed: int = DEFAULT_SEED,
    method: str = "recipe",
    start: int = 0,
    stream: int = 0,
) -> tuple[NDArray, NDArray]:
    """Latent (uncensored) pairs ``start .. start+n-1`` from one of the samplers."""
    u = uniform_block(seed, start, n, stream)
    if method == "oracle":
        return oracle_transform(model, u)
    if method in ("recipe", "literal"):
        return recipe_transform(model, u, literal=method == "literal")
    raise ValueError(f"unknown sampler {method!r}; expected one of {SAMPLERS}")


def draw_pair_paper(model: BivariatePRH, seed: int, index: int, literal: bool = False) -> tuple[float, float]:
    """Single pair number ``index`` of the max-then-ratio sampler."""
    t1, t2 = draw_pairs(model, 1, seed, "literal" if literal else "recipe", start=index)
    return float(t1[0]), float(t2[0])


def draw_pair_oracle(model: BivariatePRH, seed: int, index: int) -> tuple[float, float]:
    """Single pair number ``index`` of the exact reference sampler."""
    t1, t2 = draw_pairs(model, 1, seed, "oracle", start=index)
    return float(t1[0]), float(t2[0])


# -- censored samples --------------------------------------------------------


@dataclass
class CensoredSample:
    """Recorded values with event indicators (1 = observed, 0 = left-censored)."""

    y1: NDArray
    y2: NDArray
    delta1: NDArray
    delta2: NDArray
    seed: int | None = None
    plan: CensoringPlan = field(default_factory=CensoringPlan)
    model: BivariatePRH | None = None
    method: str | None = None

    def __post_init__(self) -> None:
        self.y1 = np.asarray(self.y1, dtype=float)
        self.y2 = np.asarray(self.y2, dtype=float)
        self.delta1 = np.asarray(self.delta1, dtype=np.int8)
        self.delta2 = np.asarray(self.delta2, dtype=np.int8)
        n = len(self.y1)
        if not (len(self.y2) == len(self.delta1) == len(self.delta2) == n):
            raise ValueError("y1, y2, delta1, delta2 must have equal length")

    @property
    def n(self) -> int:
        return len(self.y1)

    def __len__(self) -> int:
        return self.n

    def censored_fraction(self) -> tuple[float, float]:
        return (1.0 - float(self.delta1.mean()), 1.0 - float(self.delta2.mean()))

    @classmethod
    def uncensored(cls, y1, y2, **kw) -> "CensoredSample":
        y1 = np.asarray(y1, dtype=float)
        ones = np.ones(len(y1), dtype=np.int8)
        return cls(y1, y2, ones, ones.copy(), **kw)

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "p": self.plan.p,
            "z1": self.plan.z1,
            "z2": self.plan.z2,
            "sampler": self.method,
            "model": self.model.to_dict() if self.model is not None else None,
        }

    def to_csv(self, path: str | Path, sidecar: bool = True) -> None:
        """Write ``y1,y2,delta1,delta2`` rows and, optionally, ``<stem>.json`` metadata."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            fh.write("y1,y2,delta1,delta2\n")
            for a, b, d1, d2 in zip(self.y1, self.y2, self.delta1, self.delta2):
                fh.write(f"{float(a)!r},{float(b)!r},{int(d1)},{int(d2)}\n")
        if sidecar:
            path.with_suffix(".json").write_text(json.dumps(self.metadata(), indent=2) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "CensoredSample":
        """Read a sample CSV; a sibling ``.json`` file restores seed, plan and model."""
        path = Path(path)
        rows: list[tuple[float, float, int, int]] = []
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise SampleFormatError(f"{path}: empty file")
            header = [h.strip() for h in header]
            if header[:2] != ["y1", "y2"]:
                raise SampleFormatError(f"{path}:1: expected header starting with y1,y2, got {header}")
            has_delta = header[2:4] == ["delta1", "delta2"]
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    y1, y2 = float(row[0]), float(row[1])
                    d1, d2 = (int(row[2]), int(row[3])) if has_delta else (1, 1)
                except (ValueError, IndexError):
                    raise SampleFormatError(f"{path}:{lineno}: cannot parse row {row!r}") from None
                if d1 not in (0, 1) or d2 not in (0, 1):
                    raise SampleFormatError(f"{path}:{lineno}: delta values must be 0 or 1")
                if not (math.isfinite(y1) and math.isfinite(y2)):
                    raise SampleFormatError(f"{path}:{lineno}: non-finite value")
                rows.append((y1, y2, d1, d2))
        if not rows:
            raise SampleFormatError(f"{path}: no data rows")
        arr = np.array(rows)
        kw: dict = {}
        meta_path = path.with_suffix(".json")
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            kw["seed"] = meta.get("seed")
            kw["method"] = meta.get("sampler")
            kw["plan"] = CensoringPlan(meta.get("p", 0.0) or 0.0, meta.get("z1", 0.0) or 0.0, meta.get("z2", 0.0) or 0.0)
            if meta.get("model"):
                kw["model"] = model_from_dict(meta["model"])
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], **kw)


def simulate_sample(
    model: BivariatePRH,
    n: int,
    p: float = 0.0,
    seed: int = DEFAULT_SEED,
    method: str = "recipe",
    plan: CensoringPlan | None = None,
    stream: int = 0,
) -> CensoredSample:
    """Draw ``n`` pairs and left-censor each coordinate at ``c_i = z_i * U``.

    ``y_i = max(t_i, c_i)`` and ``delta_i = 1`` iff ``t_i >= c_i``.  With
    ``p = 0`` nothing is censored and ``y`` equals the latent draw.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= p < 1:
        raise ValueError(f"censoring fraction must be in [0, 1), got {p}")
    if plan is None:
        plan = make_plan(model, p)
    u = uniform_block(seed, 0, n, stream)
    if method == "oracle":
        t1, t2 = oracle_transform(model, u)
    elif method in ("recipe", "literal"):
        t1, t2 = recipe_transform(model, u, literal=method == "literal")
    else:
        raise ValueError(f"unknown sampler {method!r}; expected one of {SAMPLERS}")
    if plan.active:
        c1 = plan.z1 * u[:, 3]
        c2 = plan.z2 * u[:, 4]
        d1 = t1 >= c1
        d2 = t2 >= c2
        y1, y2 = np.where(d1, t1, c1), np.where(d2, t2, c2)
    else:
        d1 = d2 = np.ones(n, dtype=bool)
        y1, y2 = t1, t2
    return CensoredSample(y1, y2, d1, d2, seed=seed, plan=plan, model=model, method=method)
