"""Bivariate proportional reversed hazards models for left-censored lifetimes."""

from .baselines import (
    FAMILIES,
    Baseline,
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
from .models import BPRHM1, BPRHM2, BivariatePRH, make_model, model_from_dict

__version__ = "0.1.0"
