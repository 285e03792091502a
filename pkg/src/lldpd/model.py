"""The log-logistic distribution: density, distribution function, quantiles,
sampling, and per-observation score components.

All densities are evaluated through u = cdf(x), i.e. f(x) = beta*u*(1-u)/x,
which keeps intermediates bounded for any shape beta and x far from the
median.  The working variable throughout is t = beta*(log x - log alpha),
so that u = expit(t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "as_sample",
    "log_pdf",
    "pdf",
    "cdf",
    "quantile",
    "sample",
    "score_alpha",
    "score_beta",
]


@dataclass(frozen=True)
class ModelParams:
    """Scale alpha > 0 (the median) and shape beta > 0 of a log-logistic law."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        beta = float(self.beta)
        if not (math.isfinite(alpha) and alpha > 0.0):
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha!r}")
        if not (math.isfinite(beta) and beta > 0.0):
            raise ValueError(f"beta must be finite and > 0, got {self.beta!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


def as_sample(values) -> np.ndarray:
    """Validate observations: a 1-d array of finite, strictly positive reals."""
    x = np.atleast_1d(np.asarray(values, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise ValueError("sample must be a non-empty 1-d collection")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("sample values must be finite and strictly positive")
    return x


def _t(x: np.ndarray, p: ModelParams) -> np.ndarray:
    return p.beta * (np.log(x) - math.log(p.alpha))


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("x must be finite and strictly positive")
    return x


def log_pdf(x, p: ModelParams):
    """Log-density log f(x) = log beta + log u + log(1-u) - log x."""
    x = _check_x(x)
    t = _t(x, p)
    return math.log(p.beta) - np.logaddexp(0.0, t) - np.logaddexp(0.0, -t) - np.log(x)


def pdf(x, p: ModelParams):
    """Density beta*alpha^beta*x^(beta-1)/(x^beta + alpha^beta)^2."""
    return np.exp(log_pdf(x, p))


def cdf(x, p: ModelParams):
    """Distribution function x^beta/(x^beta + alpha^beta), evaluated stably."""
    x = _check_x(x)
    t = _t(x, p)
    # expit(t) without overflow on either tail
    return np.where(t >= 0, 1.0 / (1.0 + np.exp(-np.abs(t))), np.exp(-np.abs(t)) / (1.0 + np.exp(-np.abs(t))))


def quantile(u, p: ModelParams):
    """Quantile alpha*(u/(1-u))^(1/beta) for u in (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    return p.alpha * np.exp((np.log(u) - np.log1p(-u)) / p.beta)


def sample(n: int, p: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Draw n independent variates by inverse-cdf transform of uniforms."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    u = rng.random(n)
    # rng.random() is in [0, 1); nudge an exact 0 into the open interval
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    return quantile(u, p)


def score_alpha(x, p: ModelParams):
    """d log f / d alpha = beta*(x^beta - alpha^beta)/(alpha*(x^beta + alpha^beta))."""
    x = _check_x(x)
    t = _t(x, p)
    return (p.beta / p.alpha) * np.tanh(0.5 * t)


def score_beta(x, p: ModelParams):
    """d log f / d beta = log(x/alpha)*(alpha^beta - x^beta)/(alpha^beta + x^beta) + 1/beta."""
    x = _check_x(x)
    t = _t(x, p)
    return (1.0 - t * np.tanh(0.5 * t)) / p.beta
