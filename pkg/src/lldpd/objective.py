"""The density-power-divergence surrogate objective for the log-logistic
family, with its exact integral term and analytic gradient.

The estimator maximizes, for tuning constant tau > 0,

    H(theta) = (1 + 1/tau) * mean(f(X_i)^tau) - integral(f^(1+tau)) - 1/tau,

and the mean log-density at tau = 0 (the likelihood branch).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, as_sample, log_pdf, score_alpha, score_beta
from .special import digamma, log_beta

__all__ = [
    "ObjectiveValue",
    "check_tau",
    "shape_beta_args",
    "integral_term",
    "integral_term_gradient",
    "objective",
    "objective_gradient",
]


@dataclass(frozen=True)
class ObjectiveValue:
    """Value of the surrogate objective at given parameters."""

    value: float
    tau: float
    n: int


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0.0:
        raise ValueError(f"tau must be finite and >= 0, got {tau!r}")
    return tau


def shape_beta_args(p: ModelParams, tau: float) -> tuple[float, float]:
    """Arguments ((beta*tau - tau + beta)/beta, (beta*tau + tau + beta)/beta)
    of the beta function in the exact integral of f^(1+tau).

    The first one must stay positive, which fails for beta < 1 once
    tau >= beta/(1-beta); that breakdown is raised, never returned as NaN.
    """
    a = (1.0 + tau) - tau / p.beta
    b = (1.0 + tau) + tau / p.beta
    if a <= 0.0:
        raise ValueError(
            f"integral of f^(1+tau) diverges: beta-function argument "
            f"(beta*tau - tau + beta)/beta = {a:.6g} <= 0 at beta={p.beta}, tau={tau}"
        )
    return a, b


def integral_term(p: ModelParams, tau: float) -> float:
    """Exact integral of f^(1+tau) over (0, inf): (beta/alpha)^tau * B(a, b)."""
    tau = check_tau(tau)
    if tau == 0.0:
        return 1.0
    a, b = shape_beta_args(p, tau)
    return math.exp(tau * (math.log(p.beta) - math.log(p.alpha)) + log_beta(a, b))


def integral_term_gradient(p: ModelParams, tau: float) -> np.ndarray:
    """Gradient of integral_term with respect to (alpha, beta)."""
    tau = check_tau(tau)
    if tau == 0.0:
        return np.zeros(2)
    a, b = shape_beta_args(p, tau)
    value = integral_term(p, tau)
    d_alpha = -(tau / p.alpha) * value
    d_beta = value * (tau / p.beta + (tau / p.beta**2) * (digamma(a) - digamma(b)))
    return np.array([d_alpha, d_beta])


def objective(sample, p: ModelParams, tau: float) -> ObjectiveValue:
    """Evaluate the surrogate objective on a sample.

    For tau = 0 this is the mean log-likelihood (additive constant fixed to 0).
    """
    x = as_sample(sample)
    tau = check_tau(tau)
    lf = log_pdf(x, p)
    if tau == 0.0:
        value = float(np.mean(lf))
    else:
        value = (
            (1.0 + 1.0 / tau) * float(np.mean(np.exp(tau * lf)))
            - integral_term(p, tau)
            - 1.0 / tau
        )
    return ObjectiveValue(value=value, tau=tau, n=x.size)


def objective_gradient(sample, p: ModelParams, tau: float) -> np.ndarray:
    """Analytic gradient of the objective with respect to (alpha, beta)."""
    x = as_sample(sample)
    tau = check_tau(tau)
    if tau == 0.0:
        return np.array(
            [float(np.mean(score_alpha(x, p))), float(np.mean(score_beta(x, p)))]
        )
    w = np.exp(tau * log_pdf(x, p))
    weighted = (1.0 + tau) * np.array(
        [float(np.mean(score_alpha(x, p) * w)), float(np.mean(score_beta(x, p) * w))]
    )
    return weighted - integral_term_gradient(p, tau)
