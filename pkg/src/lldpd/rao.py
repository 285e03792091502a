"""Rao-type (score) test statistics based on the divergence score functions.

Simple nulls need no estimation at all: the averaged score at the null is
normalized by the variance matrix K.  Composite nulls evaluate the score at
the restricted estimate and project through Q = J^{-1} M (M^T J^{-1} M)^{-1}.

The beta-score centering constant is an expectation integral whose published
closed form self-cancels, so it is always taken from quadrature.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .asymptotics import J_quadrature, K_of, invert_2x2, xi_quadrature
from .estimation import ConstraintSpec, EstimateResult, fit_restricted
from .model import ModelParams, as_sample, log_pdf, score_alpha, score_beta
from .objective import check_tau, integral_term
from .outcome import TestOutcome, make_outcome

__all__ = [
    "u_alpha",
    "u_beta",
    "rao_simple_alpha",
    "rao_simple_beta",
    "rao_simple_full",
    "rao_composite",
]


def u_alpha(x, p: ModelParams, tau: float):
    """Scale-score of the divergence: score_alpha*f^tau minus its model mean."""
    tau = check_tau(tau)
    if tau == 0.0:
        return score_alpha(x, p)
    w = np.exp(tau * log_pdf(x, p))
    centering = (tau / ((1.0 + tau) * p.alpha)) * integral_term(p, tau)
    return score_alpha(x, p) * w + centering


def u_beta(x, p: ModelParams, tau: float):
    """Shape-score of the divergence: score_beta*f^tau minus its model mean."""
    tau = check_tau(tau)
    if tau == 0.0:
        return score_beta(x, p)
    w = np.exp(tau * log_pdf(x, p))
    return score_beta(x, p) * w - xi_quadrature(p, tau)[1]


def _mean_scores(x: np.ndarray, p: ModelParams, tau: float) -> np.ndarray:
    return np.array([float(np.mean(u_alpha(x, p, tau))), float(np.mean(u_beta(x, p, tau)))])


def rao_simple_alpha(sample, alpha0: float, beta_known: float, tau: float) -> TestOutcome:
    """Scale null with known shape: n*U^2/K11, df = 1.  No estimation."""
    x = as_sample(sample)
    p0 = ModelParams(alpha0, beta_known)
    U = float(np.mean(u_alpha(x, p0, tau)))
    k11 = K_of(p0, tau)[0, 0]
    if k11 <= 0.0:
        raise ValueError(f"variance entry K11 is not positive: {k11!r}")
    statistic = x.size * U * U / k11
    return make_outcome(statistic, df=1, tau=check_tau(tau))


def rao_simple_beta(sample, beta0: float, alpha_known: float, tau: float) -> TestOutcome:
    """Shape null with known scale: n*U^2/K22, df = 1.  No estimation."""
    x = as_sample(sample)
    p0 = ModelParams(alpha_known, beta0)
    U = float(np.mean(u_beta(x, p0, tau)))
    k22 = K_of(p0, tau)[1, 1]
    if k22 <= 0.0:
        raise ValueError(f"variance entry K22 is not positive: {k22!r}")
    statistic = x.size * U * U / k22
    return make_outcome(statistic, df=1, tau=check_tau(tau))


def rao_simple_full(sample, null: ModelParams, tau: float) -> TestOutcome:
    """Two-parameter simple null: n*U^T K^{-1} U, df = 2.  No estimation."""
    x = as_sample(sample)
    U = _mean_scores(x, null, tau)
    k_inv = invert_2x2(K_of(null, tau))
    statistic = x.size * float(U @ k_inv @ U)
    return make_outcome(statistic, df=2, tau=check_tau(tau))


def rao_composite(sample, constraint: ConstraintSpec, tau: float, fit: Optional[EstimateResult] = None) -> TestOutcome:
    """Composite null via the restricted estimate:
    n * U^T Q (Q^T K Q)^{-1} Q^T U with Q = J^{-1} M (M^T J^{-1} M)^{-1},
    everything evaluated at the restricted estimate; df = rank."""
    x = as_sample(sample)
    tau = check_tau(tau)
    if constraint.kind == "fix_both":
        # the restricted set is a single point: identical to the simple test
        return rao_simple_full(x, ModelParams(constraint.alpha0, constraint.beta0), tau)
    est = fit if fit is not None else fit_restricted(x, tau, constraint)
    theta = est.params
    U = _mean_scores(x, theta, tau)
    M = constraint.constraint_jacobian(theta)
    s = np.linalg.svd(M, compute_uv=False)
    if s[constraint.r - 1] <= 1e-10 * max(1.0, s[0]):
        raise ValueError("constraint Jacobian is rank-deficient at the estimate")
    j_inv = invert_2x2(J_quadrature(theta, tau))
    K = K_of(theta, tau)
    A = M.T @ j_inv @ M  # r x r
    if constraint.r == 1:
        Q = (j_inv @ M) / float(A[0, 0])
        b = float((Q.T @ K @ Q)[0, 0])
        if b <= 0.0 or not np.isfinite(b):
            raise np.linalg.LinAlgError(f"singular projected variance: {b!r}")
        v = float(Q[:, 0] @ U)
        statistic = x.size * v * v / b
    else:
        Q = j_inv @ M @ invert_2x2(A)
        B = Q.T @ K @ Q
        v = Q.T @ U
        statistic = x.size * float(v @ invert_2x2(B) @ v)
    return make_outcome(statistic, df=constraint.r, tau=tau)
