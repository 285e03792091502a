"""Wald-type test statistics built on the robust estimator.

The quadratic forms are normalized by the sandwich covariance
Sigma = J^{-1} K J^{-1}; all matrices come from the quadrature source.
Simple nulls evaluate Sigma at the null point, composite nulls at the
unrestricted estimate.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .asymptotics import J_quadrature, K_of, invert_2x2
from .estimation import ConstraintSpec, EstimateResult, fit_mdpde, fit_restricted
from .model import ModelParams, as_sample
from .outcome import TestOutcome, make_outcome

__all__ = [
    "wald_simple_full",
    "wald_simple_alpha",
    "wald_simple_beta",
    "wald_composite",
]


def sandwich(p: ModelParams, tau: float) -> np.ndarray:
    """Asymptotic covariance J^{-1} K J^{-1} of the estimator at (p, tau)."""
    j_inv = invert_2x2(J_quadrature(p, tau))
    return j_inv @ K_of(p, tau) @ j_inv


def _rank_ok(M: np.ndarray, r: int) -> bool:
    s = np.linalg.svd(M, compute_uv=False)
    return s.size >= r and s[r - 1] > 1e-10 * max(1.0, s[0])


def wald_simple_full(sample, null: ModelParams, tau: float, fit: Optional[EstimateResult] = None) -> TestOutcome:
    """Two-parameter simple null: n * d^T Sigma(null)^{-1} d, df = 2."""
    x = as_sample(sample)
    est = fit if fit is not None else fit_mdpde(x, tau)
    d = np.array([est.params.alpha - null.alpha, est.params.beta - null.beta])
    sigma_inv = invert_2x2(sandwich(null, tau))
    statistic = x.size * float(d @ sigma_inv @ d)
    return make_outcome(statistic, df=2, tau=est.tau)


def wald_simple_alpha(sample, alpha0: float, beta_known: float, tau: float, fit: Optional[EstimateResult] = None) -> TestOutcome:
    """Scale-parameter null with known shape: n*(ahat-a0)^2 * J11^2/K11, df = 1."""
    x = as_sample(sample)
    est = fit if fit is not None else fit_restricted(x, tau, ConstraintSpec.fix_beta(beta_known))
    p0 = ModelParams(alpha0, beta_known)
    j11 = J_quadrature(p0, tau)[0, 0]
    k11 = K_of(p0, tau)[0, 0]
    if k11 <= 0.0:
        raise ValueError(f"variance entry K11 is not positive: {k11!r}")
    statistic = x.size * (est.params.alpha - alpha0) ** 2 * j11**2 / k11
    return make_outcome(statistic, df=1, tau=est.tau)


def wald_simple_beta(sample, beta0: float, alpha_known: float, tau: float, fit: Optional[EstimateResult] = None) -> TestOutcome:
    """Shape-parameter null with known scale: n*(bhat-b0)^2 * J22^2/K22, df = 1."""
    x = as_sample(sample)
    est = fit if fit is not None else fit_restricted(x, tau, ConstraintSpec.fix_alpha(alpha_known))
    p0 = ModelParams(alpha_known, beta0)
    j22 = J_quadrature(p0, tau)[1, 1]
    k22 = K_of(p0, tau)[1, 1]
    if k22 <= 0.0:
        raise ValueError(f"variance entry K22 is not positive: {k22!r}")
    statistic = x.size * (est.params.beta - beta0) ** 2 * j22**2 / k22
    return make_outcome(statistic, df=1, tau=est.tau)


def wald_composite(sample, constraint: ConstraintSpec, tau: float, fit: Optional[EstimateResult] = None) -> TestOutcome:
    """Composite null m(theta) = 0: n * m^T (M^T Sigma M)^{-1} m at the
    unrestricted estimate, df = rank of the constraint."""
    x = as_sample(sample)
    est = fit if fit is not None else fit_mdpde(x, tau)
    theta = est.params
    m = constraint.constraint_value(theta)
    M = constraint.constraint_jacobian(theta)
    if not _rank_ok(M, constraint.r):
        raise ValueError("constraint Jacobian is rank-deficient at the estimate")
    S = M.T @ sandwich(theta, tau) @ M
    if constraint.r == 1:
        s = float(S[0, 0])
        if s <= 0.0 or not np.isfinite(s):
            raise np.linalg.LinAlgError(f"singular test covariance: {s!r}")
        statistic = x.size * float(m[0]) ** 2 / s
    else:
        statistic = x.size * float(m @ invert_2x2(S) @ m)
    return make_outcome(statistic, df=constraint.r, tau=est.tau)
