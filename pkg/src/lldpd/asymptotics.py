"""Asymptotic matrices J, K and centering vector xi of the log-logistic DPD
estimator.

Every entry is an expectation integral of score products weighted by a power
of the density.  Two evaluation routes exist: an adaptive-quadrature route
(authoritative everywhere; used by all test statistics) and the literal
closed-form transcription (kept for documentation and the discrepancy
report, since some printed expressions fail basic sanity checks, e.g. the
closed form of the beta-component of xi does not vanish at tau = 0 although
the defining integral must).

Quadrature uses the substitution u = cdf(x), under which the scores become
  s_alpha = (beta/alpha) * (2u - 1)
  s_beta  = (1/beta) * (1 + (1 - 2u) * logit(u))
and the weight f(x(u))^tau = (beta/alpha)^tau * u^(tau(1-1/beta)) * (1-u)^(tau(1+1/beta)),
so every integrand lives on (0, 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .model import ModelParams
from .objective import check_tau, shape_beta_args
from .special import digamma, log_beta, trigamma

__all__ = [
    "MatrixSource",
    "AsymptoticMatrices",
    "QuadratureError",
    "J_quadrature",
    "xi_quadrature",
    "J_closed_form",
    "xi_closed_form",
    "K_of",
    "matrices",
    "invert_2x2",
    "DEFAULT_REPORT_GRID",
    "REPORT_ENTRIES",
    "ReportRow",
    "discrepancy_report",
    "report_to_csv",
]

_EPSABS = 1e-10
_LIMIT = 20000


class MatrixSource(Enum):
    """Which evaluation route produced a set of matrices."""

    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class AsymptoticMatrices:
    J: np.ndarray
    K: np.ndarray
    xi: np.ndarray
    at: ModelParams
    tau: float
    source: MatrixSource


def _quad01(fn, what: str) -> float:
    out = quad(fn, 0.0, 1.0, epsabs=_EPSABS, epsrel=1e-12, limit=_LIMIT, full_output=1)
    value, abserr = out[0], out[1]
    if len(out) > 3 and abserr > _EPSABS:
        raise QuadratureError(
            f"quadrature for {what} did not converge: achieved abs error {abserr:.3e} "
            f"(requested {_EPSABS:.0e}); {out[3]}"
        )
    return value


@lru_cache(maxsize=4096)
def _entries_quadrature(alpha: float, beta: float, tau: float):
    """(J11, J12, J22, xi_alpha, xi_beta) by adaptive quadrature on (0, 1)."""
    t1 = tau * (1.0 - 1.0 / beta)
    t2 = tau * (1.0 + 1.0 / beta)

    def g(u):
        return u**t1 * (1.0 - u) ** t2

    def s_beta(u):
        return 1.0 + (1.0 - 2.0 * u) * (math.log(u) - math.log1p(-u))

    j11 = (beta / alpha) ** (tau + 2.0) * _quad01(
        lambda u: (2.0 * u - 1.0) ** 2 * g(u), "J11"
    )
    j12 = (beta**tau / alpha ** (tau + 1.0)) * _quad01(
        lambda u: (2.0 * u - 1.0) * s_beta(u) * g(u), "J12"
    )
    j22 = (beta ** (tau - 2.0) / alpha**tau) * _quad01(
        lambda u: s_beta(u) ** 2 * g(u), "J22"
    )
    xi_a = (beta / alpha) ** (tau + 1.0) * _quad01(
        lambda u: (2.0 * u - 1.0) * g(u), "xi_alpha"
    )
    xi_b = (beta ** (tau - 1.0) / alpha**tau) * _quad01(
        lambda u: s_beta(u) * g(u), "xi_beta"
    )
    return j11, j12, j22, xi_a, xi_b


def _require_integrable(p: ModelParams, tau: float) -> float:
    tau = check_tau(tau)
    shape_beta_args(p, tau)  # raises when the weight is not integrable
    return tau


def J_quadrature(p: ModelParams, tau: float) -> np.ndarray:
    """Matrix of integrals of score outer products against f^(tau+1)."""
    tau = _require_integrable(p, tau)
    j11, j12, j22, _, _ = _entries_quadrature(p.alpha, p.beta, tau)
    return np.array([[j11, j12], [j12, j22]])


def xi_quadrature(p: ModelParams, tau: float) -> np.ndarray:
    """Vector of integrals of the scores against f^(tau+1)."""
    tau = _require_integrable(p, tau)
    _, _, _, xi_a, xi_b = _entries_quadrature(p.alpha, p.beta, tau)
    return np.array([xi_a, xi_b])


def J_closed_form(p: ModelParams, tau: float) -> np.ndarray:
    """Literal transcription of the published closed-form J entries."""
    tau = _require_integrable(p, tau)
    alpha, beta = p.alpha, p.beta

    def B(a, b):
        return math.exp(log_beta(a, b))

    c1 = (tau * beta + tau + beta) / beta
    c2 = (tau * beta - tau + beta) / beta
    c3 = (tau * beta + 2.0 * beta - tau) / beta
    c4 = (tau * beta + 3.0 * beta - tau) / beta
    c5 = (tau * beta + 2.0 * beta + tau) / beta

    j11 = (
        (beta / alpha) ** (tau + 2.0)
        * B(c1, c2)
        * (
            2.0
            * (beta * tau + tau + beta)
            * (-tau * beta - beta + tau)
            / (beta**2 * (tau + 1.0) * (2.0 * tau + 3.0))
            + 1.0
        )
    )

    pn = beta ** (tau - 2.0) / alpha**tau
    n1 = pn * B(c1, c2)
    n2 = 2.0 * pn * B(c1, c2) * (digamma(c2) - digamma(c1))
    n3 = -4.0 * pn * B(c1, c3) * (digamma(c3) - digamma(c1))
    n4 = pn * B(c1, c2) * ((digamma(c2) - digamma(c1)) ** 2 + trigamma(c2) + trigamma(c1))
    n5 = -4.0 * pn * B(c1, c3) * ((digamma(c3) - digamma(c1)) ** 2 + trigamma(c3) + trigamma(c1))
    n6 = 4.0 * pn * B(c1, c4) * ((digamma(c4) - digamma(c1)) ** 2 + trigamma(c4) + trigamma(c1))
    j22 = n1 + n2 + n3 + n4 + n5 + n6

    pb = beta**tau / alpha ** (tau + 1.0)
    b1 = pb * B(c1, c2)
    b2 = pb * B(c1, c2) * (digamma(c2) - digamma(c1))
    b3 = -2.0 * pb * B(c1, c3) * (digamma(c3) - digamma(c1))
    b4 = -2.0 * pb * B(c5, c2)
    b5 = -2.0 * pb * B(c5, c2) * (digamma(c2) - digamma(c5))
    b6 = 4.0 * pb * B(c5, c3) * (digamma(c3) - digamma(c5))
    j12 = b1 + b2 + b3 + b4 + b5 + b6

    return np.array([[j11, j12], [j12, j22]])


def xi_closed_form(p: ModelParams, tau: float) -> np.ndarray:
    """Literal transcription of the published closed-form xi components."""
    tau = _require_integrable(p, tau)
    alpha, beta = p.alpha, p.beta

    def B(a, b):
        return math.exp(log_beta(a, b))

    c1 = (tau * beta + tau + beta) / beta
    c2 = (tau * beta - tau + beta) / beta
    c3 = (tau * beta + 2.0 * beta - tau) / beta

    xi_a = (beta / alpha) ** (tau + 1.0) * B(c1, c2) * (-tau / (beta + tau * beta))
    xi_b = (
        beta ** (tau - 1.0)
        / alpha**tau
        * B(c1, c2)
        * (
            1.0
            + digamma(c2)
            + (tau * beta + beta - tau) / (beta * (2.0 * tau + 2.0)) * digamma(c3)
            + (3.0 * tau * beta + 3.0 * beta - tau) / (2.0 * tau * beta + 2.0 * beta) * digamma(c1)
        )
    )
    return np.array([xi_a, xi_b])


def K_of(p: ModelParams, tau: float, source: MatrixSource = MatrixSource.QUADRATURE) -> np.ndarray:
    """Variance matrix K = J(2*tau) - xi(tau) xi(tau)^T from the chosen source."""
    tau = check_tau(tau)
    if source is MatrixSource.QUADRATURE:
        j2 = J_quadrature(p, 2.0 * tau)
        xi = xi_quadrature(p, tau)
    else:
        j2 = J_closed_form(p, 2.0 * tau)
        xi = xi_closed_form(p, tau)
    return j2 - np.outer(xi, xi)


def matrices(p: ModelParams, tau: float, source: MatrixSource = MatrixSource.QUADRATURE) -> AsymptoticMatrices:
    """Bundle J, K, xi at (p, tau) from one source."""
    if source is MatrixSource.QUADRATURE:
        J = J_quadrature(p, tau)
        xi = xi_quadrature(p, tau)
    else:
        J = J_closed_form(p, tau)
        xi = xi_closed_form(p, tau)
    K = K_of(p, tau, source)
    return AsymptoticMatrices(J=J, K=K, xi=xi, at=p, tau=check_tau(tau), source=source)


def invert_2x2(m: np.ndarray, cond_limit: float = 1e12) -> np.ndarray:
    """Cofactor inverse of a 2x2 matrix with a condition-number guard."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0.0 or not np.isfinite(det):
        raise np.linalg.LinAlgError("singular 2x2 matrix")
    cond = np.linalg.cond(m)
    if cond > cond_limit:
        raise np.linalg.LinAlgError(
            f"2x2 matrix is ill-conditioned: cond = {cond:.3e} > {cond_limit:.0e}"
        )
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


# ---------------------------------------------------------------------------
# Discrepancy report: closed forms vs quadrature over a parameter grid.
# ---------------------------------------------------------------------------

DEFAULT_REPORT_GRID = (
    (0.5, 1.0, 3.0),  # alpha
    (2.0, 5.0, 10.0),  # beta
    (0.0, 0.25, 0.5, 1.0),  # tau
)

REPORT_ENTRIES = ("J11", "J12", "J22", "K11", "K12", "K22", "xi_a", "xi_b")


@dataclass(frozen=True)
class ReportRow:
    alpha: float
    beta: float
    tau: float
    entry: str
    closed: float
    quadrature: float
    rel_dev: float


def _rel_dev(closed: float, quadrature: float) -> float:
    if quadrature == 0.0:
        return 0.0 if closed == 0.0 else math.inf
    return abs(closed - quadrature) / abs(quadrature)


def discrepancy_report(grid=DEFAULT_REPORT_GRID) -> list[ReportRow]:
    """Per-entry relative deviation |closed - quadrature| / |quadrature| over
    the grid, rows sorted by (alpha, beta, tau, entry)."""
    alphas, betas, taus = grid
    rows: list[ReportRow] = []
    for alpha in sorted(alphas):
        for beta in sorted(betas):
            for tau in sorted(taus):
                p = ModelParams(alpha, beta)
                values: dict[str, tuple[float, float]] = {}
                jq = J_quadrature(p, tau)
                jc = J_closed_form(p, tau)
                for name, idx in (("J11", (0, 0)), ("J12", (0, 1)), ("J22", (1, 1))):
                    values[name] = (jc[idx], jq[idx])
                kq = K_of(p, tau, MatrixSource.QUADRATURE)
                kc = K_of(p, tau, MatrixSource.CLOSED_FORM)
                for name, idx in (("K11", (0, 0)), ("K12", (0, 1)), ("K22", (1, 1))):
                    values[name] = (kc[idx], kq[idx])
                xq = xi_quadrature(p, tau)
                xc = xi_closed_form(p, tau)
                values["xi_a"] = (xc[0], xq[0])
                values["xi_b"] = (xc[1], xq[1])
                for entry in sorted(REPORT_ENTRIES):
                    closed, quadrature = values[entry]
                    rows.append(
                        ReportRow(
                            alpha=alpha,
                            beta=beta,
                            tau=tau,
                            entry=entry,
                            closed=float(closed),
                            quadrature=float(quadrature),
                            rel_dev=_rel_dev(float(closed), float(quadrature)),
                        )
                    )
    return rows


def report_to_csv(rows) -> str:
    """Render report rows as CSV text (17 significant digits)."""
    lines = ["alpha,beta,tau,entry,closed,quadrature,rel_dev"]
    for r in rows:
        lines.append(
            f"{r.alpha:.17g},{r.beta:.17g},{r.tau:.17g},{r.entry},"
            f"{r.closed:.17g},{r.quadrature:.17g},{r.rel_dev:.17g}"
        )
    return "\n".join(lines) + "\n"
