"""Scalar special functions: log-beta, digamma, trigamma.

Self-contained implementations (recurrence shift plus asymptotic tail) so the
closed-form matrix expressions do not depend on any external numeric backend.
"""
from __future__ import annotations

import math

__all__ = ["log_beta", "digamma", "trigamma"]

# Tail coefficients B_{2k}/(2k) of psi(x) ~ ln x - 1/(2x) - sum_k B_{2k}/(2k x^{2k}).
_PSI_TAIL = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# Bernoulli numbers B_{2k} of psi'(x) ~ 1/x + 1/(2x^2) + sum_k B_{2k}/x^{2k+1}.
_TRI_TAIL = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)

# Shift point for the recurrences; the truncated tails are ~1e-16 beyond it.
_SHIFT = 10.0


def _require_positive(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a finite positive real, got {value!r}")
    return value


def log_beta(a: float, b: float) -> float:
    """Natural log of the beta function B(a, b) for a, b > 0."""
    a = _require_positive(a, "a")
    b = _require_positive(b, "b")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def digamma(x: float) -> float:
    """Digamma function for x > 0.

    Shifts the argument upward with psi(x) = psi(x+1) - 1/x, then evaluates
    the de Moivre asymptotic expansion.
    """
    x = _require_positive(x, "x")
    acc = 0.0
    while x < _SHIFT:
        acc -= 1.0 / x
        x += 1.0
    r2 = 1.0 / (x * x)
    tail = 0.0
    for c in reversed(_PSI_TAIL):
        tail = tail * r2 + c
    return acc + math.log(x) - 0.5 / x - tail * r2


def trigamma(x: float) -> float:
    """Trigamma function (derivative of digamma) for x > 0.

    Shifts upward with psi'(x) = psi'(x+1) + 1/x^2 before the asymptotic tail.
    """
    x = _require_positive(x, "x")
    acc = 0.0
    while x < _SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    r = 1.0 / x
    r2 = r * r
    tail = 0.0
    for c in reversed(_TRI_TAIL):
        tail = tail * r2 + c
    return acc + r + 0.5 * r2 + r * r2 * tail
