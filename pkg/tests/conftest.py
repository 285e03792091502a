"""Shared test helpers: independent oracles and small utilities."""
from __future__ import annotations

import math

import numpy as np
import pytest

from lldpd.model import ModelParams


def ks_distance(values, cdf) -> float:
    """Kolmogorov-Smirnov distance between a sample and a reference cdf."""
    z = np.sort(np.asarray(values, dtype=float))
    n = z.size
    F = np.asarray([cdf(v) for v in z])
    upper = np.max(np.arange(1, n + 1) / n - F)
    lower = np.max(F - np.arange(0, n) / n)
    return float(max(upper, lower))


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def fisher_matrix(p: ModelParams) -> np.ndarray:
    """Exact Fisher information of the log-logistic model, derived by hand:
    the location-scale structure of log X makes it diagonal, with entries
    beta^2/(3 alpha^2) and (3 + pi^2)/(9 beta^2)."""
    return np.array(
        [
            [p.beta**2 / (3.0 * p.alpha**2), 0.0],
            [0.0, (3.0 + math.pi**2) / (9.0 * p.beta**2)],
        ]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
