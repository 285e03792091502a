"""Chi-square tail helpers and the common hypothesis-test outcome type.

Only 1 and 2 degrees of freedom occur here, so the upper tail and the
critical values have exact closed forms (erfc and exp / probit and log).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

__all__ = ["chi2_sf", "chi2_critical", "TestOutcome"]

_NORMAL = NormalDist()


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of chi-square with df in {1, 2}."""
    x = float(x)
    if x < 0.0:
        x = 0.0
    if df == 1:
        return math.erfc(math.sqrt(0.5 * x))
    if df == 2:
        return math.exp(-0.5 * x)
    raise ValueError(f"df must be 1 or 2, got {df}")


def chi2_critical(level: float, df: int) -> float:
    """Upper quantile: the value exceeded with probability `level`."""
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ValueError(f"significance level must be in (0, 1), got {level}")
    if df == 1:
        z = _NORMAL.inv_cdf(1.0 - 0.5 * level)
        return z * z
    if df == 2:
        return -2.0 * math.log(level)
    raise ValueError(f"df must be 1 or 2, got {df}")


@dataclass(frozen=True)
class TestOutcome:
    """A test statistic with its chi-square reference distribution."""

    statistic: float
    df: int
    p_value: float
    tau: float

    def reject_at(self, level: float) -> bool:
        """True when the statistic exceeds the chi-square critical value."""
        return self.statistic > chi2_critical(level, self.df)


def make_outcome(statistic: float, df: int, tau: float) -> TestOutcome:
    statistic = float(statistic)
    if not math.isfinite(statistic):
        raise ValueError(f"test statistic is not finite: {statistic!r}")
    return TestOutcome(statistic=statistic, df=df, p_value=chi2_sf(statistic, df), tau=tau)
