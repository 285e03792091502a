"""Monte Carlo engine for empirical level and power of the scale-parameter
tests under epsilon-contamination.

Per replicate one contaminated sample is drawn and reused across the whole
tuning-parameter grid and both test families, mirroring how the study is
set up.  Every replicate's random stream is derived from
(master_seed, cell_index, replicate_index) through SplitMix64, so the full
rejection table is bitwise identical for any worker count and any execution
order.
"""
from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimation import ConstraintSpec, ConvergenceError, fit_restricted
from .model import ModelParams, sample as draw_sample
from .outcome import chi2_critical
from .rao import rao_simple_alpha
from .wald import wald_simple_alpha

__all__ = [
    "ContaminationScheme",
    "SimulationConfig",
    "RejectionRow",
    "RejectionTable",
    "derive_seed",
    "replicate_sample",
    "run_level_study",
    "run_power_study",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_CSV_HEADER = "family,tau,n,eps,alpha_tilde,rejections,replicates,rate,std_err"


def _splitmix64(z: int) -> int:
    """One round of the published SplitMix64 mixing function."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, cell_index: int, replicate_index: int) -> int:
    """Order-independent 64-bit stream seed for one replicate of one cell."""
    h = _splitmix64(master_seed & _MASK64)
    h = _splitmix64(h ^ (cell_index & _MASK64))
    h = _splitmix64(h ^ (replicate_index & _MASK64))
    return h


@dataclass(frozen=True)
class ContaminationScheme:
    """Replace round(eps*n) of the n observations with contaminant draws."""

    epsilon: float
    contaminant: ModelParams

    def __post_init__(self) -> None:
        eps = float(self.epsilon)
        if not (0.0 <= eps <= 0.5):
            raise ValueError(f"epsilon must be in [0, 0.5], got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    def count(self, n: int) -> int:
        # deterministic half-up rounding; ties never depend on banker's rules
        return int(math.floor(self.epsilon * n + 0.5))


def replicate_sample(pop: ModelParams, scheme: ContaminationScheme, n: int, rng: np.random.Generator) -> np.ndarray:
    """One contaminated sample: n-k population draws, then k contaminant
    draws, then a shuffle, all from the given stream."""
    n = int(n)
    k = scheme.count(n)
    if k > n:
        raise ValueError(f"contaminant count {k} exceeds sample size {n}")
    parts = []
    if n - k > 0:
        parts.append(draw_sample(n - k, pop, rng))
    if k > 0:
        parts.append(draw_sample(k, scheme.contaminant, rng))
    x = np.concatenate(parts)
    rng.shuffle(x)
    return x


@dataclass(frozen=True)
class SimulationConfig:
    """Grid specification for one level or power study.

    The hypothesis is the scale-parameter simple null (shape known): for
    each replicate the restricted estimate feeds the Wald statistic while
    the Rao statistic needs no estimation.
    """

    population: ModelParams
    null_alpha: float
    known_beta: float
    tau_grid: tuple
    n_grid: tuple
    eps_grid: tuple
    contaminant_scales: tuple
    replications: int
    significance: float
    master_seed: int

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not (0.0 < self.significance < 1.0):
            raise ValueError(f"significance must be in (0, 1), got {self.significance!r}")
        for name in ("tau_grid", "n_grid", "eps_grid", "contaminant_scales"):
            grid = tuple(getattr(self, name))
            if len(grid) == 0:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, grid)
        for eps in self.eps_grid:
            if not (0.0 <= float(eps) <= 0.5):
                raise ValueError(f"eps values must lie in [0, 0.5], got {eps!r}")
        object.__setattr__(self, "null_alpha", float(self.null_alpha))
        object.__setattr__(self, "known_beta", float(self.known_beta))
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "significance", float(self.significance))
        object.__setattr__(self, "master_seed", int(self.master_seed))


@dataclass(frozen=True)
class RejectionRow:
    family: str
    tau: float
    n: int
    eps: float
    alpha_tilde: float
    rejections: int
    replicates: int
    rate: float
    std_err: float


@dataclass(frozen=True)
class RejectionTable:
    rows: tuple
    flagged: tuple = ()

    def to_csv_text(self) -> str:
        lines = [_CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.family},{r.tau:.6f},{r.n},{r.eps:.6f},{r.alpha_tilde:.6f},"
                f"{r.rejections},{r.replicates},{r.rate:.6f},{r.std_err:.6f}"
            )
        return "\n".join(lines) + "\n"

    def lookup(self, family: str, tau: float, n: int, eps: float, alpha_tilde: float) -> RejectionRow:
        for r in self.rows:
            if (
                r.family == family
                and abs(r.tau - tau) < 1e-9
                and r.n == int(n)
                and abs(r.eps - eps) < 1e-9
                and abs(r.alpha_tilde - alpha_tilde) < 1e-9
            ):
                return r
        raise KeyError(f"no row for ({family}, tau={tau}, n={n}, eps={eps}, alpha_tilde={alpha_tilde})")

    @staticmethod
    def from_csv_text(text: str) -> "RejectionTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != _CSV_HEADER:
            missing = set(_CSV_HEADER.split(",")) - set((lines[0] if lines else "").split(","))
            raise ValueError(f"rejection-table CSV schema mismatch; missing columns: {sorted(missing)}")
        rows = []
        for ln in lines[1:]:
            f = ln.split(",")
            rows.append(
                RejectionRow(
                    family=f[0],
                    tau=float(f[1]),
                    n=int(f[2]),
                    eps=float(f[3]),
                    alpha_tilde=float(f[4]),
                    rejections=int(f[5]),
                    replicates=int(f[6]),
                    rate=float(f[7]),
                    std_err=float(f[8]),
                )
            )
        return RejectionTable(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Engine internals
# ---------------------------------------------------------------------------

_CHUNK = 250


def _run_chunk(args) -> tuple:
    """Rejection counts for replicates [r0, r1) of one sample cell.

    Returns (cell_index, wald_rejections[], rao_rejections[], wald_failures[])
    with one entry per tau value.
    """
    (cell_index, r0, r1, n, eps, scale, pop_alpha, pop_beta, null_alpha,
     known_beta, taus, crit, master_seed) = args
    pop = ModelParams(pop_alpha, pop_beta)
    scheme = ContaminationScheme(eps, ModelParams(scale, pop_beta))
    fix_beta = ConstraintSpec.fix_beta(known_beta)
    T = len(taus)
    wald_rej = np.zeros(T, dtype=np.int64)
    rao_rej = np.zeros(T, dtype=np.int64)
    wald_fail = np.zeros(T, dtype=np.int64)
    for rep in range(r0, r1):
        rng = np.random.default_rng(derive_seed(master_seed, cell_index, rep))
        x = replicate_sample(pop, scheme, n, rng)
        for j, tau in enumerate(taus):
            out = rao_simple_alpha(x, null_alpha, known_beta, tau)
            if out.statistic > crit:
                rao_rej[j] += 1
            try:
                est = fit_restricted(x, tau, fix_beta)
            except ConvergenceError:
                wald_fail[j] += 1
                continue
            out = wald_simple_alpha(x, null_alpha, known_beta, tau, fit=est)
            if out.statistic > crit:
                wald_rej[j] += 1
    return cell_index, wald_rej, rao_rej, wald_fail


def _run_study(cfg: SimulationConfig, workers: int = 1) -> RejectionTable:
    cells = [
        (int(n), float(eps), float(scale))
        for n in cfg.n_grid
        for eps in cfg.eps_grid
        for scale in cfg.contaminant_scales
    ]
    taus = tuple(float(t) for t in cfg.tau_grid)
    crit = chi2_critical(cfg.significance, 1)
    items = []
    for ci, (n, eps, scale) in enumerate(cells):
        for r0 in range(0, cfg.replications, _CHUNK):
            items.append(
                (ci, r0, min(r0 + _CHUNK, cfg.replications), n, eps, scale,
                 cfg.population.alpha, cfg.population.beta, cfg.null_alpha,
                 cfg.known_beta, taus, crit, cfg.master_seed)
            )

    if workers <= 1:
        results = [_run_chunk(it) for it in items]
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=int(workers)) as pool:
            results = pool.map(_run_chunk, items, chunksize=1)

    T = len(taus)
    wald_rej = {ci: np.zeros(T, dtype=np.int64) for ci in range(len(cells))}
    rao_rej = {ci: np.zeros(T, dtype=np.int64) for ci in range(len(cells))}
    wald_fail = {ci: np.zeros(T, dtype=np.int64) for ci in range(len(cells))}
    for ci, w, r, f in results:
        wald_rej[ci] += w
        rao_rej[ci] += r
        wald_fail[ci] += f

    rows = []
    flagged = []
    R = cfg.replications
    for ci, (n, eps, scale) in enumerate(cells):
        for j, tau in enumerate(taus):
            for family, rej, fails in (
                ("rao", int(rao_rej[ci][j]), 0),
                ("wald", int(wald_rej[ci][j]), int(wald_fail[ci][j])),
            ):
                valid = R - fails
                rate = rej / valid if valid > 0 else 0.0
                std_err = math.sqrt(rate * (1.0 - rate) / valid) if valid > 0 else 0.0
                rows.append(
                    RejectionRow(
                        family=family,
                        tau=tau,
                        n=n,
                        eps=eps,
                        alpha_tilde=scale,
                        rejections=rej,
                        replicates=valid,
                        rate=rate,
                        std_err=std_err,
                    )
                )
                if fails > 0.01 * R:
                    flagged.append(
                        f"{family},tau={tau:.6f},n={n},eps={eps:.6f},alpha_tilde={scale:.6f}:"
                        f" {fails}/{R} estimation failures excluded"
                    )
    rows.sort(key=lambda r: (r.family, r.tau, r.n, r.eps, r.alpha_tilde))
    return RejectionTable(rows=tuple(rows), flagged=tuple(flagged))


def run_level_study(cfg: SimulationConfig, workers: int = 1) -> RejectionTable:
    """Empirical level: rejection rates when the null holds for the
    uncontaminated part of every sample."""
    return _run_study(cfg, workers=workers)


def run_power_study(cfg: SimulationConfig, workers: int = 1) -> RejectionTable:
    """Empirical power: same engine, with the population set away from the
    null (the config carries the alternative)."""
    return _run_study(cfg, workers=workers)
