"""Robust estimation and hypothesis testing for the log-logistic model via
minimum density power divergence."""

from .asymptotics import (
    AsymptoticMatrices,
    J_closed_form,
    J_quadrature,
    K_of,
    MatrixSource,
    QuadratureError,
    discrepancy_report,
    xi_closed_form,
    xi_quadrature,
)
from .estimation import (
    ConstraintSpec,
    ConvergenceError,
    EstimateResult,
    fit_mdpde,
    fit_restricted,
    initial_guess,
)
from .model import ModelParams, cdf, log_pdf, pdf, quantile, sample, score_alpha, score_beta
from .objective import ObjectiveValue, integral_term, objective, objective_gradient
from .outcome import TestOutcome, chi2_critical, chi2_sf
from .rao import rao_composite, rao_simple_alpha, rao_simple_beta, rao_simple_full, u_alpha, u_beta
from .simulation import (
    ContaminationScheme,
    RejectionRow,
    RejectionTable,
    SimulationConfig,
    derive_seed,
    replicate_sample,
    run_level_study,
    run_power_study,
)
from .wald import wald_composite, wald_simple_alpha, wald_simple_beta, wald_simple_full

__version__ = "0.1.0"

__all__ = [
    "AsymptoticMatrices",
    "ConstraintSpec",
    "ContaminationScheme",
    "ConvergenceError",
    "EstimateResult",
    "J_closed_form",
    "J_quadrature",
    "K_of",
    "MatrixSource",
    "ModelParams",
    "ObjectiveValue",
    "QuadratureError",
    "RejectionRow",
    "RejectionTable",
    "SimulationConfig",
    "TestOutcome",
    "cdf",
    "chi2_critical",
    "chi2_sf",
    "derive_seed",
    "discrepancy_report",
    "fit_mdpde",
    "fit_restricted",
    "initial_guess",
    "integral_term",
    "log_pdf",
    "objective",
    "objective_gradient",
    "pdf",
    "quantile",
    "rao_composite",
    "rao_simple_alpha",
    "rao_simple_beta",
    "rao_simple_full",
    "replicate_sample",
    "run_level_study",
    "run_power_study",
    "sample",
    "score_alpha",
    "score_beta",
    "u_alpha",
    "u_beta",
    "wald_composite",
    "wald_simple_alpha",
    "wald_simple_beta",
    "wald_simple_full",
    "xi_closed_form",
    "xi_quadrature",
]
