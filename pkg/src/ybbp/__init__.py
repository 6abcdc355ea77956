"""Simulation and likelihood-free Bayesian inference for Y-linked two-sex
branching processes with mutations."""

__version__ = "0.1.0"

from .laws import (
    FiniteSupportLaw,
    LawFamily,
    NegativeBinomialLaw,
    OffspringLaw,
    PoissonLaw,
    law_from_spec,
    law_mean,
    law_to_spec,
)
from .observation import (
    BasicSample,
    ExtendedSample,
    ObservationError,
    SchemeVariant,
    extract_basic,
    extract_extended,
    load_observed_csv,
    rho,
    rho_star,
    simulate_compatible,
    write_observed_csv,
)
from .process import (
    GenerationState,
    ParamVector,
    PathRecord,
    RateReport,
    mate,
    reproduce,
    simulate_path,
    step,
    survival_condition,
    theoretical_rates,
)
from .predictive import PredictiveConfig, PredictiveTable, predict
from .rejection import (
    AbcConfig,
    AcceptedDraw,
    InsufficientCompatibilityError,
    PosteriorSample,
    PriorSpec,
    draw_prior,
    init_state_from_obs,
    run_rejection,
)
from .summaries import (
    DensityEstimate,
    HpdSet,
    PointMass,
    bayes_factor_zero,
    hpd,
    kde,
    point_estimate,
    rate_posteriors,
    rmse,
    rmse_zero,
    spike_probability,
)

__all__ = [
    "__version__",
    "AbcConfig",
    "AcceptedDraw",
    "BasicSample",
    "DensityEstimate",
    "ExtendedSample",
    "FiniteSupportLaw",
    "GenerationState",
    "HpdSet",
    "InsufficientCompatibilityError",
    "LawFamily",
    "NegativeBinomialLaw",
    "ObservationError",
    "OffspringLaw",
    "ParamVector",
    "PathRecord",
    "PointMass",
    "PoissonLaw",
    "PosteriorSample",
    "PredictiveConfig",
    "PredictiveTable",
    "PriorSpec",
    "RateReport",
    "SchemeVariant",
    "bayes_factor_zero",
    "draw_prior",
    "extract_basic",
    "extract_extended",
    "hpd",
    "init_state_from_obs",
    "kde",
    "law_from_spec",
    "law_mean",
    "law_to_spec",
    "load_observed_csv",
    "mate",
    "point_estimate",
    "predict",
    "rate_posteriors",
    "reproduce",
    "rho",
    "rho_star",
    "rmse",
    "rmse_zero",
    "run_rejection",
    "simulate_compatible",
    "simulate_path",
    "spike_probability",
    "step",
    "survival_condition",
    "theoretical_rates",
    "write_observed_csv",
]
