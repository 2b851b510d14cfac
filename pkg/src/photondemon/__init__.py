"""Photonic Maxwell's demon: state models, measurement channel, optimizer."""

from .channel import (
    OUTCOMES,
    DemonParams,
    OutcomeReport,
    mode_kernel,
    mode_kernel_binomial,
    outcome_reports,
    photon_subtracted_mean,
    product_outcome_reports,
)
from .merit import (
    PassivityReason,
    PassivityVerdict,
    PolarityStrategy,
    all_strategies,
    best_strategy,
    classify_passive,
    delta_n,
    demon_contribution,
    transmitted_baseline,
)
from .states import (
    DEFAULT_EPS_TAIL,
    InfeasibleMarginalError,
    InvalidStateError,
    JointNumberState,
    ModePmf,
    ThermalSpec,
    anticorrelated,
    make_thermal,
    marginal_means,
    product_thermal,
    split_thermal,
    thermal_marginal_anticorrelated,
    tmss_diagonal,
)

__all__ = [
    "OUTCOMES",
    "DemonParams",
    "OutcomeReport",
    "mode_kernel",
    "mode_kernel_binomial",
    "outcome_reports",
    "photon_subtracted_mean",
    "product_outcome_reports",
    "PassivityReason",
    "PassivityVerdict",
    "PolarityStrategy",
    "all_strategies",
    "best_strategy",
    "classify_passive",
    "delta_n",
    "demon_contribution",
    "transmitted_baseline",
    "DEFAULT_EPS_TAIL",
    "InfeasibleMarginalError",
    "InvalidStateError",
    "JointNumberState",
    "ModePmf",
    "ThermalSpec",
    "anticorrelated",
    "make_thermal",
    "marginal_means",
    "product_thermal",
    "split_thermal",
    "thermal_marginal_anticorrelated",
    "tmss_diagonal",
]
