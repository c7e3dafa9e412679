"""Pareto tail-index and extreme-quantile estimation for right-censored
claims with expert tail opinions."""

from .asymptotics import (
    AsymptoticRegime,
    amse,
    asymptotic_mean,
    asymptotic_variance,
    bias_remainder_scale,
    censored_hill_mean,
    censored_hill_variance,
    combination_variance,
    inverse_limit,
    leading_bias,
    minimize_amse_over_lambda,
    plug_in_delta,
    plug_in_indices,
)
from .bayes import (
    GammaParams,
    PosteriorIntervalError,
    bayes_gamma_estimator,
    bayes_mdi_estimator,
    moment_match,
    posterior_params,
    prior_hyperparams,
    prior_mode,
    prior_variance,
    uniform_prior_posterior_mean,
)
from .core import (
    CensoredSample,
    DegenerateEstimateError,
    EstimatorKind,
    MissingBetaError,
    Observation,
    QuantileOutOfReachError,
    TailEstimate,
    TopKView,
    cumulative_tail_sums,
    order_statistics,
    p_hat,
    top_k,
)
from .distributions import (
    BurrDist,
    CombinedHallParams,
    FrechetDist,
    HallParams,
    ParetoDist,
    combine_hall,
)
from .estimators import (
    Penalty,
    PenaltyKind,
    expert_means,
    flipped_estimator,
    hill_censored,
    numeric_mle_oracle,
    penalized_log_likelihood,
    perturbed_estimator,
    relative_entropy,
    squared_penalty_estimator,
)
from .quantiles import (
    QuantileEstimate,
    QuantileKind,
    weissman,
    weissman_combined,
    weissman_expert,
    weissman_mle,
)
from .simulation import (
    StudyConfig,
    StudyResult,
    draw_expert,
    empirical_vk_wk,
    generate_censored,
    run_study,
)
from .survival import KMCurve, kaplan_meier, km_quantile

__version__ = "0.1.0"
