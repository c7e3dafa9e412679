"""Gamma-prior view of the penalized estimators and Bayesian benchmarks.

The entropy-penalized likelihood factorizes into a Pareto likelihood times
a gamma density in alpha whose hyper-parameters depend on the censoring
indicators, so the perturbed estimator is exactly the posterior mode of
that (data-dependent) prior.  This module exposes the prior/posterior
parameter maps plus three benchmark estimators: the conjugate-gamma
posterior mean, the maximal-data-information posterior mode, and the
posterior mean under a uniform prior on a known interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammainc, gammaincc

from .core import (
    CensoredSample,
    DegenerateEstimateError,
    EstimatorKind,
    TailEstimate,
    cumulative_tail_sums,
    top_k,
)
from .estimators import Penalty, PenaltyKind, _sanitize_betas, _take, exceedance_subsample


class PosteriorIntervalError(ValueError):
    """The posterior mass on the prior interval underflowed to zero (or the
    ratio of incomplete-gamma differences lost all precision), so the
    interval posterior mean cannot be computed reliably."""


@dataclass(frozen=True)
class GammaParams:
    """Shape/rate parameters of a gamma distribution on the tail index.

    Improper limits are allowed: rate 0 encodes the flat prior obtained at
    zero penalization, and shape 0 together with rate 0 the fully
    uninformative reduction of the conjugate benchmark.
    """

    shape: float
    rate: float

    def __post_init__(self):
        if self.shape < 0 or self.rate < 0:
            raise ValueError("shape and rate must be nonnegative")

    @property
    def mean(self) -> float:
        if self.rate == 0:
            raise ValueError("improper prior (rate 0) has no mean")
        return self.shape / self.rate


def _censoring_weights(
    sample: CensoredSample, lam, weights, beta: Optional[float]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lam_i, censor mask, resolved betas) for the prior/posterior sums."""
    lam_i = Penalty(PenaltyKind.KL_EXPERT_FIT, float(lam), weights).lambdas(sample.n)
    cens = 1.0 - sample.epsilon
    needed = (cens > 0) & (lam_i > 0)
    b = _sanitize_betas(sample.beta, needed, beta)
    return lam_i, cens, b


def prior_hyperparams(
    sample: CensoredSample,
    lam: float,
    weights: Optional[np.ndarray] = None,
    beta: Optional[float] = None,
) -> GammaParams:
    """Gamma prior implied by the entropy penalty.

    shape = sum lam_i (1 - eps_i) + 1, rate = sum lam_i (1 - eps_i) / beta_i.
    At lam = 0 this is the improper flat prior (1, 0).
    """
    lam_i, cens, b = _censoring_weights(sample, lam, weights, beta)
    return GammaParams(
        shape=float(np.sum(lam_i * cens)) + 1.0,
        rate=float(np.sum(lam_i * cens / b)),
    )


def posterior_params(
    sample: CensoredSample,
    lam: float,
    weights: Optional[np.ndarray] = None,
    beta: Optional[float] = None,
    x0: Optional[float] = None,
) -> GammaParams:
    """Gamma posterior after folding in the censored Pareto likelihood.

    shape = sum (eps_i + lam_i (1 - eps_i)) + 1,
    rate  = sum (lam_i (1 - eps_i)/beta_i + log(z_i/x0)).
    The posterior mode (shape - 1)/rate reproduces the perturbed estimator
    identically.
    """
    if x0 is None:
        x0 = sample.x0
    if x0 is None:
        raise ValueError("an explicit x0 is required")
    if sample.z.min() < x0:
        raise ValueError("all observations must satisfy z >= x0")
    lam_i, cens, b = _censoring_weights(sample, lam, weights, beta)
    shape = float(np.sum(sample.epsilon + lam_i * cens)) + 1.0
    rate = float(np.sum(lam_i * cens / b + np.log(sample.z / x0)))
    return GammaParams(shape=shape, rate=rate)


def prior_mode(params: GammaParams) -> float:
    """Mode (shape - 1)/rate; defined for shape > 1 and rate > 0.

    Invariant under a common rescaling of all penalization weights: only
    the proportions of the lam_i enter.
    """
    if params.rate == 0:
        raise ValueError("improper prior (rate 0) has no mode")
    if params.shape <= 1:
        raise ValueError("mode requires shape > 1")
    return (params.shape - 1.0) / params.rate


def prior_variance(params: GammaParams) -> float:
    """Variance shape/rate**2; shrinks as the penalization weights grow."""
    if params.rate == 0:
        raise ValueError("improper prior (rate 0) has no variance")
    return params.shape / params.rate**2


def moment_match(beta_expert: float, sigma2: float) -> GammaParams:
    """Gamma parameters whose mean is the expert index and whose variance is
    the stated confidence: shape = beta**2/sigma2, rate = beta/sigma2."""
    if not beta_expert > 0:
        raise ValueError("beta_expert must be positive")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return GammaParams(shape=beta_expert**2 / sigma2, rate=beta_expert / sigma2)


def bayes_gamma_estimator(
    sample: CensoredSample, k: int, params: GammaParams
) -> TailEstimate:
    """Posterior mean under a conjugate gamma prior, on the top-k exceedances:
    (shape + sum eps) / (rate + sum log spacings)."""
    v = top_k(sample, k)
    s_eps = float(v.epsilon.sum())
    s_log = float(np.log(v.z / v.z_kplus1).sum())
    num = params.shape + s_eps
    den = params.rate + s_log
    if den <= 0:
        raise DegenerateEstimateError("zero posterior rate: no log-spacing mass")
    if num <= 0:
        raise DegenerateEstimateError("zero posterior shape: no information")
    return TailEstimate(
        alpha_hat=num / den,
        kind=EstimatorKind.BAYES_GAMMA,
        k=k,
        lam=0.0,
        p_hat=v.p_hat,
    )


def bayes_mdi_estimator(sample: CensoredSample, k: int) -> TailEstimate:
    """Estimator from the maximal-data-information prior (no tunable input)."""
    v = top_k(sample, k)
    s_eps = float(v.epsilon.sum())
    s_log = float(np.log(v.z / v.z_kplus1).sum())
    if s_log <= 0:
        raise DegenerateEstimateError("zero log-spacing mass above the threshold")
    alpha = (1.0 + s_eps + math.sqrt((1.0 + s_eps) ** 2 + 4.0 * s_log)) / (2.0 * s_log)
    return TailEstimate(
        alpha_hat=alpha,
        kind=EstimatorKind.BAYES_MDI,
        k=k,
        lam=0.0,
        p_hat=v.p_hat,
    )


def _gamma_cdf_diff(shape: float, v1: float, v2: float) -> float:
    """P(shape, v2) - P(shape, v1) for v1 < v2, choosing whichever of the
    lower/upper regularized incomplete gamma functions is better conditioned."""
    if gammainc(shape, v1) > 0.5:
        return float(gammaincc(shape, v1) - gammaincc(shape, v2))
    return float(gammainc(shape, v2) - gammainc(shape, v1))


def uniform_prior_posterior_mean(
    sample: CensoredSample,
    b1: float,
    b2: float,
    *,
    x0: Optional[float] = None,
    k: Optional[int] = None,
) -> TailEstimate:
    """Posterior mean when the tail index is known to lie in [b1, b2].

    Evaluates (sum eps + 1)/S times a ratio of regularized incomplete-gamma
    differences, with S the summed log spacings.  Known to be numerically
    fragile when the interval carries almost no posterior mass (very large
    or very small numbers of exceedances); such cases raise
    :class:`PosteriorIntervalError` instead of returning garbage.
    """
    if not (0 < b1 < b2):
        raise ValueError("need 0 < b1 < b2")
    if k is not None:
        work = exceedance_subsample(sample, k)
        x0 = work.x0
    else:
        work = sample
        if x0 is None:
            x0 = sample.x0
        if x0 is None:
            raise ValueError("an explicit x0 is required")
        if work.z.min() < x0:
            raise ValueError("all observations must satisfy z >= x0")
    s_eps = float(work.epsilon.sum())
    s_log = float(np.log(work.z / x0).sum())
    if s_log <= 0:
        raise DegenerateEstimateError("zero log-spacing mass above the threshold")
    u = s_eps + 1.0
    den = _gamma_cdf_diff(u, b1 * s_log, b2 * s_log)
    num = _gamma_cdf_diff(u + 1.0, b1 * s_log, b2 * s_log)
    if den <= 0.0 or num <= 0.0:
        raise PosteriorIntervalError(
            "posterior mass on [b1, b2] underflowed; the interval estimator is "
            "unreliable here"
        )
    alpha = (u / s_log) * (num / den)
    if not (b1 < alpha < b2):
        raise PosteriorIntervalError(
            "incomplete-gamma ratio lost precision (result escaped [b1, b2])"
        )
    return TailEstimate(
        alpha_hat=alpha,
        kind=EstimatorKind.UNIFORM_PRIOR,
        k=work.n if k is None else k,
        lam=0.0,
        p_hat=float(work.epsilon.mean()),
    )


# -- vectorized whole-plot forms ------------------------------------------


def bayes_gamma_curve(sample: CensoredSample, params: GammaParams, ks=None) -> np.ndarray:
    """alpha_hat of :func:`bayes_gamma_estimator` for every k."""
    s = cumulative_tail_sums(sample)
    num = params.shape + s.s_eps
    den = params.rate + s.s_log
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where((num > 0) & (den > 0), num / den, np.nan)
    return _take(alpha, ks, sample.n)


def bayes_mdi_curve(sample: CensoredSample, ks=None) -> np.ndarray:
    """alpha_hat of :func:`bayes_mdi_estimator` for every k."""
    s = cumulative_tail_sums(sample)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(
            s.s_log > 0,
            (1.0 + s.s_eps + np.sqrt((1.0 + s.s_eps) ** 2 + 4.0 * s.s_log))
            / (2.0 * s.s_log),
            np.nan,
        )
    return _take(alpha, ks, sample.n)
