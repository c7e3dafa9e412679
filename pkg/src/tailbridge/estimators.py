"""Point estimators of the Pareto tail index for censored samples.

All estimators come in two threshold regimes sharing one implementation:

- fixed threshold: either an explicit ``threshold`` (strict exceedances) or
  the sample's known scale ``x0`` (every observation enters),
- random threshold: the ``k`` largest observations above Z^(k+1).

The penalized maximum-likelihood estimators attach, per censored
observation, a divergence between the fitted Pareto density and the
expert's Pareto density, weighted by ``lam * w_i``.  Each closed form below
is the exact stationary point of the corresponding penalized log-likelihood
and is cross-checked in the test suite against :func:`numeric_mle_oracle`,
a bracketed numerical maximizer that knows nothing about the algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .core import (
    CensoredSample,
    DegenerateEstimateError,
    EstimatorKind,
    MissingBetaError,
    TailEstimate,
    cumulative_tail_sums,
    order_statistics,
    top_k,
)


class PenaltyKind(Enum):
    """Divergence attached to censored observations.

    ``KL_EXPERT_FIT`` is the relative entropy of the expert's density from
    the fitted one (this is the penalty behind :func:`perturbed_estimator`),
    ``KL_FIT_EXPERT`` the flipped direction, and ``SQUARED`` the quadratic
    penalty (alpha - beta)**2 / 2.
    """

    KL_EXPERT_FIT = "kl_expert_fit"
    KL_FIT_EXPERT = "kl_fit_expert"
    SQUARED = "squared"


@dataclass(frozen=True)
class Penalty:
    """A penalty kind with global strength ``lam`` and optional per-observation
    weights, composing to lam_i = lam * w_i (weights default to 1)."""

    kind: PenaltyKind
    lam: float
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0):
                raise ValueError("penalty weights must be nonnegative")
            object.__setattr__(self, "weights", w)

    def lambdas(self, n: int) -> np.ndarray:
        if self.weights is None:
            return np.full(n, self.lam)
        if self.weights.shape != (n,):
            raise ValueError(f"weights must have length {n}")
        return self.lam * self.weights


def relative_entropy(beta: float, alpha: float) -> float:
    """Relative entropy between two Pareto densities with the same scale.

    Equals alpha/beta - 1 - log(alpha/beta); nonnegative, zero iff the
    indices coincide.
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    r = alpha / beta
    return r - 1.0 - math.log(r)


def _divergence(kind: PenaltyKind, beta: np.ndarray, alpha: float) -> np.ndarray:
    if kind is PenaltyKind.KL_EXPERT_FIT:
        r = alpha / beta
        return r - 1.0 - np.log(r)
    if kind is PenaltyKind.KL_FIT_EXPERT:
        r = beta / alpha
        return r - 1.0 - np.log(r)
    return 0.5 * (alpha - beta) ** 2


def _divergence_slope(kind: PenaltyKind, beta: np.ndarray, alpha: float) -> np.ndarray:
    if kind is PenaltyKind.KL_EXPERT_FIT:
        return 1.0 / beta - 1.0 / alpha
    if kind is PenaltyKind.KL_FIT_EXPERT:
        return 1.0 / alpha - beta / alpha**2
    return alpha - beta


def _sanitize_betas(
    beta: np.ndarray, needed: np.ndarray, fallback: Optional[float]
) -> np.ndarray:
    """Fill missing betas with the fallback where needed; entries that are
    never multiplied by a nonzero weight are set to 1 to keep arithmetic
    nan-free."""
    b = beta.copy()
    missing = np.isnan(b)
    if fallback is not None:
        b[missing] = fallback
        missing = np.zeros_like(missing)
    if np.any(missing & needed):
        raise MissingBetaError(
            f"{int((missing & needed).sum())} censored observation(s) need an "
            "expert beta; attach one or pass a fallback"
        )
    b[missing] = 1.0
    return b


@dataclass(frozen=True)
class _Exceedances:
    z: np.ndarray
    epsilon: np.ndarray
    beta: np.ndarray
    index: np.ndarray
    threshold: float
    k: int


def _exceedances(
    sample: CensoredSample, k: Optional[int], threshold: Optional[float]
) -> _Exceedances:
    if k is not None and threshold is not None:
        raise ValueError("pass either k or threshold, not both")
    if k is not None:
        v = top_k(sample, k)
        return _Exceedances(v.z, v.epsilon, v.beta, v.index, v.z_kplus1, k)
    if threshold is not None:
        if not threshold > 0:
            raise ValueError("threshold must be positive")
        t = float(threshold)
        idx = np.nonzero(sample.z > t)[0]
        if idx.size == 0:
            raise DegenerateEstimateError("no exceedances above the threshold")
    else:
        if sample.x0 is None:
            raise ValueError("sample has no x0; pass k= or threshold=")
        t = float(sample.x0)
        idx = np.arange(sample.n)
    return _Exceedances(
        sample.z[idx], sample.epsilon[idx], sample.beta[idx], idx, t, idx.size
    )


def penalized_log_likelihood(
    sample: CensoredSample,
    x0: Optional[float],
    penalty: Penalty,
    alpha: float,
) -> float:
    """Censored Pareto log-likelihood with a divergence penalty.

    Sums log-density contributions of uncensored observations, log-survival
    contributions of censored ones, and subtracts
    ``lam_i * D(beta_i, alpha)`` per censored observation.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if x0 is None:
        x0 = sample.x0
    if x0 is None:
        raise ValueError("an explicit x0 is required")
    if not x0 > 0:
        raise ValueError("x0 must be positive")
    z = sample.z
    if z.min() < x0:
        raise ValueError("all observations must satisfy z >= x0")
    eps = sample.epsilon
    cens = 1.0 - eps
    lam_i = penalty.lambdas(sample.n)
    needed = (cens > 0) & (lam_i > 0)
    beta = _sanitize_betas(sample.beta, needed, None)
    logs = np.log(z / x0)
    ll = float(
        np.sum(eps * (math.log(alpha) - alpha * logs - np.log(z)))
        - np.sum(cens * alpha * logs)
    )
    if np.any(needed):
        ll -= float(np.sum(lam_i * cens * _divergence(penalty.kind, beta, alpha)))
    return ll


def hill_censored(
    sample: CensoredSample,
    k: Optional[int] = None,
    *,
    threshold: Optional[float] = None,
) -> TailEstimate:
    """Censoring-adapted Hill estimator: uncensored count over summed log
    spacings, on the exceedances of the chosen threshold.

    Raises :class:`DegenerateEstimateError` when no uncensored observation
    exceeds the threshold (the estimate would collapse to zero).
    """
    e = _exceedances(sample, k, threshold)
    s_eps = float(e.epsilon.sum())
    s_log = float(np.log(e.z / e.threshold).sum())
    if s_eps == 0:
        raise DegenerateEstimateError("no uncensored exceedances above the threshold")
    if s_log <= 0:
        raise DegenerateEstimateError("zero log-spacing mass above the threshold")
    return TailEstimate(
        alpha_hat=s_eps / s_log,
        kind=EstimatorKind.MLE,
        k=e.k,
        lam=0.0,
        p_hat=float(e.epsilon.mean()),
    )


def perturbed_estimator(
    sample: CensoredSample,
    k: Optional[int] = None,
    lam: float = 1.0,
    *,
    threshold: Optional[float] = None,
    beta: Optional[float] = None,
    weights: Optional[np.ndarray] = None,
) -> TailEstimate:
    """Penalized MLE under the expert-to-fit relative entropy penalty.

    The closed form adds ``lam_i`` per censored exceedance to the numerator
    and ``lam_i / beta_i`` to the log-spacing denominator.  At ``lam = 0``
    it coincides with :func:`hill_censored`; as ``lam`` grows it moves to
    the weighted harmonic mean of the expert betas.  Unlike the Hill
    estimator it stays finite with zero uncensored exceedances as long as
    ``lam > 0``.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    e = _exceedances(sample, k, threshold)
    lam_i = Penalty(PenaltyKind.KL_EXPERT_FIT, lam, weights).lambdas(sample.n)[e.index]
    cens = 1.0 - e.epsilon
    needed = (cens > 0) & (lam_i > 0)
    b = _sanitize_betas(e.beta, needed, beta)
    s_eps = float(e.epsilon.sum())
    s_log = float(np.log(e.z / e.threshold).sum())
    num = s_eps + float(np.sum(lam_i * cens))
    den = s_log + float(np.sum(lam_i * cens / b))
    if num <= 0:
        raise DegenerateEstimateError("no uncensored exceedances above the threshold")
    if den <= 0:
        raise DegenerateEstimateError("zero log-spacing mass above the threshold")
    return TailEstimate(
        alpha_hat=num / den,
        kind=EstimatorKind.PERTURBED,
        k=e.k,
        lam=lam,
        p_hat=float(e.epsilon.mean()),
    )


def flipped_estimator(
    sample: CensoredSample,
    k: Optional[int] = None,
    lam: float = 1.0,
    *,
    threshold: Optional[float] = None,
    beta: Optional[float] = None,
    weights: Optional[np.ndarray] = None,
) -> TailEstimate:
    """Penalized MLE under the fit-to-expert relative entropy penalty.

    The stationarity condition is the quadratic

        s_log * a**2 - (s_eps - sum lam_i (1-eps_i)) * a
                     - sum lam_i beta_i (1-eps_i) = 0

    whose unique positive root is returned (evaluated in the
    cancellation-free branch).  Bridges from the Hill estimator at
    ``lam = 0`` to the weighted arithmetic mean of the betas.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    e = _exceedances(sample, k, threshold)
    lam_i = Penalty(PenaltyKind.KL_FIT_EXPERT, lam, weights).lambdas(sample.n)[e.index]
    cens = 1.0 - e.epsilon
    needed = (cens > 0) & (lam_i > 0)
    b = _sanitize_betas(e.beta, needed, beta)
    s_log = float(np.log(e.z / e.threshold).sum())
    if s_log <= 0:
        raise DegenerateEstimateError("zero log-spacing mass above the threshold")
    drift = float(e.epsilon.sum() - np.sum(lam_i * cens))
    pull = float(np.sum(lam_i * cens * b))
    root = math.sqrt(drift**2 + 4.0 * s_log * pull)
    if drift >= 0:
        alpha = (drift + root) / (2.0 * s_log)
    else:
        alpha = 2.0 * pull / (root - drift)
    if alpha <= 0:
        raise DegenerateEstimateError("no uncensored exceedances above the threshold")
    return TailEstimate(
        alpha_hat=alpha,
        kind=EstimatorKind.FLIPPED,
        k=e.k,
        lam=lam,
        p_hat=float(e.epsilon.mean()),
    )


def squared_penalty_estimator(
    sample: CensoredSample,
    k: Optional[int] = None,
    lam: float = 1.0,
    *,
    threshold: Optional[float] = None,
    beta: Optional[float] = None,
    weights: Optional[np.ndarray] = None,
) -> TailEstimate:
    """Penalized MLE under the squared penalty (alpha - beta)**2 / 2.

    Returns the positive root of the stationarity equation

        lam_bar * a**2 + (s_log - lam_beta) * a - s_eps = 0

    with lam_bar = sum lam_i (1-eps_i) and lam_beta = sum lam_i beta_i
    (1-eps_i), again through the cancellation-free quadratic branch, so the
    value degrades smoothly to the Hill estimator as lam_bar shrinks.  With
    no penalized censored exceedance at all the Hill value is returned.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    e = _exceedances(sample, k, threshold)
    lam_i = Penalty(PenaltyKind.SQUARED, lam, weights).lambdas(sample.n)[e.index]
    cens = 1.0 - e.epsilon
    needed = (cens > 0) & (lam_i > 0)
    b = _sanitize_betas(e.beta, needed, beta)
    s_eps = float(e.epsilon.sum())
    s_log = float(np.log(e.z / e.threshold).sum())
    lam_bar = float(np.sum(lam_i * cens))
    lam_beta = float(np.sum(lam_i * cens * b))
    p_hat = float(e.epsilon.mean())
    if lam_bar == 0.0:
        if s_eps == 0:
            raise DegenerateEstimateError("no uncensored exceedances above the threshold")
        if s_log <= 0:
            raise DegenerateEstimateError("zero log-spacing mass above the threshold")
        alpha = s_eps / s_log
    else:
        lin = s_log - lam_beta
        if s_eps == 0:
            alpha = -lin / lam_bar
            if alpha <= 0:
                raise DegenerateEstimateError(
                    "likelihood has no interior maximum (all exceedances censored "
                    "and the penalty cannot overcome the log-spacing mass)"
                )
        elif lin >= 0:
            alpha = 2.0 * s_eps / (lin + math.sqrt(lin**2 + 4.0 * lam_bar * s_eps))
        else:
            alpha = (-lin + math.sqrt(lin**2 + 4.0 * lam_bar * s_eps)) / (2.0 * lam_bar)
    return TailEstimate(
        alpha_hat=alpha,
        kind=EstimatorKind.SQUARED,
        k=e.k,
        lam=lam,
        p_hat=p_hat,
    )


def expert_means(
    sample: CensoredSample,
    weights: Optional[np.ndarray] = None,
    beta: Optional[float] = None,
) -> tuple[float, float]:
    """Weighted arithmetic and harmonic means of the expert betas attached
    to the censored observations, ignoring the data entirely."""
    cens = sample.epsilon == 0
    if not cens.any():
        raise DegenerateEstimateError("no censored observations carry expert betas")
    w = np.ones(sample.n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (sample.n,):
        raise ValueError(f"weights must have length {sample.n}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    wc = np.where(cens, w, 0.0)
    total = wc.sum()
    if total == 0:
        raise DegenerateEstimateError("all censored observations have zero weight")
    b = _sanitize_betas(sample.beta, wc > 0, beta)
    am = float(np.sum(wc * b) / total)
    hm = float(total / np.sum(wc / b))
    return am, hm


def exceedance_subsample(sample: CensoredSample, k: int) -> CensoredSample:
    """The k largest observations repackaged as a sample whose known scale
    is the random threshold Z^(k+1).  Fixed-threshold formulas applied to
    this subsample reproduce the order-statistics estimators exactly."""
    v = top_k(sample, k)
    return CensoredSample.from_arrays(v.z, v.epsilon, v.beta, x0=v.z_kplus1)


def numeric_mle_oracle(
    sample: CensoredSample,
    penalty: Penalty,
    *,
    x0: Optional[float] = None,
    k: Optional[int] = None,
) -> float:
    """Numerically maximize the penalized log-likelihood, independently of
    every closed form.

    The likelihood score is bracketed by geometric expansion around an
    initial Hill-type guess and the stationary point is located by Brent's
    method to near machine precision.  Raises ``ValueError`` when no
    interior maximum exists in any bracket.
    """
    if k is not None:
        work = exceedance_subsample(sample, k)
        if penalty.weights is not None:
            idx = top_k(sample, k).index
            penalty = Penalty(penalty.kind, penalty.lam, penalty.weights[idx])
        x0 = work.x0
    else:
        work = sample
        if x0 is None:
            x0 = sample.x0
        if x0 is None:
            raise ValueError("an explicit x0 is required")
    z = work.z
    if z.min() < x0:
        raise ValueError("all observations must satisfy z >= x0")
    eps = work.epsilon
    cens = 1.0 - eps
    lam_i = penalty.lambdas(work.n)
    needed = (cens > 0) & (lam_i > 0)
    b = _sanitize_betas(work.beta, needed, None)
    s_eps = float(eps.sum())
    s_log = float(np.log(z / x0).sum())

    def score(a: float) -> float:
        pen = np.sum(lam_i * cens * _divergence_slope(penalty.kind, b, a))
        return s_eps / a - s_log - float(pen)

    guess = s_eps / s_log if (s_eps > 0 and s_log > 0) else 1.0
    lo, hi = 1e-8 * guess, 1e3 * guess
    for _ in range(60):
        if score(lo) > 0:
            break
        lo /= 10.0
    else:
        raise ValueError("no interior maximum in bracket")
    for _ in range(60):
        if score(hi) < 0:
            break
        hi *= 10.0
    else:
        raise ValueError("no interior maximum in bracket")
    return float(brentq(score, lo, hi, xtol=1e-30, rtol=1e-15))


# -- vectorized whole-plot forms ------------------------------------------


def _take(arr: np.ndarray, ks, n: int) -> np.ndarray:
    if ks is None:
        return arr
    ks = np.asarray(ks, dtype=int)
    if np.any((ks < 1) | (ks > n - 1)):
        raise ValueError(f"k values must lie in [1, {n - 1}]")
    return arr[ks - 1]


def hill_censored_curve(sample: CensoredSample, ks=None) -> np.ndarray:
    """alpha_hat of :func:`hill_censored` for every k (nan where degenerate)."""
    s = cumulative_tail_sums(sample)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where((s.s_eps > 0) & (s.s_log > 0), s.s_eps / s.s_log, np.nan)
    return _take(alpha, ks, sample.n)


def perturbed_curve(
    sample: CensoredSample,
    lam: float,
    beta: Optional[float] = None,
    ks=None,
) -> np.ndarray:
    """alpha_hat of :func:`perturbed_estimator` for every k."""
    if not lam >= 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    s = cumulative_tail_sums(sample, beta=beta, require_beta=lam > 0)
    num = s.s_eps + lam * s.s_cens
    den = s.s_log + (lam * s.s_inv_beta if lam > 0 else 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where((num > 0) & (den > 0), num / den, np.nan)
    return _take(alpha, ks, sample.n)


def p_hat_curve(sample: CensoredSample, ks=None) -> np.ndarray:
    """Uncensored fraction among the top k, for every k."""
    s = cumulative_tail_sums(sample)
    return _take(s.p_hat, ks, sample.n)


def classic_hill_curve(values, ks=None) -> np.ndarray:
    """Plain (censoring-blind) Hill estimates of xi for a positive array."""
    z = np.asarray(values, dtype=float)
    if np.any(z <= 0):
        raise ValueError("values must be positive")
    sample = CensoredSample.from_arrays(z, np.ones_like(z))
    s = cumulative_tail_sums(sample)
    return _take(s.s_log / s.ks, ks, z.size)
