"""Domain types and order-statistics machinery for censored claim samples.

A sample is a collection of positive claim sizes ``z`` with a censoring
indicator ``epsilon`` (1 = closed/fully observed, 0 = open/right-censored)
and, optionally, an expert tail index ``beta`` attached to open claims.
Everything downstream (estimators, survival curves, quantiles, simulation)
consumes the :class:`CensoredSample` view defined here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Optional

import numpy as np


class MissingBetaError(ValueError):
    """An operation needed an expert tail index on a censored observation
    that carries none, and no global fallback was configured."""


class DegenerateEstimateError(ValueError):
    """The defining sums of an estimator degenerate (for example no
    uncensored exceedance above the threshold), so no finite positive
    estimate exists."""


class QuantileOutOfReachError(ValueError):
    """A survival curve never falls low enough to invert the requested
    probability level."""


class EstimatorKind(str, Enum):
    """Labels for the point estimators produced by this package."""

    MLE = "mle"
    PERTURBED = "perturbed"
    FLIPPED = "flipped"
    SQUARED = "squared"
    BAYES_GAMMA = "bayes_gamma"
    BAYES_MDI = "bayes_mdi"
    UNIFORM_PRIOR = "uniform_prior"
    EXPERT_AM = "expert_am"
    EXPERT_HM = "expert_hm"


@dataclass(frozen=True)
class Observation:
    """One claim: size ``z``, indicator ``epsilon`` and optional expert beta.

    ``epsilon == 1`` marks a closed (fully observed) claim, ``epsilon == 0``
    a right-censored (open) one.  ``beta`` is the expert's Pareto tail index
    for the eventual size of an open claim; it may be omitted.
    """

    z: float
    epsilon: int
    beta: Optional[float] = None

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"claim size must be positive, got {self.z}")
        if self.epsilon not in (0, 1):
            raise ValueError(f"epsilon must be 0 or 1, got {self.epsilon}")
        if self.beta is not None and not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def censored(self) -> bool:
        return self.epsilon == 0


class OrderedView(NamedTuple):
    """Descending order statistics with indicators and betas carried along.

    ``index[i]`` is the position of ``z[i]`` in the original sample, so the
    view is a stable permutation (ties keep original order).  Missing betas
    appear as ``nan``.
    """

    z: np.ndarray
    epsilon: np.ndarray
    beta: np.ndarray
    index: np.ndarray


class CensoredSample:
    """Immutable censored sample with a cached descending-order view.

    Parameters
    ----------
    observations : iterable of Observation
        The claims; must be nonempty.
    x0 : float, optional
        Known scale (deterministic lower threshold).  Required only by the
        fixed-threshold estimator forms; order-statistics forms ignore it.
    """

    __slots__ = ("_z", "_eps", "_beta", "_x0", "_order", "_obs_cache")

    def __init__(self, observations: Iterable[Observation], x0: Optional[float] = None):
        obs = tuple(observations)
        if not obs:
            raise ValueError("sample must be nonempty")
        z = np.array([o.z for o in obs], dtype=float)
        eps = np.array([o.epsilon for o in obs], dtype=float)
        beta = np.array([np.nan if o.beta is None else o.beta for o in obs], dtype=float)
        self._init_arrays(z, eps, beta, x0)

    @classmethod
    def from_arrays(
        cls,
        z,
        epsilon,
        beta=None,
        x0: Optional[float] = None,
    ) -> "CensoredSample":
        """Build a sample from plain arrays (fast path, no Observation objects).

        ``beta`` may be None, a scalar applied to every observation, or an
        array with ``nan`` marking missing entries.
        """
        self = object.__new__(cls)
        z = np.asarray(z, dtype=float).copy()
        if z.ndim != 1 or z.size == 0:
            raise ValueError("z must be a nonempty 1-d array")
        if not np.all(z > 0):
            raise ValueError("claim sizes must be positive")
        eps = np.asarray(epsilon, dtype=float).copy()
        if eps.shape != z.shape:
            raise ValueError("epsilon must match z in shape")
        if not np.all((eps == 0) | (eps == 1)):
            raise ValueError("epsilon entries must be 0 or 1")
        if beta is None:
            b = np.full_like(z, np.nan)
        else:
            b = np.broadcast_to(np.asarray(beta, dtype=float), z.shape).copy()
        if np.any(b[np.isfinite(b)] <= 0):
            raise ValueError("beta entries must be positive")
        self._init_arrays(z, eps, b, x0)
        return self

    def _init_arrays(self, z, eps, beta, x0):
        if x0 is not None:
            if not x0 > 0:
                raise ValueError(f"x0 must be positive, got {x0}")
            if z.min() < x0:
                raise ValueError("all claim sizes must be >= x0")
        for a in (z, eps, beta):
            a.flags.writeable = False
        self._z = z
        self._eps = eps
        self._beta = beta
        self._x0 = x0
        # stable sort on -z keeps ties in original order
        order = np.argsort(-z, kind="stable")
        order.flags.writeable = False
        self._order = order
        self._obs_cache = None

    # -- plain accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return self._z.size

    @property
    def z(self) -> np.ndarray:
        return self._z

    @property
    def epsilon(self) -> np.ndarray:
        return self._eps

    @property
    def beta(self) -> np.ndarray:
        """Expert betas in original order, nan where missing."""
        return self._beta

    @property
    def x0(self) -> Optional[float]:
        return self._x0

    @property
    def observations(self) -> tuple:
        if self._obs_cache is None:
            self._obs_cache = tuple(
                Observation(float(z), int(e), None if np.isnan(b) else float(b))
                for z, e, b in zip(self._z, self._eps, self._beta)
            )
        return self._obs_cache

    @property
    def n_censored(self) -> int:
        return int(self.n - self._eps.sum())

    def with_fallback_beta(self, beta: float) -> "CensoredSample":
        """Return a copy in which censored observations lacking a beta get
        the given global value.  Existing betas are kept."""
        if not beta > 0:
            raise ValueError(f"beta must be positive, got {beta}")
        b = self._beta.copy()
        fill = np.isnan(b) & (self._eps == 0)
        b[fill] = beta
        return CensoredSample.from_arrays(self._z, self._eps, b, self._x0)

    def scaled(self, c: float) -> "CensoredSample":
        """Return the sample with every claim size multiplied by ``c > 0``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        x0 = None if self._x0 is None else c * self._x0
        return CensoredSample.from_arrays(c * self._z, self._eps, self._beta, x0)


def order_statistics(sample: CensoredSample) -> OrderedView:
    """Descending order statistics of the sample, indicators attached.

    Idempotent and stable: equal claim sizes keep their original relative
    order, so repeated calls give identical views.
    """
    o = sample._order
    return OrderedView(sample.z[o], sample.epsilon[o], sample.beta[o], o)


@dataclass(frozen=True)
class TopKView:
    """The ``k`` largest observations together with the random threshold,
    which is the (k+1)-th largest claim size."""

    k: int
    z_kplus1: float
    z: np.ndarray
    epsilon: np.ndarray
    beta: np.ndarray
    index: np.ndarray

    @property
    def p_hat(self) -> float:
        """Fraction of uncensored observations among the k largest."""
        return float(self.epsilon.mean())


def top_k(sample: CensoredSample, k: int) -> TopKView:
    """View of the ``k`` largest observations above the threshold Z^(k+1).

    Requires ``1 <= k <= n - 1`` so that the threshold exists.
    """
    n = sample.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    view = order_statistics(sample)
    return TopKView(
        k=k,
        z_kplus1=float(view.z[k]),
        z=view.z[:k],
        epsilon=view.epsilon[:k],
        beta=view.beta[:k],
        index=view.index[:k],
    )


def p_hat(view: TopKView) -> float:
    """Proportion of uncensored observations in the view."""
    return view.p_hat


@dataclass(frozen=True)
class TopKSums:
    """Cumulative top-k statistics for every threshold index at once.

    Entry ``i`` of each array corresponds to ``k = ks[i]``:

    - ``s_eps``      sum of indicators over the k largest observations,
    - ``s_log``      sum of log spacings log(Z^(j) / Z^(k+1)), j <= k,
    - ``s_cens``     number of censored observations among the k largest,
    - ``s_inv_beta`` sum of (1 - eps)/beta over the k largest (None when
      betas were not requested).

    Computed in O(n) via cumulative sums; this is what makes whole Hill
    plots and the simulation harness cheap.
    """

    ks: np.ndarray
    s_eps: np.ndarray
    s_log: np.ndarray
    s_cens: np.ndarray
    s_inv_beta: Optional[np.ndarray] = None

    @property
    def p_hat(self) -> np.ndarray:
        return self.s_eps / self.ks


def cumulative_tail_sums(
    sample: CensoredSample,
    beta: Optional[float] = None,
    require_beta: bool = False,
) -> TopKSums:
    """Top-k sums for all k in 1..n-1 in one pass.

    ``beta`` fills missing expert values on censored observations.  When
    ``require_beta`` is set, a censored observation without a resolvable
    beta raises :class:`MissingBetaError`; otherwise the inverse-beta sums
    are simply omitted.
    """
    view = order_statistics(sample)
    n = sample.n
    if n < 2:
        raise ValueError("need at least two observations for top-k sums")
    logz = np.log(view.z)
    ks = np.arange(1, n)
    cum_eps = np.cumsum(view.epsilon)[: n - 1]
    s_log = np.cumsum(logz)[: n - 1] - ks * logz[1:]
    s_cens = ks - cum_eps

    s_inv_beta = None
    b = view.beta
    if beta is not None:
        b = np.where(np.isnan(b) & (view.epsilon == 0), beta, b)
    cens_missing = (view.epsilon == 0) & np.isnan(b)
    if not cens_missing.any():
        inv = np.where(view.epsilon == 0, 1.0 / np.where(np.isnan(b), 1.0, b), 0.0)
        s_inv_beta = np.cumsum(inv)[: n - 1]
    elif require_beta:
        raise MissingBetaError(
            f"{int(cens_missing.sum())} censored observation(s) carry no expert "
            "beta and no fallback was given"
        )
    return TopKSums(ks=ks, s_eps=cum_eps, s_log=s_log, s_cens=s_cens, s_inv_beta=s_inv_beta)


@dataclass(frozen=True)
class TailEstimate:
    """A tail-index estimate on the alpha scale with its provenance.

    ``xi_hat`` is the extreme value index 1/alpha.  ``k`` records how many
    exceedances entered the estimate, ``lam`` the penalization weight (0 for
    purely data-driven estimators) and ``p_hat`` the uncensored fraction
    among those exceedances.
    """

    alpha_hat: float
    kind: EstimatorKind
    k: int
    lam: float = 0.0
    p_hat: float = float("nan")

    def __post_init__(self):
        if not self.alpha_hat > 0:
            raise ValueError(f"alpha_hat must be positive, got {self.alpha_hat}")

    @property
    def xi_hat(self) -> float:
        return 1.0 / self.alpha_hat
