"""Extreme quantile estimation by power-law extrapolation.

Each estimator multiplies an anchor quantile at level 1 - k/n by the
extrapolation factor (k/(n p))**xi.  Anchors come from the Kaplan-Meier
curve of the censored claims, from an injected expert quantile function
(for instance the empirical quantiles of ultimates), or from the weighted
geometric mean of both, in which case the exponent splits between the
data-driven and expert tail indices with weights given by the uncensored
fraction among the top k.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .core import CensoredSample, top_k
from .estimators import hill_censored
from .survival import kaplan_meier


class QuantileKind(str, Enum):
    MLE = "mle"
    EXPERT = "expert"
    COMBINED = "combined"
    ULTIMATES = "ultimates"


@dataclass(frozen=True)
class QuantileEstimate:
    """An extreme quantile estimate Q(1 - p) with its construction.

    ``anchor`` is the level-(1 - k/n) quantile that was extrapolated from,
    ``xi`` the tail index applied to the extrapolation factor k/(n p), and
    ``interpolation`` flags the regime n p >= k where the factor is <= 1
    and the extrapolation asymptotics do not apply.
    """

    p: float
    k: int
    value: float
    kind: QuantileKind
    anchor: float
    xi: float
    interpolation: bool


def extrapolation_factor(k: int, n: int, p: float) -> float:
    """The ratio k/(n p) driving the tail extrapolation."""
    return k / (n * p)


def weissman(
    anchor: float, xi: float, k: int, n: int, p: float, kind: QuantileKind
) -> QuantileEstimate:
    """Extrapolate an anchor quantile with a tail index: anchor * (k/(np))**xi."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    if not anchor > 0:
        raise ValueError("anchor must be positive")
    factor = extrapolation_factor(k, n, p)
    return QuantileEstimate(
        p=p,
        k=k,
        value=anchor * factor**xi,
        kind=kind,
        anchor=anchor,
        xi=xi,
        interpolation=n * p >= k,
    )


def weissman_mle(sample: CensoredSample, k: int, p: float) -> QuantileEstimate:
    """Pure data route: Kaplan-Meier anchor and the censored Hill index."""
    est = hill_censored(sample, k)
    anchor = kaplan_meier(sample).quantile(1.0 - k / sample.n)
    return weissman(anchor, est.xi_hat, k, sample.n, p, QuantileKind.MLE)


def weissman_expert(
    sample: CensoredSample,
    k: int,
    p: float,
    beta: float,
    anchor_fn: Optional[Callable[[float], float]] = None,
) -> QuantileEstimate:
    """Pure expert route: expert tail index beta, expert anchor if supplied,
    Kaplan-Meier anchor otherwise."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    level = 1.0 - k / sample.n
    anchor = anchor_fn(level) if anchor_fn is not None else kaplan_meier(sample).quantile(level)
    return weissman(float(anchor), 1.0 / beta, k, sample.n, p, QuantileKind.EXPERT)


def weissman_combined(
    sample: CensoredSample,
    k: int,
    p: float,
    beta: float,
    anchor_fn: Optional[Callable[[float], float]] = None,
) -> QuantileEstimate:
    """Geometric combination of the data and expert routes.

    The two branch estimates are raised to the uncensored and censored
    fractions among the top k; equivalently, the geometric-mean anchor is
    extrapolated with the combined index whose inverse is the same weighted
    average.  Without an expert anchor both branches share the Kaplan-Meier
    anchor, so the value reduces to that anchor extrapolated with the
    combined index.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    n = sample.n
    level = 1.0 - k / n
    factor = extrapolation_factor(k, n, p)
    km = kaplan_meier(sample)
    ph = top_k(sample, k).p_hat
    ex_anchor = float(anchor_fn(level)) if anchor_fn is not None else None
    if ph == 0.0:
        anchor = ex_anchor if ex_anchor is not None else km.quantile(level)
        xi = 1.0 / beta
        value = anchor * factor**xi
    else:
        km_anchor = km.quantile(level)
        xi_mle = hill_censored(sample, k).xi_hat
        if ph == 1.0:
            anchor, xi = km_anchor, xi_mle
            value = anchor * factor**xi
        else:
            if ex_anchor is None:
                ex_anchor = km_anchor
            xi = ph * xi_mle + (1.0 - ph) / beta
            value = (km_anchor * factor**xi_mle) ** ph * (
                ex_anchor * factor ** (1.0 / beta)
            ) ** (1.0 - ph)
            anchor = km_anchor**ph * ex_anchor ** (1.0 - ph)
    if not anchor > 0:
        raise ValueError("anchor must be positive")
    return QuantileEstimate(
        p=p,
        k=k,
        value=float(value),
        kind=QuantileKind.COMBINED,
        anchor=float(anchor),
        xi=float(xi),
        interpolation=n * p >= k,
    )
