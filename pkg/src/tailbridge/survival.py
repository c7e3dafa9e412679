"""Kaplan-Meier product-limit estimation over claim sizes.

The "time" axis is claim size: the curve estimates P(eventual claim size
> z) from right-censored payments.  Drops happen only at uncensored values;
censored claims leave the risk set without a drop.  Ties between censored
and uncensored observations at the same value are resolved by processing
the uncensored ones first (both are in the risk set at that value).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CensoredSample, QuantileOutOfReachError

# cumprod of up to n factors carries O(n*eps) relative rounding; the gap
# between adjacent survival values is at least 1/n, so this slack can never
# jump a step
_REL_SLACK = 1e-9


@dataclass(frozen=True)
class KMCurve:
    """Right-continuous product-limit survival step function.

    ``z`` holds the distinct observed values in increasing order;
    ``survival[i]`` is the curve's value just after ``z[i]``; ``at_risk``
    and ``events`` are the n_i and d_i of the product.
    """

    z: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    n: int

    def survival_at(self, x):
        """S(x) of the step function (1 before the first observation)."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.z, x, side="right") - 1
        out = np.where(idx < 0, 1.0, self.survival[np.maximum(idx, 0)])
        return float(out) if out.ndim == 0 else out

    def quantile(self, q: float) -> float:
        """Smallest z with 1 - S(z) >= q (generalized inverse of the CDF).

        Raises :class:`QuantileOutOfReachError` when the curve never falls
        to 1 - q, which happens under heavy censoring at the top.
        """
        out = self.quantile_batch([q])[0]
        if np.isnan(out):
            raise QuantileOutOfReachError(
                f"survival curve never reaches {1 - q:.6g}; quantile level {q} "
                "is beyond the censored data"
            )
        return float(out)

    def quantile_batch(self, qs) -> np.ndarray:
        """Vectorized :meth:`quantile`; unreachable levels come back as nan."""
        qs = np.asarray(qs, dtype=float)
        if np.any((qs <= 0) | (qs >= 1)):
            raise ValueError("quantile levels must be in (0, 1)")
        targets = (1.0 - qs) * (1.0 + _REL_SLACK)
        # first index where survival <= target, exploiting monotonicity
        rev = self.survival[::-1]
        n_le = np.searchsorted(rev, targets, side="right")
        n_gt = self.survival.size - n_le
        out = np.where(
            n_gt < self.survival.size, self.z[np.minimum(n_gt, self.z.size - 1)], np.nan
        )
        return out.astype(float)


def kaplan_meier(sample: CensoredSample) -> KMCurve:
    """Product-limit estimate S(z) = prod_{z_i <= z} (1 - d_i / n_i).

    d_i counts uncensored observations equal to z_i and n_i counts all
    observations >= z_i.  With no censoring this is exactly the empirical
    survival function.
    """
    z = sample.z
    eps = sample.epsilon
    uz, inverse, counts = np.unique(z, return_inverse=True, return_counts=True)
    events = np.bincount(inverse, weights=eps, minlength=uz.size)
    at_risk = sample.n - (np.cumsum(counts) - counts)
    surv = np.cumprod(1.0 - events / at_risk)
    return KMCurve(z=uz, survival=surv, at_risk=at_risk.astype(int), events=events.astype(int), n=sample.n)


def km_quantile(curve: KMCurve, q: float) -> float:
    """Generalized-inverse quantile of a Kaplan-Meier curve."""
    return curve.quantile(q)
