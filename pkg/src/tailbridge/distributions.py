"""Heavy-tailed distribution catalog with second-order tail expansions.

Three families are supported: exact Pareto, Burr and Frechet.  Each exposes
the survival function, the quantile function (generalized inverse of the
CDF), inverse-transform sampling from an injected ``numpy.random.Generator``,
and the constants ``(C, alpha, D, nu)`` of the two-term tail expansion

    P(X > x) = C * x**(-alpha) * (1 + D * x**(-nu) * (1 + o(1))).

An exact Pareto tail has no second-order term; this is encoded as ``D = 0``
with ``nu = inf`` so that combination and bias formulas degrade gracefully.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HallParams:
    """Constants of a two-term power tail expansion (see module docstring)."""

    C: float
    alpha: float
    D: float
    nu: float

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.nu > 0:
            raise ValueError("nu must be positive")

    @property
    def has_second_order(self) -> bool:
        return self.D != 0.0 and math.isfinite(self.nu)


@dataclass(frozen=True)
class CombinedHallParams:
    """Tail expansion of Z = min(X, L) for independent X and L.

    ``alpha_c`` is the combined first-order index, ``p`` the limiting
    probability that the minimum is realized by X (i.e. the observation is
    uncensored).  ``d_over_alpha_star`` is the second-order constant driving
    the bias of the uncensored-fraction estimator.
    """

    C: float
    alpha_c: float
    nu_star: float
    D_star: float
    d_over_alpha_star: float
    p: float

    @property
    def alpha(self) -> float:
        """First-order index of the variable of interest X."""
        return self.p * self.alpha_c

    @property
    def alpha2(self) -> float:
        """First-order index of the censoring variable L."""
        return (1.0 - self.p) * self.alpha_c

    @property
    def has_second_order(self) -> bool:
        return self.D_star != 0.0 and math.isfinite(self.nu_star)


def combine_hall(x: HallParams, l: HallParams) -> CombinedHallParams:
    """Tail constants of min(X, L) from the marginal tail constants.

    The product of the two survival functions keeps the slower-decaying
    second-order term; when the rates tie, the D constants add.
    """
    if x.nu < l.nu:
        d_star = x.D
        doa = x.D / x.alpha
    elif l.nu < x.nu:
        d_star = l.D
        doa = -l.D / l.alpha
    else:
        d_star = x.D + l.D
        doa = x.D / x.alpha - l.D / l.alpha
    alpha_c = x.alpha + l.alpha
    return CombinedHallParams(
        C=x.C * l.C,
        alpha_c=alpha_c,
        nu_star=min(x.nu, l.nu),
        D_star=d_star,
        d_over_alpha_star=doa,
        p=x.alpha / alpha_c,
    )


def _draw_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform draws guaranteed to be in the open interval (0, 1)."""
    u = rng.random(n)
    while np.any(u == 0.0):
        zero = u == 0.0
        u[zero] = rng.random(int(zero.sum()))
    return u


@dataclass(frozen=True)
class ParetoDist:
    """Exact Pareto: survival (x0/x)**alpha for x >= x0."""

    alpha: float
    x0: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")

    @property
    def xi(self) -> float:
        return 1.0 / self.alpha

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= self.x0, 1.0, (self.x0 / np.maximum(x, self.x0)) ** self.alpha)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise ValueError("quantile level must be in (0, 1)")
        out = self.x0 * (1.0 - q) ** (-1.0 / self.alpha)
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.x0 * _draw_uniform(rng, n) ** (-1.0 / self.alpha)

    def hall_params(self) -> HallParams:
        return HallParams(C=self.x0**self.alpha, alpha=self.alpha, D=0.0, nu=math.inf)

    def describe(self) -> dict:
        return {"family": "pareto", "alpha": self.alpha, "x0": self.x0}


@dataclass(frozen=True)
class BurrDist:
    """Burr: survival (eta / (eta + x**tau))**lam for x > 0.

    The first-order tail index is ``lam * tau``.
    """

    eta: float
    lam: float
    tau: float

    def __post_init__(self):
        for name in ("eta", "lam", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def alpha(self) -> float:
        return self.lam * self.tau

    @property
    def xi(self) -> float:
        return 1.0 / self.alpha

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= 0, 1.0, (self.eta / (self.eta + np.maximum(x, 0.0) ** self.tau)) ** self.lam)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise ValueError("quantile level must be in (0, 1)")
        out = (self.eta * ((1.0 - q) ** (-1.0 / self.lam) - 1.0)) ** (1.0 / self.tau)
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        s = _draw_uniform(rng, n)  # survival levels
        return (self.eta * (s ** (-1.0 / self.lam) - 1.0)) ** (1.0 / self.tau)

    def hall_params(self) -> HallParams:
        # (eta/(eta + x**tau))**lam = eta**lam x**(-lam tau) (1 - lam eta x**(-tau) + ...)
        return HallParams(C=self.eta**self.lam, alpha=self.alpha, D=-self.lam * self.eta, nu=self.tau)

    def describe(self) -> dict:
        return {"family": "burr", "eta": self.eta, "lam": self.lam, "tau": self.tau}


@dataclass(frozen=True)
class FrechetDist:
    """Frechet: survival 1 - exp(-x**(-alpha)) for x > 0."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def xi(self) -> float:
        return 1.0 / self.alpha

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= 0, 1.0, -np.expm1(-np.maximum(x, 1e-300) ** (-self.alpha)))
        return float(out) if out.ndim == 0 else out

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise ValueError("quantile level must be in (0, 1)")
        out = (-np.log(q)) ** (-1.0 / self.alpha)
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return (-np.log(_draw_uniform(rng, n))) ** (-1.0 / self.alpha)

    def hall_params(self) -> HallParams:
        # 1 - exp(-x**(-a)) = x**(-a) (1 - x**(-a)/2 + ...)
        return HallParams(C=1.0, alpha=self.alpha, D=-0.5, nu=self.alpha)

    def describe(self) -> dict:
        return {"family": "frechet", "alpha": self.alpha}


def dist_from_dict(spec: dict):
    """Rebuild a catalog distribution from its ``describe()`` dictionary."""
    family = spec["family"]
    if family == "pareto":
        return ParetoDist(alpha=spec["alpha"], x0=spec.get("x0", 1.0))
    if family == "burr":
        return BurrDist(eta=spec["eta"], lam=spec["lam"], tau=spec["tau"])
    if family == "frechet":
        return FrechetDist(alpha=spec["alpha"])
    raise ValueError(f"unknown distribution family: {family!r}")
