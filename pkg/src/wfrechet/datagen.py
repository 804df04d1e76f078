"""Seeded zero-inflated negative binomial quantile-function responses.

Random streams come from numpy's Philox counter-based generator keyed by a
``SeedSequence`` built from the user seed, so the draws are fully determined
by the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .core import make_grid

TAIL_MASS = 1e-12
TAIL_SDS = 20.0


@dataclass(frozen=True)
class ZinbParams:
    pi0: float
    r: float
    mu: float

    def __post_init__(self):
        if not 0 <= self.pi0 < 1:
            raise ValueError(f"pi0 must lie in [0, 1), got {self.pi0}")
        if not self.r > 0 or not self.mu > 0:
            raise ValueError("r and mu must be positive")


def make_rng(seed, *key) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def zinb_cdf_table(params: ZinbParams) -> np.ndarray:
    """Mixture CDF at k = 0, 1, ... up to the accumulation cutoff.

    Stops once the remaining NB tail mass drops below 1e-12 or k passes
    ``mu + 20 sd``.
    """
    pi0, r, mu = params.pi0, params.r, params.mu
    kmax = int(math.floor(mu + TAIL_SDS * math.sqrt(mu + mu * mu / r)))
    ratio = mu / (r + mu)
    pmf = math.exp(r * (math.log(r) - math.log(r + mu)))
    cdf = pmf
    out = [pi0 + (1.0 - pi0) * cdf]
    k = 0
    while 1.0 - cdf >= TAIL_MASS and k < kmax:
        pmf *= (k + r) / (k + 1) * ratio
        cdf += pmf
        k += 1
        out.append(pi0 + (1.0 - pi0) * cdf)
    return np.array(out)


def zinb_quantile(u, params: ZinbParams):
    """Smallest integer k with mixture CDF(k) >= u; vectorized over ``u``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(~(u_arr > 0)) or np.any(~(u_arr < 1)):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    table = zinb_cdf_table(params)
    k = np.searchsorted(table, u_arr, side="left")
    k = np.minimum(k, table.size - 1).astype(float)
    return float(k) if np.ndim(u) == 0 else k


def logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class ZinbLinks:
    """Covariate links; only the first four covariates enter.

    ``pi0 = logistic(pi0_intercept + pi0_slope * x1)``,
    ``mu = exp(mu_intercept + mu_slope * (x2 + x3))``,
    ``r = exp(r_intercept + r_slope * x4)``.
    """

    pi0_intercept: float = -1.0
    pi0_slope: float = 3.0
    mu_intercept: float = 1.5
    mu_slope: float = 0.4
    r_intercept: float = 0.5
    r_slope: float = 2.0

    def params(self, x) -> ZinbParams:
        return ZinbParams(
            pi0=float(logistic(self.pi0_intercept + self.pi0_slope * x[0])),
            r=float(np.exp(self.r_intercept + self.r_slope * x[3])),
            mu=float(np.exp(self.mu_intercept + self.mu_slope * x[1] + self.mu_slope * x[2])),
        )


def quantile_rows(X, m, links: ZinbLinks = ZinbLinks()):
    levels = make_grid(m).levels
    return np.vstack([zinb_quantile(levels, links.params(x)) for x in np.asarray(X, dtype=float)])


def generate_zinbinom_qf(n=100, m=100, p=10, seed=1, links: ZinbLinks = ZinbLinks()):
    """Simulate ``(X, Y)``: X is n x p Uniform(-1, 1), Y holds n zinbinom
    quantile functions on the m-point midpoint grid."""
    if p < 4:
        raise ValueError(f"need p >= 4 covariates, got {p}")
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    X = make_rng(seed).uniform(-1.0, 1.0, size=(n, p))
    return X, quantile_rows(X, m, links)
