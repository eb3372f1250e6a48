"""Location families with exact closed forms, plus exact binomial tail sums.

The built-in family is the double exponential written as

    f(x) = exp(-|x - mu| / (2 sigma)) / (4 sigma),

so the upper tail is 1 - F(t) = (1/2) exp(-(t - mu)/(2 sigma)) for t >= mu.
CAUTION: ``sigma`` here is HALF the conventional double-exponential scale
(the tail rate is 1/(2 sigma), the variance is 8 sigma^2).  Every tail
formula in this package uses this convention consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .rng import generator

HOLDS = "holds"
VIOLATED = "violated"
OUTSIDE_REGIME = "outside_regime"

_FAMILIES = ("laplace",)

# Uniform draws are clamped away from {0, 1} so the inverse CDF stays finite.
_U_LO = 2.0**-53
_U_HI = 1.0 - 2.0**-53


@dataclass(frozen=True)
class DistributionSpec:
    """A location family instance.

    ``atomless`` is a structural flag: every built-in family is continuous,
    so P(X = c) = 0 for each point c.  Checkers rely on it rather than
    attempting a pointwise probability estimate.
    """

    family: str = "laplace"
    mu: float = 0.0
    sigma: float = 1.0
    atomless: bool = True

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; known: {_FAMILIES}")
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be a positive finite real, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


def _maybe_scalar(out, scalar: bool):
    return float(out) if scalar else out


def pdf(dist: DistributionSpec, x):
    """Density exp(-|x - mu| / (2 sigma)) / (4 sigma)."""
    scalar = np.isscalar(x)
    z = np.abs(np.asarray(x, dtype=float) - dist.mu) / (2.0 * dist.sigma)
    return _maybe_scalar(np.exp(-z) / (4.0 * dist.sigma), scalar)


def cdf(dist: DistributionSpec, x):
    """Exact closed-form CDF; 1 - cdf(t) = (1/2) exp(-(t - mu)/(2 sigma)) for t >= mu."""
    scalar = np.isscalar(x)
    z = (np.asarray(x, dtype=float) - dist.mu) / (2.0 * dist.sigma)
    out = np.where(z < 0.0, 0.5 * np.exp(np.minimum(z, 0.0)),
                   1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))
    return _maybe_scalar(out, scalar)


def quantile(dist: DistributionSpec, q):
    """Inverse CDF on (0, 1); raises on arguments outside the open interval."""
    scalar = np.isscalar(q)
    qa = np.asarray(q, dtype=float)
    if np.any(qa <= 0.0) or np.any(qa >= 1.0):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    lower = 2.0 * dist.sigma * np.log(np.minimum(2.0 * qa, 1.0))
    upper = -2.0 * dist.sigma * np.log(np.minimum(2.0 * (1.0 - qa), 1.0))
    return _maybe_scalar(dist.mu + np.where(qa < 0.5, lower, upper), scalar)


def draw_sample(dist: DistributionSpec, n: int, seed: int) -> np.ndarray:
    """Sample of length n, a deterministic function of (dist, n, seed).

    Inverse-CDF applied to uniforms clamped to [2^-53, 1 - 2^-53]; the clamp
    keeps log arguments strictly positive without disturbing the law.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    g = generator(seed)
    u = np.clip(g.random(int(n)), _U_LO, _U_HI)
    return quantile(dist, u)


def uniform_matrix(shape, seed: int) -> np.ndarray:
    """Clamped uniforms for batched sampling paths (same clamp as draw_sample)."""
    g = generator(seed)
    return np.clip(g.random(shape), _U_LO, _U_HI)


def log_binomial_upper_median_tail(n: int, p: float) -> float:
    """log of sum_{k=ceil(n/2)}^{n} C(n,k) p^k (1-p)^(n-k), stable at tiny p.

    Terms are combined in log space around their maximum with compensated
    summation, so the result keeps full relative precision far below the
    double-precision underflow threshold.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return 0.0
    k = np.arange((n + 1) // 2, n + 1, dtype=float)
    logterms = (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
                + k * math.log(p) + (n - k) * math.log1p(-p))
    m = float(np.max(logterms))
    total = math.fsum(math.exp(t - m) for t in logterms)
    return m + math.log(total)


def binomial_upper_median_tail(n: int, p: float) -> float:
    """Exact upper-median binomial tail P(Bin(n, p) >= ceil(n/2))."""
    lt = log_binomial_upper_median_tail(n, p)
    if lt == -math.inf:
        return 0.0
    return min(1.0, math.exp(lt))


def median_tail_bound_holds(n: int, t: float, sigma: float) -> str:
    """Check the exceedance bound for the sample median of this family.

    For a sample of size n, P(median >= mu + t) is at most the upper-median
    tail of Bin(n, (1/2) exp(-t/(2 sigma))).  Inside the regime n >= ceil(8
    sigma) and t >= 8 sigma this must not exceed (1/2) e^{-t}; outside the
    regime the checker abstains rather than guessing.  The comparison is made
    in log space so it stays meaningful when both sides underflow.
    """
    if not (sigma > 0.0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    if n < math.ceil(8.0 * sigma) or t < 8.0 * sigma:
        return OUTSIDE_REGIME
    p = 0.5 * math.exp(-t / (2.0 * sigma))
    log_tail = log_binomial_upper_median_tail(int(n), p)
    log_bound = math.log(0.5) - t
    return HOLDS if log_tail <= log_bound else VIOLATED
