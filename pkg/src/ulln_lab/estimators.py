"""Sample median, monotone-score estimators, and the interpolated family.

The score estimator solves sum_i psi(X_i - t) = 0 for a nondecreasing psi
with psi(0) = 0.  The score sum is nonincreasing in t, so its zero set is an
interval; the estimator is defined as the midpoint of that interval, located
by bisection.  With psi = sign this reproduces the classical sample median
exactly, including the even-size averaging rule.

All estimators evaluate their arithmetic on sorted data, which makes them
exactly permutation invariant (bit for bit), a property the audit relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

HOLDS = "holds"
VIOLATED = "violated"

_KINDS = ("median", "m_estimator", "first_obs", "constant")


class InvalidPsiError(ValueError):
    """The declared score function violates its contract (psi(0)=0, monotone)."""


@dataclass(frozen=True)
class TailBound:
    """Declared exceedance bound sup_{n >= n_min} P(|est - theta| >= t) <= C e^{-t^p},
    valid for t >= gamma."""

    C: float
    p: float
    gamma: float
    n_min: int


@dataclass(frozen=True)
class EstimatorSpec:
    id: str
    kind: str
    psi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    symmetric: bool = True
    tail: Optional[TailBound] = None
    const_value: float = 0.0  # only used by kind="constant"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}; known: {_KINDS}")
        if self.kind == "m_estimator" and self.psi is None:
            raise ValueError("m_estimator kind requires a psi")


def as_sample(values) -> np.ndarray:
    """Validate and normalize a sample: 1-D, finite, length >= 1."""
    s = np.asarray(values, dtype=float)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("sample must be a non-empty 1-D array")
    if not np.all(np.isfinite(s)):
        raise ValueError("sample entries must be finite")
    return s


def median(values) -> float:
    """Order statistic X((n+1)/2) for odd n; mean of the two central order
    statistics for even n."""
    s = as_sample(values)
    xs = np.sort(s)
    n = xs.size
    if n % 2 == 1:
        return float(xs[(n - 1) // 2])
    return float(0.5 * (xs[n // 2 - 1] + xs[n // 2]))


def default_tol(s: np.ndarray) -> float:
    return 1e-12 * max(1.0, abs(float(s.min())), abs(float(s.max())))


def _validate_psi(psi, lo: float, hi: float) -> None:
    # Contract is spot-checked on a grid, not proven: 1001 probe points over
    # the range of arguments the bisection can produce.
    z = psi(np.zeros(1))
    if not np.all(z == 0.0):
        raise InvalidPsiError(f"psi(0) must be 0, got {float(z[0])}")
    grid = np.linspace(lo, hi, 1001)
    vals = psi(grid)
    if np.any(np.diff(vals) < 0.0):
        raise InvalidPsiError("psi must be nondecreasing on the probe grid")


def m_estimate(values, e: EstimatorSpec, tol: float | None = None) -> float:
    """Midpoint of the zero interval of t -> sum_i psi(X_i - t).

    The bracket [min - 1, max + 1] pins the score sum >= 0 on the left and
    <= 0 on the right, so both interval edges are located by monotone
    bisection to width `tol`.
    """
    if e.kind != "m_estimator":
        raise ValueError(f"estimator {e.id!r} is not an m_estimator")
    s = as_sample(values)
    if tol is None:
        tol = default_tol(s)
    xs = np.sort(s)
    lo = float(xs[0]) - 1.0
    hi = float(xs[-1]) + 1.0
    _validate_psi(e.psi, xs[0] - hi, xs[-1] - lo)

    def score(t: float) -> float:
        return float(np.sum(e.psi(xs - t)))

    def bisect(pred) -> float:
        # smallest t in [lo, hi] with pred(t) true; pred monotone false->true
        a, b = lo, hi
        if pred(a):
            return a
        while b - a > tol:
            m = 0.5 * (a + b)
            if pred(m):
                b = m
            else:
                a = m
        return b

    left = bisect(lambda t: score(t) <= 0.0)
    if score(hi) < 0.0:
        right = bisect(lambda t: score(t) < 0.0)
    else:
        right = hi  # degenerate flat score; zero set extends to the bracket edge
    return 0.5 * (left + right)


def estimate(values, e: EstimatorSpec, tol: float | None = None) -> float:
    """Apply any registered estimator kind to a sample."""
    s = as_sample(values)
    if e.kind == "median":
        return median(s)
    if e.kind == "m_estimator":
        return m_estimate(s, e, tol)
    if e.kind == "first_obs":
        return float(s[0])
    return float(e.const_value)


def leave_first_out(values, e: EstimatorSpec, tol: float | None = None) -> float:
    """The same estimator applied to entries 2..n."""
    s = as_sample(values)
    if s.size < 2:
        raise ValueError("leave_first_out requires a sample of size >= 2")
    return estimate(s[1:], e, tol)


def interpolate(theta: float, theta_star: float, v: float) -> float:
    """theta + v (theta_star - theta) for v in [0, 1]."""
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"interpolation weight must lie in [0, 1], got {v}")
    return float(theta + v * (theta_star - theta))


class BracketingCheck(NamedTuple):
    verdict: str
    theta_full: float
    theta_suffix: float
    x1: float


def check_bracketing(values, e: EstimatorSpec, tol: float | None = None) -> BracketingCheck:
    """Leave-first-out monotonicity of monotone-score estimators.

    If the full estimate sits strictly below the first observation, dropping
    that observation can only pull the estimate down (and symmetrically
    above).  Premises and conclusions are both read to tolerance: when the
    estimate coincides with the first observation the direction of the claim
    degenerates (the suffix zero interval contains the estimate but its
    midpoint may sit on either side), so no directional check applies.
    """
    s = as_sample(values)
    if s.size < 2:
        raise ValueError("check_bracketing requires a sample of size >= 2")
    if e.kind not in ("median", "m_estimator"):
        raise ValueError("bracketing applies to monotone-score estimators only")
    full = estimate(s, e, tol)
    suffix = leave_first_out(s, e, tol)
    x1 = float(s[0])
    slack = 4.0 * (tol if tol is not None else default_tol(s))
    ok = True
    if full <= x1 - slack:
        ok = suffix <= full + slack
    elif full >= x1 + slack:
        ok = suffix >= full - slack
    return BracketingCheck(HOLDS if ok else VIOLATED, full, suffix, x1)


def permutation_symmetry_check(values, e: EstimatorSpec, perm) -> str:
    """Exact equality of the estimate under a permutation of the sample."""
    s = as_sample(values)
    idx = np.asarray(perm, dtype=int)
    if sorted(idx.tolist()) != list(range(s.size)):
        raise ValueError("perm must be a permutation of 0..n-1")
    a = estimate(s, e)
    b = estimate(s[idx], e)
    return HOLDS if a == b else VIOLATED


# --- registry ----------------------------------------------------------------

def _sign_psi(y: np.ndarray) -> np.ndarray:
    return np.sign(y)


def _identity_psi(y: np.ndarray) -> np.ndarray:
    return y


def available_estimator_ids() -> tuple[str, ...]:
    return ("median", "mean", "sign-m", "first-obs", "constant")


def get_estimator(est_id: str, *, sigma: float = 1.0, theta: float = 0.0) -> EstimatorSpec:
    """Build a registry estimator.

    The median-type entries carry the declared exceedance bound with C = 1,
    p = 1, gamma = 8 sigma, valid from n >= ceil(8 sigma).  "constant" is the
    negative control pinned at theta + 1 and "first-obs" the permutation
    asymmetric one.
    """
    tail = TailBound(C=1.0, p=1.0, gamma=8.0 * sigma,
                     n_min=max(2, math.ceil(8.0 * sigma)))
    if est_id == "median":
        return EstimatorSpec(id="median", kind="median", symmetric=True, tail=tail)
    if est_id == "sign-m":
        return EstimatorSpec(id="sign-m", kind="m_estimator", psi=_sign_psi,
                             symmetric=True, tail=tail)
    if est_id == "mean":
        return EstimatorSpec(id="mean", kind="m_estimator", psi=_identity_psi,
                             symmetric=True, tail=None)
    if est_id == "first-obs":
        return EstimatorSpec(id="first-obs", kind="first_obs", symmetric=False)
    if est_id == "constant":
        return EstimatorSpec(id="constant", kind="constant", symmetric=True,
                             const_value=theta + 1.0)
    raise KeyError(f"unknown estimator id {est_id!r}; known: {available_estimator_ids()}")
