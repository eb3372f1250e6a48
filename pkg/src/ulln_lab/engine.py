"""Monte Carlo engine: mean-absolute-error surfaces over the interpolated
estimator family, pinned-first-observation tail probes, and the expansion
residual check.

Seeding scheme (declared, stable):

* curve replicates share one sample per (n, r):  mix64(master, n, r)
* standalone cell estimates re-draw per (n, v_index, r):
  mix64(master, n, v_index, r)
* pinned tail probes:  mix64(master, PIN_TAG, n, r)

Replicates are independent work units; when a worker pool is used, results
are stored by replicate index and reduced in index order, so output is
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import quadrature
from .distributions import DistributionSpec, draw_sample, pdf
from .estimators import EstimatorSpec, as_sample, estimate, interpolate
from .hfuncs import HSpec, MissingAntiderivativeError
from .rng import mix64

_PIN_TAG = 0x517E

GRID_SUP_NOTE = ("sup taken over the declared v grid; it is a lower bound on "
                 "the supremum over the continuum v in [0, 1]")


class RegimeError(ValueError):
    """Arguments fall outside the declared validity regime of a bound."""


@dataclass(frozen=True)
class SimulationPlan:
    """One experiment: distribution, summand, estimator, and grids.

    `target` is either an explicit real or the string "quadrature", meaning
    the limiting expectation is computed by singularity-split quadrature.
    Grid invariants beyond basic sanity (endpoints present, >= 2 replicates)
    are enforced by the config layer; the engine itself accepts any sorted
    grids so that degenerate diagnostic runs remain expressible.
    """

    dist: DistributionSpec
    h: HSpec
    estimator: EstimatorSpec
    theta: float
    n_grid: tuple[int, ...]
    v_grid: tuple[float, ...]
    replicates: int
    master_seed: int
    target: float | str = "quadrature"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "v_grid", tuple(float(v) for v in self.v_grid))
        if len(self.n_grid) == 0 or any(n < 1 for n in self.n_grid):
            raise ValueError("n_grid must be a non-empty list of positive sizes")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ValueError("n_grid must be strictly increasing")
        if len(self.v_grid) == 0:
            raise ValueError("v_grid must be non-empty")
        if list(self.v_grid) != sorted(set(self.v_grid)):
            raise ValueError("v_grid must be strictly increasing")
        if self.v_grid[0] < 0.0 or self.v_grid[-1] > 1.0:
            raise ValueError("v_grid values must lie in [0, 1]")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if isinstance(self.target, str) and self.target != "quadrature":
            raise ValueError(f"target must be a real or 'quadrature', got {self.target!r}")


class L1Stat(NamedTuple):
    estimate: float
    se: float


@dataclass(frozen=True)
class L1Point:
    n: int
    v: float
    estimate: float
    se: float
    replicates: int


@dataclass(frozen=True)
class SupEntry:
    n: int
    sup: float
    argmax_v: float
    se_at_argmax: float


@dataclass(frozen=True)
class L1Curve:
    points: tuple[L1Point, ...]
    sups: tuple[SupEntry, ...]
    target: float
    single_replicate: bool
    note: str = GRID_SUP_NOTE

    def point(self, n: int, v: float) -> L1Point:
        for p in self.points:
            if p.n == n and p.v == v:
                return p
        raise KeyError(f"no curve point at (n={n}, v={v})")

    def sup_at(self, n: int) -> SupEntry:
        for s in self.sups:
            if s.n == n:
                return s
        raise KeyError(f"no sup entry at n={n}")


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    sup: float
    argmax_v: float
    se: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[ConvergenceRow, ...]
    decreasing: bool
    target: float
    note: str = GRID_SUP_NOTE

    @property
    def verdict(self) -> str:
        return "decreasing" if self.decreasing else "not_decreasing"


def empirical_h_mean(values, t: float, h: HSpec) -> float:
    """(1/n) sum_i 1{X_i != t} h(X_i - t).

    The indicator is exact floating-point inequality, which also keeps every
    evaluation of h away from its singular set at 0; any further declared
    singular offsets are masked the same way, so the operation is total.
    """
    s = as_sample(values)
    y = s - t
    mask = y != 0.0
    for d in h.singularities:
        if d != 0.0:
            mask &= y != d
    out = np.zeros_like(y)
    if np.any(mask):
        out[mask] = h.func(y[mask])
    return float(np.sum(out)) / s.size


def target_expectation(dist: DistributionSpec, h: HSpec, tol: float = 1e-10,
                       theta: float | None = None) -> float:
    """E[h(X - theta)] by quadrature, split at theta + d for each singular d.

    Raises quadrature.NonintegrableError when refinement near a singular
    point fails to converge (the |h| = 1/|y| case).
    """
    if theta is None:
        theta = dist.mu
    singular = [theta + d for d in h.singularities]

    def f(x: float) -> float:
        y = np.asarray([x - theta])
        if any(y[0] == d for d in h.singularities):
            return 0.0
        return float(h.func(y)[0]) * pdf(dist, x)

    return quadrature.integrate(f, -math.inf, math.inf,
                                singular_points=singular,
                                break_points=[dist.mu], abs_tol=tol)


def resolve_target(plan: SimulationPlan, tol: float = 1e-10) -> float:
    if isinstance(plan.target, str):
        return target_expectation(plan.dist, plan.h, tol=tol, theta=plan.theta)
    return float(plan.target)


def _map_indexed(fn, count: int, threads: int) -> list:
    """Apply fn(i) for i in range(count); results in index order regardless
    of scheduling."""
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _abs_signed_h_sums(X: np.ndarray, shifts: np.ndarray, h: HSpec) -> np.ndarray:
    """Row means of 1{X != shift} h(X - shift) for per-row shifts."""
    Y = X - shifts[:, None]
    mask = Y != 0.0
    for d in h.singularities:
        if d != 0.0:
            mask &= Y != d
    H = np.zeros_like(Y)
    if np.any(mask):
        H[mask] = h.func(Y[mask])
    return H.sum(axis=1) / X.shape[1]


def deviation_matrix(plan: SimulationPlan, n: int, target: float | None = None,
                     threads: int = 1) -> np.ndarray:
    """Signed deviations D[r, j] = mean_h(s_r, theta + v_j (est_r - theta)) - target.

    One sample serves all v within a replicate: the whole interpolated family
    is generated by a single estimate, so dependence across v is intended and
    matches the object the per-n supremum is taken over.
    """
    if target is None:
        target = resolve_target(plan)
    R = plan.replicates
    vgrid = np.asarray(plan.v_grid)

    def one(r: int):
        s = draw_sample(plan.dist, n, mix64(plan.master_seed, n, r))
        return s, estimate(s, plan.estimator)

    rows = _map_indexed(one, R, threads)
    X = np.stack([row[0] for row in rows])
    est = np.asarray([row[1] for row in rows])
    D = np.empty((R, vgrid.size))
    for j, v in enumerate(vgrid):
        shifts = plan.theta + v * (est - plan.theta)
        D[:, j] = _abs_signed_h_sums(X, shifts, plan.h) - target
    return D


def l1_error_at(plan: SimulationPlan, n: int, v: float) -> L1Stat:
    """Mean and standard error of |deviation| at one (n, v) cell.

    Replicates here are drawn independently per cell with seeds
    mix64(master, n, v_index, r).  A single-replicate call returns se = 0 by
    convention (flagged at the curve level).
    """
    if n not in plan.n_grid:
        raise ValueError(f"n={n} is not on the plan's n_grid")
    if v not in plan.v_grid:
        raise ValueError(f"v={v} is not on the plan's v_grid")
    v_index = plan.v_grid.index(v)
    target = resolve_target(plan)
    devs = []
    for r in range(plan.replicates):
        s = draw_sample(plan.dist, n, mix64(plan.master_seed, n, v_index, r))
        th_star = estimate(s, plan.estimator)
        th = interpolate(plan.theta, th_star, v)
        devs.append(abs(empirical_h_mean(s, th, plan.h) - target))
    a = np.asarray(devs)
    est = float(a.mean())
    se = 0.0 if a.size < 2 else float(a.std(ddof=1) / math.sqrt(a.size))
    return L1Stat(est, se)


def sup_l1_curve(plan: SimulationPlan, threads: int = 1) -> L1Curve:
    """Evaluate the full (n, v) lattice and record per-n grid suprema."""
    target = resolve_target(plan)
    points: list[L1Point] = []
    sups: list[SupEntry] = []
    R = plan.replicates
    for n in plan.n_grid:
        D = deviation_matrix(plan, n, target, threads)
        A = np.abs(D)
        est = A.mean(axis=0)
        if R >= 2:
            se = A.std(axis=0, ddof=1) / math.sqrt(R)
        else:
            se = np.zeros_like(est)
        for j, v in enumerate(plan.v_grid):
            points.append(L1Point(n, v, float(est[j]), float(se[j]), R))
        jmax = int(np.argmax(est))
        sups.append(SupEntry(n, float(est[jmax]), plan.v_grid[jmax], float(se[jmax])))
    return L1Curve(points=tuple(points), sups=tuple(sups), target=target,
                   single_replicate=(R < 2))


def convergence_study(plan: SimulationPlan, threads: int = 1) -> ConvergenceReport:
    """Per-n grid-sup table plus a monotonicity verdict.

    "Decreasing" means every consecutive pair satisfies
    sup_{k+1} < sup_k + 2 sqrt(se_k^2 + se_{k+1}^2).
    """
    if len(plan.n_grid) < 3:
        raise ValueError("convergence_study needs at least 3 grid sizes")
    curve = sup_l1_curve(plan, threads)
    rows = tuple(ConvergenceRow(s.n, s.sup, s.argmax_v, s.se_at_argmax)
                 for s in curve.sups)
    ok = True
    for a, b in zip(rows[:-1], rows[1:]):
        slack = 2.0 * math.hypot(a.se, b.se)
        ok = ok and (b.sup < a.sup + slack)
    return ConvergenceReport(rows=rows, decreasing=ok, target=curve.target)


def pinned_sample(dist: DistributionSpec, x1: float, n: int, seed: int) -> np.ndarray:
    """Sample whose first entry is exactly x1, the rest i.i.d. from dist.

    Pinning realizes the conditional law given the first observation exactly,
    since the remaining entries are independent of it.
    """
    if n < 2:
        raise ValueError("pinned_sample requires n >= 2")
    rest = draw_sample(dist, n - 1, seed)
    return np.concatenate(([float(x1)], rest))


class TailProbe(NamedTuple):
    estimate: float
    se: float
    bound: float


def conditional_tail_probability(plan: SimulationPlan, x: float, u: float,
                                 n: int, v: float, R: int) -> TailProbe:
    """Monte Carlo conditional exceedance probability against the declared bound.

    Upper branch (u >= max(x + gamma, beta0)): estimates
    P(theta_n - theta <= x - u | X_1 - theta = x); lower branch mirrored.
    Returns (estimate, binomial se, C e^{-|x-u|^p}).
    """
    tail = plan.estimator.tail
    env = plan.h.envelope
    if tail is None:
        raise RegimeError(f"estimator {plan.estimator.id!r} declares no tail bound")
    if env is None:
        raise RegimeError(f"h {plan.h.id!r} declares no envelope parameters")
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"v must lie in [0, 1], got {v}")
    if R < 1:
        raise ValueError("R must be >= 1")
    upper = u >= max(x + tail.gamma, env.beta0)
    lower = u <= min(x - tail.gamma, -env.beta0)
    if not (upper or lower):
        raise RegimeError(
            f"(x={x}, u={u}) outside the tail regime: need u >= max(x+gamma, beta0) "
            f"or u <= min(x-gamma, -beta0) with gamma={tail.gamma}, beta0={env.beta0}")
    x1 = plan.theta + x
    hits = 0
    for r in range(R):
        s = pinned_sample(plan.dist, x1, n, mix64(plan.master_seed, _PIN_TAG, n, r))
        th = interpolate(plan.theta, estimate(s, plan.estimator), v)
        d = th - plan.theta
        if (upper and d <= x - u) or (lower and d >= x - u):
            hits += 1
    p_hat = hits / R
    se = math.sqrt(p_hat * (1.0 - p_hat) / R)
    bound = tail.C * math.exp(-abs(x - u) ** tail.p)
    return TailProbe(p_hat, se, bound)


def taylor_residual(values, theta: float, theta_star: float, h: HSpec,
                    quad_tol: float = 1e-8) -> float:
    """|T(theta_star) - T(theta) - (theta_star - theta) * Q| where
    T(t) = (1/n) sum_i G(X_i - t) and Q integrates the empirical mean along
    the segment.

    The path integral picks up an integrable log singularity whenever the
    moving translation point crosses a sample value; those crossing
    parameters are passed to the quadrature as mandatory singular points.
    """
    s = as_sample(values)
    if theta_star == theta:
        return 0.0
    if h.antideriv is None:
        raise MissingAntiderivativeError(f"h={h.id!r} declares no antiderivative")
    delta = theta_star - theta

    def T(t: float) -> float:
        return float(np.sum(h.antideriv(s - t))) / s.size

    crossings = set()
    for d in h.singularities:
        for xi in s:
            vi = (xi - theta - d) / delta
            if 0.0 <= vi <= 1.0:
                crossings.add(float(vi))

    def D(v: float) -> float:
        return empirical_h_mean(s, theta + v * delta, h)

    Q = quadrature.integrate(D, 0.0, 1.0, singular_points=sorted(crossings),
                             abs_tol=quad_tol)
    return abs(T(theta_star) - T(theta) - delta * Q)
