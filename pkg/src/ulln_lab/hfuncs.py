"""Registry of summand functions h with derivative, antiderivative and
tail-envelope metadata.

Built-in entries:

* ``signlog``    sign(y) * log|y|   -- blows up at 0; the flagship case.
* ``identity``   y                  -- bounded near 0; smooth control.
* ``reciprocal`` 1/y                -- non-integrable at 0; negative control
                                       used to exercise audit failures.

Each entry is total away from its singular set; evaluation at a singular
point raises, and callers are expected to guard with the indicator used by
the empirical sums.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np


class SingularityError(ValueError):
    """h evaluated at a point of its singular set."""


class MissingAntiderivativeError(ValueError):
    """Operation requires an antiderivative the entry does not declare."""


@dataclass(frozen=True)
class EnvelopeParams:
    """Tail-domination parameters (gamma, beta0, p, alpha0, C).

    gamma bounds the translation range, beta0 > gamma marks where tail
    control starts, p and C parameterize the exponential tail bound
    C * exp(-|t|^p), and alpha0 sizes the neighborhood of 0 used by the
    local integrability checks.
    """

    gamma: float
    beta0: float
    p: float = 1.0
    alpha0: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "beta0", "p", "alpha0", "C"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be strictly positive")
        if not (self.beta0 > self.gamma):
            raise ValueError(f"beta0 must exceed gamma, got beta0={self.beta0} "
                             f"<= gamma={self.gamma}")


def flagship_envelope(sigma: float) -> EnvelopeParams:
    """Default envelope for the flagship instance at scale sigma.

    gamma = 8 sigma is forced by the median tail-bound regime; beta0 is the
    smallest value > max(1, gamma) that keeps the tail checks valid; p = 1
    and C = 1 match the exact median bound; alpha0 = 1 (any positive value
    works for the local checks).
    """
    gamma = 8.0 * sigma
    return EnvelopeParams(gamma=gamma, beta0=max(1.0, gamma + 1.0), p=1.0,
                          alpha0=1.0, C=1.0)


@dataclass(frozen=True)
class HSpec:
    id: str
    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    antideriv: Optional[Callable[[np.ndarray], np.ndarray]]
    singularities: tuple[float, ...]
    blows_up_at_zero: bool
    # |h| monotone on each tail beyond beta0; required for the boundary
    # construction used by envelope_m.  Checkers fall back to grid
    # maximization (flagged approximate) when False.
    tail_monotone: bool = True
    envelope: Optional[EnvelopeParams] = None

    def with_envelope(self, env: EnvelopeParams) -> "HSpec":
        return replace(self, envelope=env)


def _as_array(y) -> tuple[np.ndarray, bool]:
    scalar = np.isscalar(y) or (isinstance(y, np.ndarray) and y.ndim == 0)
    return np.atleast_1d(np.asarray(y, dtype=float)), scalar


def _check_not_singular(h: HSpec, ya: np.ndarray) -> None:
    for s in h.singularities:
        if np.any(ya == s):
            raise SingularityError(f"h={h.id!r} is singular at {s}")


def eval_h(h: HSpec, y):
    """h(y); raises SingularityError on the singular set."""
    ya, scalar = _as_array(y)
    _check_not_singular(h, ya)
    out = h.func(ya)
    return float(out[0]) if scalar else out


def eval_h_prime(h: HSpec, y):
    """h'(y); raises SingularityError on the singular set."""
    ya, scalar = _as_array(y)
    _check_not_singular(h, ya)
    out = h.deriv(ya)
    return float(out[0]) if scalar else out


def eval_antideriv(h: HSpec, y):
    """G(y) with G' = -h away from singular points (continuous through them)."""
    if h.antideriv is None:
        raise MissingAntiderivativeError(f"h={h.id!r} declares no antiderivative")
    ya, scalar = _as_array(y)
    out = h.antideriv(ya)
    return float(out[0]) if scalar else out


def envelope_m(h: HSpec, x):
    """Boundary dominator |h(x-gamma)| 1{|x-gamma|>=beta0} + |h(x+gamma)| 1{|x+gamma|>=beta0}.

    Dominates sup over |t| <= gamma of |h(x - t)| 1{|x - t| >= beta0} whenever
    |h| is monotone on each tail; the indicators keep every evaluation away
    from the singular set since beta0 > 0.
    """
    if h.envelope is None:
        raise ValueError(f"h={h.id!r} has no envelope parameters")
    env = h.envelope
    xa, scalar = _as_array(x)
    out = np.zeros_like(xa, dtype=float)
    for shift in (-env.gamma, env.gamma):
        arg = xa + shift
        mask = np.abs(arg) >= env.beta0
        if np.any(mask):
            out[mask] += np.abs(h.func(arg[mask]))
    return float(out[0]) if scalar else out


# --- built-in entries -------------------------------------------------------

def _signlog(y):
    out = np.empty_like(y)
    nz = y != 0
    out[nz] = np.sign(y[nz]) * np.log(np.abs(y[nz]))
    out[~nz] = np.nan
    return out


def _signlog_deriv(y):
    return 1.0 / np.abs(y)


def _signlog_antideriv(y):
    # |y| (1 - log|y|), extended by continuity with value 0 at y = 0.
    out = np.zeros_like(y)
    nz = y != 0
    ay = np.abs(y[nz])
    out[nz] = ay * (1.0 - np.log(ay))
    return out


_DEFAULT_ENVELOPE = flagship_envelope(1.0)

_REGISTRY: dict[str, HSpec] = {
    "signlog": HSpec(
        id="signlog",
        func=_signlog,
        deriv=_signlog_deriv,
        antideriv=_signlog_antideriv,
        singularities=(0.0,),
        blows_up_at_zero=True,
        tail_monotone=True,
        envelope=_DEFAULT_ENVELOPE,
    ),
    "identity": HSpec(
        id="identity",
        func=lambda y: y.copy(),
        deriv=lambda y: np.ones_like(y),
        antideriv=lambda y: -0.5 * y * y,
        singularities=(),
        blows_up_at_zero=False,
        tail_monotone=True,
        envelope=_DEFAULT_ENVELOPE,
    ),
    "reciprocal": HSpec(
        id="reciprocal",
        func=lambda y: 1.0 / y,
        deriv=lambda y: -1.0 / (y * y),
        # -log|y| has no continuous extension through 0, so no antiderivative
        # is declared; this entry exists to exercise audit failures.
        antideriv=None,
        singularities=(0.0,),
        blows_up_at_zero=True,
        tail_monotone=True,
        envelope=_DEFAULT_ENVELOPE,
    ),
}


def available_h_ids() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def get_h(h_id: str, *, sigma: float | None = None) -> HSpec:
    """Look up an entry by id; with sigma given, rebind the default envelope
    to the scale-matched one (gamma = 8 sigma)."""
    try:
        h = _REGISTRY[h_id]
    except KeyError:
        raise KeyError(f"unknown h id {h_id!r}; known: {available_h_ids()}") from None
    if sigma is not None:
        h = h.with_envelope(flagship_envelope(sigma))
    return h


def sign_condition(h: HSpec, u):
    """-sign(u) sign(h(u)) h'(u); must be <= 0 on the tails for valid entries."""
    ua, scalar = _as_array(u)
    _check_not_singular(h, ua)
    out = -np.sign(ua) * np.sign(h.func(ua)) * h.deriv(ua)
    return float(out[0]) if scalar else out
