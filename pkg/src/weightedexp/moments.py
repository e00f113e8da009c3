"""Closed-form population moments and the population h-vector."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, MomentUndefined
from .family import FamilySpec, Params, mixture_weights

__all__ = [
    "HVector",
    "digamma",
    "moment",
    "neg_power_log_moment",
    "weighted_log_moment",
    "log_moment",
    "population_h",
]

# Bernoulli-number coefficients B_2k / (2k) of the asymptotic series
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_SHIFT = 10.0


def digamma(z):
    """Digamma function for positive real arguments.

    Arguments below 10 are shifted upward with ``psi(z) = psi(z+1) - 1/z``;
    the asymptotic series is then accurate to ~1e-16 relative.
    """
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)) or np.any(~np.isfinite(z)):
        raise DomainError("digamma is implemented for finite z > 0 only")
    x = z.copy()
    shift = np.zeros_like(x)
    while True:
        low = x < _SHIFT
        if not np.any(low):
            break
        shift = np.where(low, shift + 1.0 / np.where(low, x, 1.0), shift)
        x = np.where(low, x + 1.0, x)
    inv2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_ASYMPTOTIC):
        series = (series + c) * inv2
    out = np.log(x) - 0.5 / x - series - shift
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class HVector:
    """Means of ``h1 = T log T/(1+delta T)``, ``h2 = T log T``, ``h3 = log T``, ``h4 = T``."""

    h1: float
    h2: float
    h3: float
    h4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.h1, self.h2, self.h3, self.h4])

    @classmethod
    def from_array(cls, arr) -> "HVector":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def moment(spec: FamilySpec, params: Params, q: float) -> float:
    """Real moment ``E[X**q]``, defined when ``mu - q/s > 0``."""
    mu, sigma = params.mu, params.sigma
    a = mu - q / spec.s
    if not a > 0:
        raise MomentUndefined(f"E[X^{q}] needs mu - q/s > 0, got {a!r}")
    w1, w2 = mixture_weights(spec, params)
    log_val = (q / spec.s) * math.log(mu * sigma) + gammaln(a) - gammaln(mu)
    return math.exp(log_val) * (w1 + w2 * a / mu)


def neg_power_log_moment(spec: FamilySpec, params: Params, p: float) -> float:
    """``E[X**(-p) * log X]``, defined when ``mu + p/s > 0``."""
    mu, sigma = params.mu, params.sigma
    a = mu + p / spec.s
    if not a > 0:
        raise MomentUndefined(f"E[X^-{p} log X] needs mu + p/s > 0, got {a!r}")
    w1, w2 = mixture_weights(spec, params)
    log_ms = math.log(mu * sigma)
    scale = math.exp(gammaln(a) - (p / spec.s) * log_ms - gammaln(mu))
    psi_a = digamma(a)
    # psi(a + 1) = psi(a) + 1/a
    bracket = w1 * (psi_a - log_ms) + w2 * (a / mu) * (psi_a + 1.0 / a - log_ms)
    return -scale * bracket / spec.s


def log_moment(spec: FamilySpec, params: Params) -> float:
    """``E[log X]`` in the digamma-recurrence form."""
    mu, sigma = params.mu, params.sigma
    w1, _ = mixture_weights(spec, params)
    return -(digamma(mu + 1.0) - math.log(mu * sigma) - w1 / mu) / spec.s


def weighted_log_moment(spec: FamilySpec, params: Params) -> float:
    """``E[T log T / (1 + delta T)]`` with ``T = X**(-s)``."""
    mu, sigma = params.mu, params.sigma
    return (digamma(mu + 1.0) - math.log(mu * sigma)) / (sigma + spec.delta)


def population_h(spec: FamilySpec, params: Params) -> HVector:
    """Population expectations of the four h-statistics.

    Examples
    --------
    >>> population_h(FamilySpec(1, 1), Params(1.0, 1.0)).h4
    1.5
    """
    mu, sigma, delta = params.mu, params.sigma, spec.delta
    h4 = (1.0 + delta / ((sigma + delta) * mu)) / sigma
    h3 = -spec.s * log_moment(spec, params)
    h2 = -spec.s * neg_power_log_moment(spec, params, spec.s)
    h1 = weighted_log_moment(spec, params) if delta else h2
    return HVector(h1, h2, h3, h4)
