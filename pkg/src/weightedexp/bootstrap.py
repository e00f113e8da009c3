"""Bootstrap bias reduction of the closed-form estimators.

For raw estimates ``theta_hat`` and replicate fits ``theta_b`` the reduced
estimate is ``2*theta_hat - mean(theta_b)``, taken over the replicates that
could be fitted. All B resamples of one call are drawn from a single
generator and fitted in one vectorized pass.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_sample
from .estimators import h_statistics, solve_batch
from .exceptions import BootstrapDegenerate, EstimationFailed
from .family import FamilySpec, NamedModel, Params, to_named
from .sampling import as_stream, sample

__all__ = ["BootstrapConfig", "BiasReducedEstimate", "bootstrap_bias_reduce", "min_successes"]

SCHEMES = ("nonparametric", "parametric")


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 200
    scheme: str = "nonparametric"
    stream: object = None

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise ValueError(f"B must be a positive integer, got {self.B!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "stream", as_stream(self.stream))


@dataclass(frozen=True)
class BiasReducedEstimate:
    """Raw and bias-reduced estimates, in ``names`` order."""

    names: tuple[str, ...]
    raw: np.ndarray
    reduced: np.ndarray
    replicate_mean: np.ndarray
    replicates_used: int
    failures: int

    @property
    def has_negative(self) -> bool:
        """True when the correction pushed some estimate to zero or below."""
        return bool(np.any(self.reduced <= 0))

    def as_dict(self) -> dict:
        return {name: float(v) for name, v in zip(self.names, self.reduced)}


def min_successes(B: int) -> int:
    """Smallest number of fitted replicates accepted out of ``B``."""
    return min(B, max(10, -(-B // 4)))


def _uniform_indices(rng, n, B):
    return rng.integers(0, n, size=(B, n))


def _native(named, spec, mu, sigma):
    if named is None:
        return ("mu", "sigma"), np.stack([mu, sigma], axis=-1)
    name = named.name if isinstance(named, NamedModel) else named
    native = to_named(name, spec, (mu, sigma), strict=False)
    names = tuple(native)
    return names, np.stack([np.broadcast_to(native[k], np.shape(mu)) for k in names], axis=-1)


def bootstrap_bias_reduce(data, spec: FamilySpec, config: BootstrapConfig | None = None,
                          named=None, resampler=None) -> BiasReducedEstimate:
    """Bootstrap bias-reduced moment-type estimates.

    Parameters
    ----------
    data : array_like
        Positive observations.
    spec : FamilySpec
    config : BootstrapConfig, optional
        Defaults to B=200 nonparametric resamples.
    named : NamedModel or str, optional
        Apply the correction to this model's native parameters instead of
        ``(mu, sigma)``.
    resampler : callable, optional
        ``resampler(rng, n, B) -> (B, n) int array`` of row indices; replaces
        uniform resampling in the nonparametric scheme.

    Raises
    ------
    EstimationFailed
        The original sample cannot be fitted.
    BootstrapDegenerate
        Fewer than ``min_successes(B)`` replicates could be fitted.
    """
    config = config or BootstrapConfig()
    x = check_sample(data, min_size=2)
    h = h_statistics(x, spec)
    hbar = h.mean(axis=0)
    if not spec.delta:
        hbar[0] = hbar[1]
    mu, sigma, ok = solve_batch(hbar, spec.delta)
    if not ok:
        raise EstimationFailed("closed-form estimates do not exist for this sample", "raw")
    names, raw = _native(named, spec, mu, sigma)

    rng = config.stream.generator()
    n, B = x.size, config.B
    if config.scheme == "nonparametric":
        idx = (resampler or _uniform_indices)(rng, n, B)
        h_boot = h[idx].mean(axis=1)
    else:
        draws = sample(spec, Params(float(mu), float(sigma)), n * B, config.stream.spawn(0))
        h_boot = h_statistics(draws.reshape(B, n), spec).mean(axis=1)
    if not spec.delta:
        h_boot[:, 0] = h_boot[:, 1]
    mu_b, sigma_b, ok_b = solve_batch(h_boot, spec.delta)
    used = int(ok_b.sum())
    if used < min_successes(B):
        raise BootstrapDegenerate(
            f"only {used} of {B} bootstrap replicates could be fitted", "bootstrap", used
        )
    _, reps = _native(named, spec, mu_b[ok_b], sigma_b[ok_b])
    rep_mean = reps.mean(axis=0)
    reduced = 2.0 * raw - rep_mean
    out = BiasReducedEstimate(names, raw, reduced, rep_mean, used, B - used)
    if out.has_negative:
        warnings.warn("bias correction produced a non-positive estimate", RuntimeWarning, stacklevel=2)
    return out
