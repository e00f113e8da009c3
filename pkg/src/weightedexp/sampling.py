"""Exact random variate generation.

A draw is ``X = Z**(-1/s)`` where ``Z ~ Gamma(mu + B, scale=1/(mu*sigma))``
and ``B ~ Bernoulli(delta/(sigma+delta))``. Gamma variates are produced in
log space so that tiny shapes never underflow to zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .family import FamilySpec, Params

__all__ = ["SeededStream", "as_stream", "sample", "sample_gamma", "log_gamma_variates"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    """Reproducible random stream addressed by ``(master_seed, stream_id)``.

    ``stream_id`` may be an integer or a tuple of integers; tuples address
    nested sub-streams such as ``(cell, replication)``. A stream is a value:
    every call to :meth:`generator` starts from the same state.
    """

    master_seed: int
    stream_id: int | tuple = 0

    def __post_init__(self):
        key = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        for k in (self.master_seed, *key):
            if int(k) != k or not 0 <= int(k) <= _MASK64:
                raise DomainError(f"seeds and stream ids must be unsigned 64-bit integers, got {k!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "stream_id", tuple(int(k) for k in key))

    def spawn(self, *index) -> "SeededStream":
        """Child stream with ``index`` appended to this stream's id."""
        return SeededStream(self.master_seed, self.stream_id + tuple(index))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(seq))


def as_stream(stream) -> SeededStream:
    """Coerce an int seed or ``None`` into a :class:`SeededStream`."""
    if isinstance(stream, SeededStream):
        return stream
    if stream is None:
        return SeededStream(np.random.SeedSequence().entropy & _MASK64)
    return SeededStream(stream)


def log_gamma_variates(rng: np.random.Generator, shape, size=None):
    """Logarithms of standard gamma variates (unit scale).

    Shapes below one use the boost ``G(a) = G(a+1) * U**(1/a)``, taken in
    logs. ``shape`` may be an array broadcastable to ``size``.
    """
    shape = np.asarray(shape, dtype=float)
    if np.any(~(shape > 0)):
        raise DomainError("gamma shape must be positive")
    if size is None:
        size = shape.shape
    shape = np.broadcast_to(shape, size)
    small = shape < 1.0
    out = np.log(rng.standard_gamma(np.where(small, shape + 1.0, shape), size=size))
    if np.any(small):
        u = rng.random(size=size)
        # 1 - u lies in (0, 1], keeping the log finite
        out = np.where(small, out + np.log1p(-u) / shape, out)
    return out


def sample_gamma(shape: float, scale: float, stream, size=None):
    """Draw from Gamma(shape, scale)."""
    if not (shape > 0 and scale > 0):
        raise DomainError(f"gamma shape and scale must be positive, got {shape!r}, {scale!r}")
    rng = as_stream(stream).generator()
    out = scale * np.exp(log_gamma_variates(rng, shape, size))
    return out if np.ndim(out) else float(out)


def sample(spec: FamilySpec, params: Params, n: int, stream) -> np.ndarray:
    """Draw ``n`` variates from the family.

    Examples
    --------
    >>> x = sample(FamilySpec(-1, 0), Params(1.0, 1.0), 5, SeededStream(42))
    >>> x.shape
    (5,)
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    rng = as_stream(stream).generator()
    mu, sigma, delta = params.mu, params.sigma, spec.delta
    if delta:
        shape = mu + (rng.random(n) < delta / (sigma + delta))
    else:
        shape = np.full(n, mu)
    log_z = log_gamma_variates(rng, shape) - math.log(mu * sigma)
    x = np.exp(-log_z / spec.s)
    if not np.all((x > 0) & np.isfinite(x)):
        raise DomainError(f"parameters {params} with s={spec.s} produce variates outside double range")
    return x
