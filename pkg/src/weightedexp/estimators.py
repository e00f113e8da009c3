"""Closed-form moment-type estimators, delta-method covariance and an MLE baseline.

With sample means ``h = (h1, h2, h3, h4)`` of the h-statistics,

    C = 1 - delta*h4 + delta*h2 / (delta*h1 + 1)
    D = delta - delta*h3 / (delta*h1 + 1)
    sigma_hat = positive root of  h4*sigma**2 - C*sigma - D = 0
    mu_hat    = (delta*h1 + 1) / (sigma_hat*h2 - h3)

For ``delta = 0`` this reduces to ``sigma_hat = 1/h4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import gammaln
from scipy.stats import norm

from ._validation import check_sample
from .exceptions import EstimationFailed, OptimizationFailed
from .family import FamilySpec, NamedModel, Params, log_generator, to_named
from .moments import HVector, digamma

__all__ = [
    "SampleHStats",
    "EstimateReport",
    "h_statistics",
    "summary_stats",
    "quadratic_coefficients",
    "g1",
    "g2",
    "solve_batch",
    "point_estimate",
    "estimate",
    "asymptotic_covariance",
    "log_likelihood",
    "mle_numeric",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SampleHStats:
    hstats: HVector
    n: int


@dataclass(frozen=True)
class EstimateReport:
    """Point estimates with delta-method covariance and Wald intervals.

    ``covariance``, ``ci_mu`` and ``ci_sigma`` are ``None`` for samples too
    small (``n < 5``) to estimate the h-statistic covariance.
    """

    mu_hat: float
    sigma_hat: float
    n: int
    covariance: np.ndarray | None = None
    ci_level: float = 0.95
    ci_mu: tuple[float, float] | None = None
    ci_sigma: tuple[float, float] | None = None
    native_estimates: dict | None = None
    model: str | None = None

    @property
    def params(self) -> Params:
        return Params(self.mu_hat, self.sigma_hat)

    @property
    def std_errors(self):
        if self.covariance is None:
            return None
        return tuple(np.sqrt(np.diag(self.covariance)))


def h_statistics(x, spec: FamilySpec) -> np.ndarray:
    """Per-observation statistics as an ``(n, 4)`` array (columns h1..h4)."""
    log_t = log_generator(spec, x)
    t = np.exp(log_t)
    h2 = t * log_t
    h1 = h2 / (1.0 + t) if spec.delta else h2
    return np.stack([h1, h2, log_t, t], axis=-1)


def summary_stats(data, spec: FamilySpec) -> SampleHStats:
    """Sample means of the four h-statistics."""
    x = check_sample(data, min_size=2)
    means = h_statistics(x, spec).mean(axis=0)
    if not spec.delta:
        means[0] = means[1]
    return SampleHStats(HVector.from_array(means), x.size)


def quadratic_coefficients(h, delta: int):
    """``(C, D)`` of the sigma quadratic ``h4*sigma**2 - C*sigma - D = 0``.

    ``h`` is an array whose last axis holds (h1, h2, h3, h4).
    """
    h = np.asarray(h, dtype=float)
    h1, h2, h3, h4 = np.moveaxis(h, -1, 0)
    denom = delta * h1 + 1.0
    c = 1.0 - delta * h4 + delta * h2 / denom
    d = delta - delta * h3 / denom
    return c, d


def _sigma_kernel(h, delta):
    """Vectorized positive root; returns (sigma, discriminant, denom)."""
    h = np.asarray(h, dtype=float)
    h4 = h[..., 3]
    denom = delta * h[..., 0] + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c, d = quadratic_coefficients(h, delta)
        disc = c * c + 4.0 * h4 * d
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
        # avoid cancellation when C < 0 by using the conjugate form
        sigma = np.where(c >= 0, (c + root) / (2.0 * h4), 2.0 * d / (root - c))
    return sigma, disc, denom


def _mu_kernel(h, sigma, delta):
    h = np.asarray(h, dtype=float)
    den = sigma * h[..., 1] - h[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = (delta * h[..., 0] + 1.0) / den
    return mu, den


def g1(hvec, delta: int) -> float:
    """Map an h-vector to sigma (the positive root of the sigma quadratic)."""
    h = hvec.as_array() if isinstance(hvec, HVector) else np.asarray(hvec, dtype=float)
    if not h[3] > 0:
        raise EstimationFailed(f"h4 must be positive, got {h[3]!r}", "h4", float(h[3]))
    sigma, disc, denom = _sigma_kernel(h, delta)
    if delta and denom == 0:
        raise EstimationFailed("delta*h1 + 1 vanishes", "h1", float(denom))
    if not disc >= 0:
        raise EstimationFailed(f"negative discriminant {float(disc)!r} in the sigma quadratic",
                               "discriminant", float(disc))
    if not sigma > 0:
        raise EstimationFailed(f"sigma root is not positive: {float(sigma)!r}", "sigma", float(sigma))
    return float(sigma)


def g2(hvec, sigma: float, delta: int) -> float:
    """Map an h-vector and sigma to mu."""
    h = hvec.as_array() if isinstance(hvec, HVector) else np.asarray(hvec, dtype=float)
    mu, den = _mu_kernel(h, sigma, delta)
    if not den > 0:
        raise EstimationFailed(f"mu denominator sigma*h2 - h3 = {float(den)!r} is not positive",
                               "mu_denominator", float(den))
    return float(mu)


def solve_batch(h, delta: int):
    """Estimate (mu, sigma) for many h-vectors at once.

    ``h`` has shape ``(..., 4)``. Returns ``(mu, sigma, ok)``; entries where
    ``ok`` is false failed one of the conditions enforced by :func:`g1` and
    :func:`g2` and hold NaN. Successful entries are bit-identical to the
    scalar path.
    """
    h = np.asarray(h, dtype=float)
    sigma, disc, denom = _sigma_kernel(h, delta)
    mu, den = _mu_kernel(h, sigma, delta)
    ok = (h[..., 3] > 0) & (disc >= 0) & (sigma > 0) & (den > 0) & np.isfinite(mu) & np.isfinite(sigma)
    if delta:
        ok &= denom != 0
    return np.where(ok, mu, np.nan), np.where(ok, sigma, np.nan), ok


def _g_pair(h, delta):
    """(g2, g1) at h without raising; NaN on failure. Used for Jacobians."""
    mu, sigma, _ = solve_batch(h, delta)
    return np.stack([mu, sigma], axis=-1)


def jacobian(hbar, delta: int, method: str = "central") -> np.ndarray:
    """Finite-difference Jacobian of ``h -> (mu, sigma)`` at ``hbar`` (2x4)."""
    hbar = np.asarray(hbar, dtype=float)
    if method == "central":
        step = _EPS ** (1.0 / 3.0) * np.maximum(1.0, np.abs(hbar))
    elif method == "forward":
        step = math.sqrt(_EPS) * np.maximum(1.0, np.abs(hbar))
    else:
        raise ValueError(f"unknown differencing method {method!r}")
    eye = np.diag(step)
    if method == "central":
        up = _g_pair(hbar + eye, delta)
        down = _g_pair(hbar - eye, delta)
        jac = (up - down) / (2.0 * step)[:, None]
    else:
        base = _g_pair(hbar, delta)
        jac = (_g_pair(hbar + eye, delta) - base) / step[:, None]
    if not np.all(np.isfinite(jac)):
        raise EstimationFailed("estimator map is undefined next to the sample means", "jacobian")
    return jac.T


def asymptotic_covariance(data, spec: FamilySpec, mu_hat=None, sigma_hat=None) -> np.ndarray:
    """Delta-method covariance ``A Sigma A^T / n`` of ``(mu_hat, sigma_hat)``.

    ``Sigma`` is the sample covariance of the per-observation h-statistics
    and ``A`` the Jacobian of the estimator map at the sample means. The
    point estimates are accepted for interface symmetry and checked against
    the map's value at the means when given.
    """
    x = check_sample(data, min_size=5)
    h = h_statistics(x, spec)
    hbar = h.mean(axis=0)
    if not spec.delta:
        hbar[0] = hbar[1]
    if mu_hat is not None and sigma_hat is not None:
        mu_chk, sigma_chk, ok = solve_batch(hbar, spec.delta)
        if not ok or not (math.isclose(mu_chk, mu_hat, rel_tol=1e-9)
                          and math.isclose(sigma_chk, sigma_hat, rel_tol=1e-9)):
            raise EstimationFailed("point estimates do not match the sample means", "inconsistent")
    jac = jacobian(hbar, spec.delta)
    cov_h = np.cov(h, rowvar=False)
    cov = jac @ cov_h @ jac.T / x.size
    return 0.5 * (cov + cov.T)


def _wald(center, var, level):
    z = norm.ppf(0.5 + level / 2.0)
    half = z * math.sqrt(max(var, 0.0))
    return (center - half, center + half)


def point_estimate(data, spec: FamilySpec) -> tuple[float, float]:
    """``(mu_hat, sigma_hat)`` without covariance or intervals."""
    stats = summary_stats(data, spec)
    sigma_hat = g1(stats.hstats, spec.delta)
    return g2(stats.hstats, sigma_hat, spec.delta), sigma_hat


def estimate(data, spec: FamilySpec, named: NamedModel | str | None = None, ci_level: float = 0.95) -> EstimateReport:
    """Closed-form moment-type estimates of ``(mu, sigma)``.

    Parameters
    ----------
    data : array_like
        Positive observations.
    spec : FamilySpec
    named : NamedModel or str, optional
        When given, native-parameter estimates are attached.
    ci_level : float
        Level of the Wald intervals.
    """
    if not 0.0 < ci_level < 1.0:
        raise ValueError(f"ci_level must lie in (0, 1), got {ci_level!r}")
    x = check_sample(data, min_size=2)
    mu_hat, sigma_hat = point_estimate(x, spec)
    cov = ci_mu = ci_sigma = None
    if x.size >= 5:
        cov = asymptotic_covariance(x, spec)
        ci_mu = _wald(mu_hat, cov[0, 0], ci_level)
        ci_sigma = _wald(sigma_hat, cov[1, 1], ci_level)
    native = name = None
    if named is not None:
        name = named.name if isinstance(named, NamedModel) else named
        native = {k: float(v) for k, v in to_named(name, spec, (mu_hat, sigma_hat), strict=False).items()}
    return EstimateReport(mu_hat, sigma_hat, x.size, cov, ci_level, ci_mu, ci_sigma, native, name)


# ---------------------------------------------------------------------------
# Numerical maximum likelihood (comparison baseline)
# ---------------------------------------------------------------------------

def _loglik_terms(x, spec):
    log_t = log_generator(spec, x)
    t = np.exp(log_t)
    const = math.log(abs(spec.s)) - np.mean(np.log(x))
    if spec.delta:
        const += np.mean(np.log1p(t))
    return float(np.mean(t)), float(np.mean(log_t)), float(const)


def _mean_loglik(mu, sigma, delta, t_bar, logt_bar, const):
    return ((mu + 1.0) * math.log(mu * sigma) - math.log(sigma + delta) - gammaln(mu + 1.0)
            - mu * sigma * t_bar + mu * logt_bar + const)


def log_likelihood(data, spec: FamilySpec, params: Params) -> float:
    """Total log-likelihood of the sample."""
    x = check_sample(data, min_size=1)
    return x.size * _mean_loglik(params.mu, params.sigma, spec.delta, *_loglik_terms(x, spec))


def mle_numeric(data, spec: FamilySpec, init: Params | None = None, maxiter: int = 500) -> Params:
    """Maximize the likelihood over ``(log mu, log sigma)`` with BFGS.

    The mean log-likelihood depends on the data only through the means of
    ``T``, ``log T`` and a parameter-free constant, so each evaluation is
    O(1). Starts from the moment-type estimates unless ``init`` is given.
    """
    x = check_sample(data, min_size=2)
    delta = spec.delta
    t_bar, logt_bar, const = _loglik_terms(x, spec)
    if init is None:
        try:
            init = Params(*point_estimate(x, spec))
        except EstimationFailed:
            init = Params(1.0, 1.0 / t_bar)

    def objective(theta):
        mu, sigma = np.exp(theta)
        val = _mean_loglik(mu, sigma, delta, t_bar, logt_bar, const)
        d_mu = math.log(mu * sigma) + (mu + 1.0) / mu - digamma(mu + 1.0) - sigma * t_bar + logt_bar
        d_sigma = (mu + 1.0) / sigma - 1.0 / (sigma + delta) - mu * t_bar
        return -val, -np.array([mu * d_mu, sigma * d_sigma])

    theta0 = np.log([init.mu, init.sigma])
    with np.errstate(over="ignore", invalid="ignore"):
        res = optimize.minimize(objective, theta0, jac=True, method="BFGS",
                                options={"gtol": 1e-8, "xrtol": 1e-10, "maxiter": maxiter})
    mu, sigma = np.exp(res.x)
    last = Params(mu, sigma) if np.all(np.isfinite(res.x)) else None
    grad_norm = float(np.linalg.norm(res.jac)) if np.all(np.isfinite(res.jac)) else math.inf
    # BFGS reports precision loss once it sits on the optimum; accept small gradients
    if res.status == 1 or last is None or (not res.success and grad_norm > 1e-6):
        raise OptimizationFailed(f"likelihood maximization did not converge: {res.message}", last=last)
    return last

