"""scikit-learn compatible wrappers.

``WeightedExpFamily`` fits ``(mu, sigma)`` by the closed-form moment-type
estimator (optionally bootstrap bias-reduced) or by numerical maximum
likelihood, and then behaves like a density estimator: ``score_samples``,
``score`` and ``sample``. ``HStatistics`` is a stateless transformer that
maps observations to the four h-statistics.
"""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_sample
from .bootstrap import BootstrapConfig, bootstrap_bias_reduce
from .estimators import estimate, h_statistics, mle_numeric
from .family import FamilySpec, Params, log_density
from .sampling import SeededStream, as_stream, sample

__all__ = ["WeightedExpFamily", "HStatistics"]


def _seed_from(random_state):
    if random_state is None or isinstance(random_state, (int, np.integer)):
        return as_stream(None if random_state is None else int(random_state))
    if isinstance(random_state, SeededStream):
        return random_state
    if isinstance(random_state, np.random.Generator):
        return SeededStream(int(random_state.integers(0, 2**63)))
    raise ValueError(f"random_state must be None, an int, a SeededStream or a Generator, got {random_state!r}")


class WeightedExpFamily(BaseEstimator):
    """Weighted exponential family with generator ``T(x) = x**(-s)``.

    Parameters
    ----------
    s : float, default=1.0
        Generator power; nonzero.
    delta : {0, 1}, default=1
        1 for the weighted members, 0 for the classical ones.
    method : {"moments", "mle"}, default="moments"
    n_bootstrap : int, default=0
        With ``method="moments"`` and a positive value, the fitted
        parameters are the bootstrap bias-reduced estimates.
    bootstrap_scheme : {"nonparametric", "parametric"}, default="nonparametric"
    ci_level : float, default=0.95
    random_state : int, SeededStream or None

    Attributes
    ----------
    mu_, sigma_ : float
        Fitted parameters.
    covariance_ : ndarray of shape (2, 2) or None
        Delta-method covariance of the raw moment-type estimates.
    report_ : EstimateReport
    bootstrap_ : BiasReducedEstimate or None
    n_samples_ : int

    Examples
    --------
    >>> from weightedexp import WeightedExpFamily
    >>> est = WeightedExpFamily(s=1, delta=1, random_state=0)
    >>> X = est.fit([0.4, 0.9, 1.3, 0.7, 2.2, 0.5]).sample(3)
    >>> X.shape
    (3, 1)
    """

    def __init__(self, s=1.0, delta=1, method="moments", n_bootstrap=0,
                 bootstrap_scheme="nonparametric", ci_level=0.95, random_state=None):
        self.s = s
        self.delta = delta
        self.method = method
        self.n_bootstrap = n_bootstrap
        self.bootstrap_scheme = bootstrap_scheme
        self.ci_level = ci_level
        self.random_state = random_state

    @property
    def spec_(self) -> FamilySpec:
        return FamilySpec(self.s, self.delta)

    @property
    def params_(self) -> Params:
        check_is_fitted(self, ("mu_", "sigma_"))
        return Params(self.mu_, self.sigma_)

    def fit(self, X, y=None):
        if self.method not in ("moments", "mle"):
            raise ValueError(f"method must be 'moments' or 'mle', got {self.method!r}")
        x = check_sample(X, min_size=2)
        spec = FamilySpec(self.s, self.delta)
        self.report_ = estimate(x, spec, ci_level=self.ci_level)
        self.covariance_ = self.report_.covariance
        self.bootstrap_ = None
        mu, sigma = self.report_.mu_hat, self.report_.sigma_hat
        if self.method == "mle":
            p = mle_numeric(x, spec, init=self.report_.params)
            mu, sigma = p.mu, p.sigma
        elif self.n_bootstrap:
            cfg = BootstrapConfig(self.n_bootstrap, self.bootstrap_scheme, _seed_from(self.random_state))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                self.bootstrap_ = bootstrap_bias_reduce(x, spec, cfg)
            if self.bootstrap_.has_negative:
                raise ValueError("bias-reduced estimates are not positive; refit with n_bootstrap=0")
            mu, sigma = (float(v) for v in self.bootstrap_.reduced)
        self.mu_, self.sigma_ = mu, sigma
        self.n_samples_ = x.size
        return self

    def score_samples(self, X):
        """Log density of each observation."""
        return np.atleast_1d(log_density(self.spec_, self.params_, check_sample(X)))

    def score(self, X, y=None):
        """Mean log-likelihood of ``X``."""
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        """Draw an ``(n_samples, 1)`` array from the fitted distribution."""
        stream = _seed_from(self.random_state if random_state is None else random_state)
        return sample(self.spec_, self.params_, n_samples, stream)[:, None]


class HStatistics(TransformerMixin, BaseEstimator):
    """Map positive observations to the columns ``(h1, h2, h3, h4)``."""

    def __init__(self, s=1.0, delta=1):
        self.s = s
        self.delta = delta

    def fit(self, X, y=None):
        check_sample(X)
        FamilySpec(self.s, self.delta)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return h_statistics(check_sample(X), FamilySpec(self.s, self.delta))

    def get_feature_names_out(self, input_features=None):
        return np.array(["h1", "h2", "h3", "h4"], dtype=object)
