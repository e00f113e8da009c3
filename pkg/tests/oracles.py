"""Independent reference computations used only by the tests."""
import math

import mpmath as mp
import numpy as np
from scipy import integrate, special

from weightedexp.family import density

GRID_S = (-2.0, -1.0, 1.0, 2.0)
GRID_DELTA = (0, 1)
GRID_MU = (0.5, 1.0, 3.0, 9.0)
GRID_SIGMA = (0.25, 1.0, 4.0)


def family_grid():
    for s in GRID_S:
        for d in GRID_DELTA:
            for mu in GRID_MU:
                for sigma in GRID_SIGMA:
                    yield s, d, mu, sigma


def expect(spec, params, g=None, f=density):
    """``E[g(X)]`` by adaptive quadrature in ``u = log T(x) = -s log x``.

    The integrand ``g(x) f(x) dx/du`` decays like a log-gamma density in
    ``u``, so the two half-lines on each side of ``u0 = -log(sigma)`` are
    handled well by QUADPACK's infinite-interval transform.
    """
    s = spec.s

    def integrand(u):
        x = math.exp(-u / s) if abs(u / s) < 700 else (0.0 if -u / s < 0 else math.inf)
        if not (0.0 < x < math.inf):
            return 0.0
        val = f(spec, params, x) * x / abs(s)
        return val if (g is None or val == 0.0) else val * g(x)

    u0 = -math.log(params.sigma)
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=500)
    left, _ = integrate.quad(integrand, -np.inf, u0, **opts)
    right, _ = integrate.quad(integrand, u0, np.inf, **opts)
    return left + right


def density_mp(s, delta, mu, sigma, x, dps=50):
    """The family density evaluated term by term in arbitrary precision."""
    with mp.workdps(dps):
        s, mu, sigma, x = mp.mpf(s), mp.mpf(mu), mp.mpf(sigma), mp.mpf(x)
        t = x ** (-s)
        abs_dt = abs(-s * x ** (-s - 1))
        val = ((mu * sigma) ** (mu + 1) / ((sigma + delta) * mp.gamma(mu + 1))
               * (1 + delta * t) * abs_dt / t * mp.exp(-mu * sigma * t + mu * mp.log(t)))
        return val


def gamma_cdf(x, shape, scale):
    """Regularized lower incomplete gamma, independent of the sampler."""
    return special.gammainc(shape, np.asarray(x) / scale)
