"""Weighted exponential family with power generators.

Every member is indexed by a generator power ``s`` and an indicator
``delta``. The generator is ``T(x) = x**(-s)``, so a distribution whose
generator is written ``x**k`` has ``s = -k``. ``delta = 1`` selects the
weighted (Lindley-type) members, ``delta = 0`` the classical ones.

The density is

    f(x) = (mu*sigma)**(mu+1) / ((sigma+delta) * Gamma(mu+1))
           * (1 + delta*T(x)) * |s|/x * exp(-mu*sigma*T(x)) * T(x)**mu

and splits into a two-component mixture of generalized gamma laws with
weights ``sigma/(sigma+delta)`` and ``delta/(sigma+delta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, NamedMismatch, UnknownModel

__all__ = [
    "FamilySpec",
    "Params",
    "NamedModel",
    "NAMED_MODELS",
    "density",
    "log_density",
    "mixture_weights",
    "component_density",
    "log_generator",
    "from_named",
    "to_named",
    "named_spec",
]


@dataclass(frozen=True)
class FamilySpec:
    """Generator power ``s`` (``T(x) = x**(-s)``) and weighting indicator ``delta``."""

    s: float
    delta: int

    def __post_init__(self):
        s = float(self.s)
        if not math.isfinite(s) or s == 0.0:
            raise DomainError(f"generator power s must be finite and non-zero, got {self.s!r}")
        if self.delta not in (0, 1) or isinstance(self.delta, bool):
            raise DomainError(f"delta must be 0 or 1, got {self.delta!r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "delta", int(self.delta))


@dataclass(frozen=True)
class Params:
    """The parameter pair ``(mu, sigma)``, both strictly positive."""

    mu: float
    sigma: float

    def __post_init__(self):
        for name in ("mu", "sigma"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be a positive finite real, got {getattr(self, name)!r}")
            object.__setattr__(self, name, value)


def _as_positive(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(~np.isfinite(arr)):
        raise DomainError("density is defined for finite x > 0 only")
    return arr


def log_generator(spec: FamilySpec, x):
    """Return ``log T(x) = -s * log(x)``."""
    return -spec.s * np.log(x)


def log_density(spec: FamilySpec, params: Params, x):
    """Log of the family density, evaluated without leaving log space.

    Accepts a scalar or an array of positive reals and returns the same shape.
    """
    x = _as_positive(x)
    mu, sigma, delta = params.mu, params.sigma, spec.delta
    log_t = log_generator(spec, x)
    with np.errstate(over="ignore"):
        t = np.exp(log_t)
    norm = (mu + 1.0) * math.log(mu * sigma) - math.log(sigma + delta) - gammaln(mu + 1.0)
    out = norm + math.log(abs(spec.s)) - np.log(x) - mu * sigma * t + mu * log_t
    if delta:
        # log(1 + T) without overflow; -inf from the exponential term must win
        out = out + np.logaddexp(0.0, log_t)
    return out if out.ndim else float(out)


def density(spec: FamilySpec, params: Params, x):
    """Family density ``f(x; mu, sigma)`` for ``x > 0``."""
    return np.exp(log_density(spec, params, x))


def mixture_weights(spec: FamilySpec, params: Params) -> tuple[float, float]:
    """Weights of the two gamma-type components."""
    total = params.sigma + spec.delta
    return params.sigma / total, spec.delta / total


def component_density(spec: FamilySpec, params: Params, j: int, x):
    """Density of mixture component ``j`` (1 or 2).

    Component ``j`` is the law of ``Z**(-1/s)`` with
    ``Z ~ Gamma(mu + j - 1, scale=1/(mu*sigma))``.
    """
    if j not in (1, 2):
        raise DomainError(f"component index must be 1 or 2, got {j!r}")
    x = _as_positive(x)
    shape = params.mu + j - 1.0
    rate = params.mu * params.sigma
    log_t = log_generator(spec, x)
    with np.errstate(over="ignore"):
        t = np.exp(log_t)
    out = (shape * math.log(rate) - gammaln(shape) + math.log(abs(spec.s)) - np.log(x)
           - rate * t + shape * log_t)
    out = np.exp(out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Named distributions
# ---------------------------------------------------------------------------

def _pos(v):
    return v > 0


@dataclass(frozen=True)
class _NamedRow:
    name: str
    delta: int
    param_names: tuple[str, ...]
    # native -> (s, mu, sigma)
    forward: Callable[[Mapping[str, float]], tuple[float, float, float]]
    # (s, mu, sigma) -> native; must accept numpy arrays for mu and sigma
    backward: Callable[[float, object, object], dict]
    constraints: Mapping[str, Callable[[float], bool]] = field(default_factory=dict)
    # native parameters that decide s; the rest only move (mu, sigma)
    spec_params: tuple[str, ...] = ()
    fixed_s: float | None = None

    def check(self, native):
        for key in self.param_names:
            value = native[key]
            ok = self.constraints.get(key, _pos)
            if not (math.isfinite(value) and ok(value)):
                raise DomainError(f"{self.name}: parameter {key}={value!r} violates its constraint")


def _lindley(name, s):
    return _NamedRow(
        name, 1, ("lambda", "phi"),
        lambda p: (s, p["phi"], p["lambda"] / p["phi"]),
        lambda s_, mu, sigma: {"lambda": mu * sigma, "phi": mu},
        fixed_s=s,
    )


def _nakagami(name, s, delta):
    return _NamedRow(
        name, delta, ("m", "omega"),
        lambda p: (s, p["m"], 1.0 / p["omega"]),
        lambda s_, mu, sigma: {"m": mu, "omega": 1.0 / sigma},
        constraints={"m": lambda v: v >= 0.5, "omega": _pos},
        fixed_s=s,
    )


def _shape_scale(name, s):
    # gamma-type rows: mu = alpha, sigma = 1/(alpha*beta)
    return _NamedRow(
        name, 0, ("alpha", "beta"),
        lambda p: (s, p["alpha"], 1.0 / (p["alpha"] * p["beta"])),
        lambda s_, mu, sigma: {"alpha": mu, "beta": 1.0 / (mu * sigma)},
        fixed_s=s,
    )


def _weibull(name, sign):
    # T(x) = x**(sign*k); mu = 1, sigma = beta**(-k)
    return _NamedRow(
        name, 0, ("k", "beta"),
        lambda p: (-sign * p["k"], 1.0, p["beta"] ** (-p["k"])),
        lambda s_, mu, sigma: {"k": -sign * s_, "beta": sigma ** (sign * 1.0 / s_)},
        spec_params=("k",),
    )


def _generalized_gamma(name, sign):
    # T(x) = x**(sign*k); mu = alpha/k, sigma = k/(alpha*beta**k)
    return _NamedRow(
        name, 0, ("alpha", "k", "beta"),
        lambda p: (-sign * p["k"], p["alpha"] / p["k"], p["k"] / (p["alpha"] * p["beta"] ** p["k"])),
        lambda s_, mu, sigma: {
            "alpha": mu * (-sign * s_),
            "k": -sign * s_,
            "beta": (mu * sigma) ** (sign * 1.0 / s_),
        },
        spec_params=("k",),
    )


_ROWS = [
    _lindley("weighted_lindley", -1.0),
    _lindley("weighted_inverse_lindley", 1.0),
    _nakagami("weighted_nakagami", -2.0, 1),
    _nakagami("weighted_inverse_nakagami", 2.0, 1),
    _nakagami("nakagami", -2.0, 0),
    _NamedRow(
        "maxwell_boltzmann", 0, ("beta",),
        lambda p: (-2.0, 1.5, 1.0 / (3.0 * p["beta"] ** 2)),
        lambda s_, mu, sigma: {"beta": np.sqrt(1.0 / (3.0 * sigma))},
        fixed_s=-2.0,
    ),
    _NamedRow(
        "rayleigh", 0, ("beta",),
        lambda p: (-2.0, 1.0, 1.0 / (2.0 * p["beta"] ** 2)),
        lambda s_, mu, sigma: {"beta": np.sqrt(1.0 / (2.0 * sigma))},
        fixed_s=-2.0,
    ),
    _shape_scale("gamma", -1.0),
    _shape_scale("inverse_gamma", 1.0),
    _NamedRow(
        "delta_gamma", 0, ("k", "beta"),
        lambda p: (-p["k"], p["beta"] / p["k"], 1.0 / p["beta"]),
        lambda s_, mu, sigma: {"k": -s_, "beta": 1.0 / sigma},
        spec_params=("k",),
    ),
    _weibull("weibull", 1.0),
    _weibull("inverse_weibull", -1.0),
    _generalized_gamma("generalized_gamma", 1.0),
    _generalized_gamma("generalized_inverse_gamma", -1.0),
    _NamedRow(
        "chi_squared", 0, ("nu",),
        lambda p: (-1.0, p["nu"] / 2.0, 1.0 / p["nu"]),
        lambda s_, mu, sigma: {"nu": 2.0 * mu},
        fixed_s=-1.0,
    ),
    _NamedRow(
        "scaled_inverse_chi_squared", 0, ("nu", "tau2"),
        lambda p: (1.0, p["nu"] / 2.0, p["tau2"]),
        lambda s_, mu, sigma: {"nu": 2.0 * mu, "tau2": sigma},
        fixed_s=1.0,
    ),
]

NAMED_MODELS: dict[str, _NamedRow] = {row.name: row for row in _ROWS}


def _row(name) -> _NamedRow:
    try:
        return NAMED_MODELS[name]
    except KeyError:
        raise UnknownModel(
            f"unknown model {name!r}; available: {', '.join(sorted(NAMED_MODELS))}"
        ) from None


@dataclass(frozen=True)
class NamedModel:
    """A named distribution together with its place in the family."""

    name: str
    native_params: dict
    spec: FamilySpec
    params: Params


def from_named(name: str, native_params: Mapping[str, float]) -> NamedModel:
    """Map native parameters of a named distribution to ``(spec, params)``.

    Examples
    --------
    >>> m = from_named("weighted_inverse_lindley", {"lambda": 1.0, "phi": 3.0})
    >>> m.spec, m.params.mu
    (FamilySpec(s=1.0, delta=1), 3.0)
    """
    row = _row(name)
    missing = set(row.param_names) - set(native_params)
    extra = set(native_params) - set(row.param_names)
    if missing or extra:
        raise DomainError(
            f"{name} takes parameters {row.param_names}; missing {sorted(missing)}, unexpected {sorted(extra)}"
        )
    native = {k: float(native_params[k]) for k in row.param_names}
    row.check(native)
    s, mu, sigma = row.forward(native)
    return NamedModel(name, native, FamilySpec(s, row.delta), Params(mu, sigma))


def named_spec(name: str, native_params: Mapping[str, float] | None = None) -> FamilySpec:
    """Family spec of a named model.

    Rows whose generator exponent is itself a parameter (Weibull, generalized
    gamma, ...) need that parameter in ``native_params``.
    """
    row = _row(name)
    native_params = dict(native_params or {})
    if row.fixed_s is not None:
        return FamilySpec(row.fixed_s, row.delta)
    missing = [k for k in row.spec_params if k not in native_params]
    if missing:
        raise DomainError(f"{name}: parameter(s) {missing} are needed to fix the generator power")
    # evaluate forward with placeholders for parameters that do not affect s
    probe = {k: float(native_params.get(k, 1.0)) for k in row.param_names}
    s, _, _ = row.forward(probe)
    return FamilySpec(s, row.delta)


def to_named(name: str, spec: FamilySpec, params, strict: bool = True) -> dict:
    """Invert the named mapping.

    With ``strict=True`` the result is mapped forward again and must reproduce
    ``(spec, params)`` to 1e-12 relative; rows that pin ``mu`` or tie
    ``sigma`` to ``mu`` reject pairs outside their image. ``strict=False``
    skips that check and the native constraints, which is what fitted values
    need. ``params`` may also be a ``(mu, sigma)`` pair of numpy arrays when
    ``strict`` is false.
    """
    row = _row(name)
    if spec.delta != row.delta:
        raise NamedMismatch(f"{name} has delta={row.delta}, got delta={spec.delta}")
    if row.fixed_s is not None and spec.s != row.fixed_s:
        raise NamedMismatch(f"{name} has s={row.fixed_s}, got s={spec.s}")
    if isinstance(params, Params):
        mu, sigma = params.mu, params.sigma
    else:
        mu, sigma = params
    native = row.backward(spec.s, mu, sigma)
    if not strict:
        return native
    native = {k: float(v) for k, v in native.items()}
    row.check(native)
    s2, mu2, sigma2 = row.forward(native)
    for label, a, b in (("s", s2, spec.s), ("mu", mu2, mu), ("sigma", sigma2, sigma)):
        if not math.isclose(a, b, rel_tol=1e-12, abs_tol=0.0):
            raise NamedMismatch(f"{name}: ({spec}, {params}) is outside the model's image ({label} {b!r} != {a!r})")
    return native
