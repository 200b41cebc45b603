"""Parametric model families over the real line.

Four families are provided: the full normal location-scale model, its
location and scale submodels, and the unit-threshold Pareto shape model.
Each family exposes densities, scores, score derivatives, sampling, and the
closed-form power integrals the estimators are built on.  The submodels are
distinct kinds rather than constrained views of the full normal model
because their influence formulas differ.

Family objects are stateless and immutable; sampling takes an explicit
generator owned by the caller, so concurrent use is safe.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DegenerateDataError, DomainError, InvalidInputError

_LOG_2PI = math.log(2.0 * math.pi)

# Normal quadrature window: mu +/- 10 sigma leaves tail mass < 1e-22.
_NORMAL_WINDOW = 10.0
# Pareto log-grid span: u in [0, 30/theta] leaves tail mass < 1e-12.
_PARETO_LOG_SPAN = 30.0


@lru_cache(maxsize=32)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _gauss_nodes(lo: float, hi: float, n: int):
    x, w = _leggauss(int(n))
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid + half * x, half * w


def _as_param(theta, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.shape != (dim,):
        raise InvalidInputError(
            f"parameter must have {dim} component(s), got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"parameter must be finite, got {arr!r}")
    return arr


class Family:
    """Base class for parametric model descriptors."""

    name: str = ""
    param_dim: int = 1
    param_names: tuple[str, ...] = ()
    support: tuple[float, float] = (-math.inf, math.inf)

    def validate_param(self, theta) -> np.ndarray:
        raise NotImplementedError

    def log_density(self, theta, x):
        raise NotImplementedError

    def density(self, theta, x):
        out = np.exp(self.log_density(theta, x))
        return out

    def score(self, theta, x):
        """Score vector; shape ``x.shape + (param_dim,)``."""
        raise NotImplementedError

    def score_deriv(self, theta, x):
        """Jacobian of the score; shape ``x.shape + (param_dim, param_dim)``."""
        raise NotImplementedError

    def power_ratio_integral(self, theta, theta_tilde, alpha: float) -> float:
        """Closed form of the tilted-ratio expectation under the second member."""
        raise NotImplementedError

    def power_mass_integral(self, theta, alpha: float) -> float:
        """Closed form of the integral of the density raised to ``1 + alpha``."""
        raise NotImplementedError

    def renyi_normalizer(self, theta, alpha: float) -> float:
        """Normalizer ``power_mass_integral ** (alpha / (1 + alpha))``."""
        a = float(alpha)
        if a < 0.0:
            raise DomainError(f"order alpha must be nonnegative, got {alpha!r}")
        if a == 0.0:
            return 1.0
        return self.power_mass_integral(theta, a) ** (a / (1.0 + a))

    def weighted_score_mean(self, theta, alpha: float):
        """Mean of the score under the power-tilted density, closed form."""
        raise NotImplementedError

    def sample(self, theta, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def integration_grid(self, thetas, node_count: int = 512):
        """Nodes and base-measure weights covering the mass of every member
        in ``thetas``; ``sum(w * g(x))`` approximates the Lebesgue integral
        of ``g``."""
        raise NotImplementedError

    def mle_parameter(self, nodes, weights) -> np.ndarray:
        """Closed-form maximum-likelihood parameter for a weighted sample."""
        raise NotImplementedError

    def default_bounds(self, nodes, weights) -> tuple[tuple[float, float], ...]:
        """Search box for bounded optimization, derived from the sample."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<family {self.name}>"


def _weighted_quantile(nodes, weights, p: float) -> float:
    order = np.argsort(nodes)
    x = np.asarray(nodes)[order]
    cw = np.cumsum(np.asarray(weights)[order])
    idx = int(np.searchsorted(cw, p * cw[-1], side="left"))
    return float(x[min(idx, len(x) - 1)])


def _location_bounds(nodes, weights) -> tuple[float, float]:
    xmin = float(np.min(nodes))
    xmax = float(np.max(nodes))
    iqr = _weighted_quantile(nodes, weights, 0.75) - _weighted_quantile(nodes, weights, 0.25)
    if iqr <= 0.0:
        mean = float(weights @ nodes)
        iqr = max(abs(mean), 1.0)
    return xmin - 10.0 * iqr, xmax + 10.0 * iqr


def _scale_bounds(nodes, weights) -> tuple[float, float]:
    mean = float(weights @ nodes)
    var = float(weights @ (np.asarray(nodes) - mean) ** 2)
    sd = math.sqrt(max(var, 0.0))
    if sd <= 0.0:
        # Single-point or constant samples: fall back to the magnitude scale
        # so the box stays nondegenerate.
        sd = max(abs(mean), 1.0)
    return 1e-3 * sd, 10.0 * sd


class _NormalKind(Family):
    """Shared machinery for the three normal parameterizations."""

    support = (-math.inf, math.inf)

    def _loc_scale(self, theta) -> tuple[float, float]:
        raise NotImplementedError

    def _window(self, theta) -> tuple[float, float]:
        mu, sigma = self._loc_scale(theta)
        return mu - _NORMAL_WINDOW * sigma, mu + _NORMAL_WINDOW * sigma

    def log_density(self, theta, x):
        mu, sigma = self._loc_scale(self.validate_param(theta))
        xs = np.asarray(x, dtype=float)
        z = (xs - mu) / sigma
        out = -0.5 * z * z - math.log(sigma) - 0.5 * _LOG_2PI
        return float(out) if np.ndim(x) == 0 else out

    def power_ratio_integral(self, theta, theta_tilde, alpha: float) -> float:
        mu, sigma = self._loc_scale(self.validate_param(theta))
        mu_t, sigma_t = self._loc_scale(self.validate_param(theta_tilde))
        a = float(alpha)
        v = a * sigma_t**2 + (1.0 - a) * sigma**2
        if v <= 0.0:
            raise DomainError(
                f"alpha={alpha!r} is outside the valid range for scales "
                f"({sigma}, {sigma_t}): mixed variance is nonpositive"
            )
        log_value = (
            -a * (1.0 - a) * (mu - mu_t) ** 2 / (2.0 * v)
            - 0.5 * math.log(v)
            + a * math.log(sigma_t)
            + (1.0 - a) * math.log(sigma)
        )
        return math.exp(log_value)

    def power_mass_integral(self, theta, alpha: float) -> float:
        _, sigma = self._loc_scale(self.validate_param(theta))
        a = float(alpha)
        if a < 0.0:
            raise DomainError(f"order alpha must be nonnegative, got {alpha!r}")
        return (1.0 + a) ** -0.5 / (2.0 * math.pi * sigma**2) ** (a / 2.0)

    def sample(self, theta, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise InvalidInputError(f"sample size must be >= 1, got {n}")
        mu, sigma = self._loc_scale(self.validate_param(theta))
        return mu + sigma * rng.standard_normal(int(n))

    def integration_grid(self, thetas, node_count: int = 512):
        windows = [self._window(self.validate_param(t)) for t in thetas]
        lo = min(w[0] for w in windows)
        hi = max(w[1] for w in windows)
        return _gauss_nodes(lo, hi, node_count)


class NormalLocScale(_NormalKind):
    """Normal model with free location and scale, theta = (mu, sigma)."""

    name = "normal"
    param_dim = 2
    param_names = ("mu", "sigma")

    def validate_param(self, theta) -> np.ndarray:
        arr = _as_param(theta, 2)
        if arr[1] <= 0.0:
            raise InvalidInputError(f"scale must be positive, got {arr[1]}")
        return arr

    def _loc_scale(self, theta):
        return float(theta[0]), float(theta[1])

    def score(self, theta, x):
        mu, sigma = self._loc_scale(self.validate_param(theta))
        xs = np.asarray(x, dtype=float)
        z = (xs - mu) / sigma
        out = np.stack([z / sigma, (z * z - 1.0) / sigma], axis=-1)
        return out

    def score_deriv(self, theta, x):
        mu, sigma = self._loc_scale(self.validate_param(theta))
        xs = np.asarray(x, dtype=float)
        d = xs - mu
        s2 = sigma * sigma
        d_mu_mu = np.broadcast_to(-1.0 / s2, xs.shape)
        d_mu_sigma = -2.0 * d / sigma**3
        d_sigma_sigma = -3.0 * d * d / sigma**4 + 1.0 / s2
        row1 = np.stack([d_mu_mu, d_mu_sigma], axis=-1)
        row2 = np.stack([d_mu_sigma, d_sigma_sigma], axis=-1)
        return np.stack([row1, row2], axis=-2)

    def weighted_score_mean(self, theta, alpha: float):
        _, sigma = self._loc_scale(self.validate_param(theta))
        a = float(alpha)
        return np.array([0.0, -a / (sigma * (1.0 + a))])

    def mle_parameter(self, nodes, weights) -> np.ndarray:
        mu = float(weights @ nodes)
        var = float(weights @ (np.asarray(nodes) - mu) ** 2)
        if var <= 0.0:
            raise DegenerateDataError("sample has zero spread; scale estimate degenerates")
        return np.array([mu, math.sqrt(var)])

    def default_bounds(self, nodes, weights):
        return (_location_bounds(nodes, weights), _scale_bounds(nodes, weights))


class NormalLocation(_NormalKind):
    """Normal location submodel with unit scale, theta = (mu,)."""

    name = "normal-loc"
    param_dim = 1
    param_names = ("mu",)

    def validate_param(self, theta) -> np.ndarray:
        return _as_param(theta, 1)

    def _loc_scale(self, theta):
        return float(theta[0]), 1.0

    def score(self, theta, x):
        mu = float(self.validate_param(theta)[0])
        xs = np.asarray(x, dtype=float)
        return np.stack([xs - mu], axis=-1)

    def score_deriv(self, theta, x):
        self.validate_param(theta)
        xs = np.asarray(x, dtype=float)
        return np.broadcast_to(-1.0, xs.shape + (1, 1)).copy()

    def weighted_score_mean(self, theta, alpha: float):
        self.validate_param(theta)
        return np.array([0.0])

    def mle_parameter(self, nodes, weights) -> np.ndarray:
        return np.array([float(weights @ nodes)])

    def default_bounds(self, nodes, weights):
        return (_location_bounds(nodes, weights),)


class NormalScale(_NormalKind):
    """Normal scale submodel centered at zero, theta = (sigma,)."""

    name = "normal-scale"
    param_dim = 1
    param_names = ("sigma",)

    def validate_param(self, theta) -> np.ndarray:
        arr = _as_param(theta, 1)
        if arr[0] <= 0.0:
            raise InvalidInputError(f"scale must be positive, got {arr[0]}")
        return arr

    def _loc_scale(self, theta):
        return 0.0, float(theta[0])

    def score(self, theta, x):
        sigma = float(self.validate_param(theta)[0])
        xs = np.asarray(x, dtype=float)
        z = xs / sigma
        return np.stack([(z * z - 1.0) / sigma], axis=-1)

    def score_deriv(self, theta, x):
        sigma = float(self.validate_param(theta)[0])
        xs = np.asarray(x, dtype=float)
        out = -3.0 * xs * xs / sigma**4 + 1.0 / sigma**2
        return out.reshape(xs.shape + (1, 1))

    def weighted_score_mean(self, theta, alpha: float):
        sigma = float(self.validate_param(theta)[0])
        a = float(alpha)
        return np.array([-a / (sigma * (1.0 + a))])

    def mle_parameter(self, nodes, weights) -> np.ndarray:
        m2 = float(weights @ np.asarray(nodes) ** 2)
        if m2 <= 0.0:
            raise DegenerateDataError("sample second moment is zero; scale estimate degenerates")
        return np.array([math.sqrt(m2)])

    def default_bounds(self, nodes, weights):
        return (_scale_bounds(nodes, weights),)


class Pareto(Family):
    """Pareto shape model on (1, inf), theta = (shape,)."""

    name = "pareto"
    param_dim = 1
    param_names = ("theta",)
    support = (1.0, math.inf)

    def validate_param(self, theta) -> np.ndarray:
        arr = _as_param(theta, 1)
        if arr[0] <= 0.0:
            raise InvalidInputError(f"shape must be positive, got {arr[0]}")
        return arr

    def log_density(self, theta, x):
        shape = float(self.validate_param(theta)[0])
        xs = np.asarray(x, dtype=float)
        if np.any(xs <= 1.0):
            raise DomainError("observations must lie in the support (1, inf)")
        out = math.log(shape) - (shape + 1.0) * np.log(xs)
        return float(out) if np.ndim(x) == 0 else out

    def score(self, theta, x):
        shape = float(self.validate_param(theta)[0])
        xs = np.asarray(x, dtype=float)
        if np.any(xs <= 1.0):
            raise DomainError("observations must lie in the support (1, inf)")
        return np.stack([1.0 / shape - np.log(xs)], axis=-1)

    def score_deriv(self, theta, x):
        shape = float(self.validate_param(theta)[0])
        xs = np.asarray(x, dtype=float)
        return np.broadcast_to(-1.0 / shape**2, xs.shape + (1, 1)).copy()

    def power_ratio_integral(self, theta, theta_tilde, alpha: float) -> float:
        sh = float(self.validate_param(theta)[0])
        sh_t = float(self.validate_param(theta_tilde)[0])
        a = float(alpha)
        denom = a * sh + (1.0 - a) * sh_t
        if denom <= 0.0:
            raise DomainError(
                f"alpha={alpha!r} is outside the valid range for shapes ({sh}, {sh_t})"
            )
        return sh**a * sh_t ** (1.0 - a) / denom

    def power_mass_integral(self, theta, alpha: float) -> float:
        sh = float(self.validate_param(theta)[0])
        a = float(alpha)
        if a < 0.0:
            raise DomainError(f"order alpha must be nonnegative, got {alpha!r}")
        return sh ** (1.0 + a) / (sh * (1.0 + a) + a)

    def weighted_score_mean(self, theta, alpha: float):
        sh = float(self.validate_param(theta)[0])
        a = float(alpha)
        return np.array([1.0 / sh - 1.0 / (sh * (1.0 + a) + a)])

    def sample(self, theta, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise InvalidInputError(f"sample size must be >= 1, got {n}")
        sh = float(self.validate_param(theta)[0])
        u = 1.0 - rng.random(int(n))  # uniform on (0, 1]
        return u ** (-1.0 / sh)

    def integration_grid(self, thetas, node_count: int = 512):
        shapes = [float(self.validate_param(t)[0]) for t in thetas]
        u_max = _PARETO_LOG_SPAN / min(shapes)
        # Substitution u = ln x turns dx into e^u du on a finite window.
        u, w = _gauss_nodes(0.0, u_max, node_count)
        x = np.exp(u)
        return x, w * x

    def mle_parameter(self, nodes, weights) -> np.ndarray:
        xs = np.asarray(nodes, dtype=float)
        if np.any(xs < 1.0):
            raise DomainError("observations must lie in the support (1, inf)")
        mean_log = float(weights @ np.log(xs))
        if mean_log <= 0.0:
            raise DegenerateDataError(
                "all observations sit on the support boundary; shape estimate degenerates"
            )
        return np.array([1.0 / mean_log])

    def default_bounds(self, nodes, weights):
        xs = np.asarray(nodes, dtype=float)
        mean_log = float(weights @ np.log(np.maximum(xs, 1.0 + 1e-300)))
        if mean_log > 0.0:
            center = 1.0 / mean_log
            return ((center / 100.0, center * 100.0),)
        return ((1e-3, 1e3),)


NORMAL = NormalLocScale()
NORMAL_LOCATION = NormalLocation()
NORMAL_SCALE = NormalScale()
PARETO = Pareto()

FAMILIES: dict[str, Family] = {
    f.name: f for f in (NORMAL, NORMAL_LOCATION, NORMAL_SCALE, PARETO)
}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise InvalidInputError(f"unknown family {name!r}; choose one of: {known}") from None
