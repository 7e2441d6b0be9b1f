"""One-dimensional Gaussian mixtures with closed-form corrupted densities.

Adding isotropic Gaussian noise of scale sigma to a mixture yields another
mixture with component variances increased by sigma^2, so the negative
log-density and score of the noisy distribution are available exactly. This
is the analytic ground truth against which learned energy and score
estimates are verified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, ndtr

from .errors import ContractError

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GaussianMixture1D:
    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.means, dtype=np.float64)
        s = np.asarray(self.stds, dtype=np.float64)
        if not (w.shape == m.shape == s.shape) or w.ndim != 1 or w.size == 0:
            raise ContractError("weights, means, stds must be equal-length 1-D lists")
        if np.any(w <= 0) or np.any(s <= 0):
            raise ContractError("weights and stds must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ContractError(f"weights must sum to 1, got {w.sum()}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)

    @property
    def mean(self) -> float:
        return float(np.sum(self.weights * self.means))

    @property
    def variance(self) -> float:
        second = np.sum(self.weights * (self.stds ** 2 + self.means ** 2))
        return float(second - self.mean ** 2)


def sample_mixture(mix: GaussianMixture1D, n: int, rng: np.random.Generator) -> np.ndarray:
    comp = rng.choice(len(mix.weights), size=n, p=mix.weights)
    return mix.means[comp] + mix.stds[comp] * rng.standard_normal(n)


def convolve_with_noise(mix: GaussianMixture1D, sigma: float) -> GaussianMixture1D:
    """Mixture of the sum X + N(0, sigma^2)."""
    if sigma < 0:
        raise ContractError("noise scale must be non-negative")
    return GaussianMixture1D(mix.weights, mix.means, np.sqrt(mix.stds ** 2 + sigma ** 2))


def _component_logpdfs(mix: GaussianMixture1D, y: np.ndarray) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    z = (y[:, None] - mix.means[None, :]) / mix.stds[None, :]
    return -0.5 * z ** 2 - np.log(mix.stds[None, :]) - _LOG_SQRT_2PI + np.log(mix.weights[None, :])


def log_density(mix: GaussianMixture1D, y) -> np.ndarray | float:
    scalar = np.isscalar(y) or np.ndim(y) == 0
    ll = logsumexp(_component_logpdfs(mix, y), axis=1)
    return float(ll[0]) if scalar else ll


def score(mix: GaussianMixture1D, y) -> np.ndarray | float:
    """d log p(y) / dy via posterior-weighted component scores."""
    scalar = np.isscalar(y) or np.ndim(y) == 0
    ya = np.atleast_1d(np.asarray(y, dtype=np.float64))
    lp = _component_logpdfs(mix, ya)
    post = np.exp(lp - logsumexp(lp, axis=1, keepdims=True))
    comp_scores = (mix.means[None, :] - ya[:, None]) / (mix.stds[None, :] ** 2)
    s = np.sum(post * comp_scores, axis=1)
    return float(s[0]) if scalar else s


def corrupted_energy_and_score(mix: GaussianMixture1D, sigma: float, y):
    """Exact (-log p(y), d log p(y)/dy) of the noise-corrupted mixture."""
    noisy = convolve_with_noise(mix, sigma)
    ld = log_density(noisy, y)
    return -ld if np.isscalar(ld) else -np.asarray(ld), score(noisy, y)


def cdf(mix: GaussianMixture1D, y) -> np.ndarray | float:
    scalar = np.isscalar(y) or np.ndim(y) == 0
    ya = np.atleast_1d(np.asarray(y, dtype=np.float64))
    z = (ya[:, None] - mix.means[None, :]) / mix.stds[None, :]
    c = np.sum(mix.weights[None, :] * ndtr(z), axis=1)
    return float(c[0]) if scalar else c


def central_mass_interval(mix: GaussianMixture1D, mass: float = 0.99) -> tuple[float, float]:
    """Interval [q_{(1-mass)/2}, q_{(1+mass)/2}] found by bisection on the CDF."""
    if not 0.0 < mass < 1.0:
        raise ContractError("mass must lie in (0, 1)")
    lo_target, hi_target = (1.0 - mass) / 2.0, (1.0 + mass) / 2.0
    span = 10.0 * float(np.max(mix.stds))
    left = float(np.min(mix.means)) - span
    right = float(np.max(mix.means)) + span

    def quantile(p: float) -> float:
        a, b = left, right
        for _ in range(200):
            m = 0.5 * (a + b)
            if cdf(mix, m) < p:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    return quantile(lo_target), quantile(hi_target)
