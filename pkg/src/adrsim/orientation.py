"""Measured random-orientation model for hand-held devices.

The elevation angle follows a Laplace distribution with mean 41.39 deg and
standard deviation 7.68 deg, truncated to [0, pi/2] and renormalized so the
density integrates to one (the truncated tail mass is ~3e-4, so renormalizing
shifts nothing beyond the third decimal).  The azimuth is uniform on [0, 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Orientation

THETA_LO = 0.0
THETA_HI = math.pi / 2

DEFAULT_MU_THETA = math.radians(41.39)
DEFAULT_SIGMA_THETA = math.radians(7.68)


@dataclass(frozen=True)
class OrientationModel:
    """Truncated-Laplace elevation model; scale b = sqrt(sigma^2 / 2)."""

    mu_theta: float = DEFAULT_MU_THETA
    sigma_theta: float = DEFAULT_SIGMA_THETA
    b_theta: float = field(init=False)

    def __post_init__(self):
        if self.sigma_theta <= 0.0:
            raise ValueError("sigma_theta must be positive")
        object.__setattr__(self, "b_theta", math.sqrt(self.sigma_theta**2 / 2.0))


def _laplace_cdf(model: OrientationModel, theta) -> np.ndarray:
    """CDF of the untruncated Laplace(mu, b) distribution."""
    z = (np.asarray(theta, dtype=float) - model.mu_theta) / model.b_theta
    return np.where(z < 0.0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))


def truncation_mass(model: OrientationModel) -> float:
    """Probability mass of the untruncated Laplace inside [0, pi/2]."""
    return float(_laplace_cdf(model, THETA_HI) - _laplace_cdf(model, THETA_LO))


def pdf_theta(model: OrientationModel, theta) -> np.ndarray:
    """Renormalized truncated-Laplace density; zero outside [0, pi/2]."""
    th = np.asarray(theta, dtype=float)
    z = truncation_mass(model)
    inside = (th >= THETA_LO) & (th <= THETA_HI)
    dens = np.exp(-np.abs(th - model.mu_theta) / model.b_theta) / (2.0 * model.b_theta * z)
    return np.where(inside, dens, 0.0)


def cdf_theta(model: OrientationModel, theta) -> np.ndarray:
    """CDF of the truncated elevation distribution."""
    th = np.clip(np.asarray(theta, dtype=float), THETA_LO, THETA_HI)
    lo = _laplace_cdf(model, THETA_LO)
    return (_laplace_cdf(model, th) - lo) / truncation_mass(model)


def ppf_theta(model: OrientationModel, q) -> np.ndarray:
    """Inverse CDF of the truncated elevation distribution."""
    q = np.asarray(q, dtype=float)
    lo = _laplace_cdf(model, THETA_LO)
    u = lo + q * truncation_mass(model)
    # invert the two-sided exponential CDF
    left = u < 0.5
    theta = np.where(
        left,
        model.mu_theta + model.b_theta * np.log(2.0 * u),
        model.mu_theta - model.b_theta * np.log(2.0 * (1.0 - u)),
    )
    return np.clip(theta, THETA_LO, THETA_HI)


def sample_arrays(model: OrientationModel, rng: np.random.Generator, n: int):
    """Draw n (theta, omega) pairs; theta by inverse CDF, omega uniform."""
    thetas = ppf_theta(model, rng.random(n))
    omegas = rng.uniform(0.0, 2.0 * math.pi, n)
    return thetas, omegas


def sample_orientation(model: OrientationModel, rng: np.random.Generator) -> Orientation:
    """Draw one random device orientation."""
    thetas, omegas = sample_arrays(model, rng, 1)
    return Orientation(float(thetas[0]), float(omegas[0]))


def vertical() -> Orientation:
    """The upward-facing orientation used as the worst case for coverage."""
    return Orientation(0.0, 0.0)


def worker_seed(master_seed: int, worker_idx: int) -> int:
    """Per-worker RNG seed rule: seed_i = master_seed XOR i."""
    return master_seed ^ worker_idx
