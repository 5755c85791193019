"""Laplace and Staircase mechanisms, used as comparison baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Mechanism, PrivacyParams, PrivatizedValue

# Geometric layers lighter than this are ignored when integrating the
# staircase density numerically.
TAIL_CUTOFF = 1e-15


# ---------------------------------------------------------------------------
# Laplace


def laplace_scale(params: PrivacyParams) -> float:
    return params.delta_sens / params.epsilon


def laplace_variance(params: PrivacyParams) -> float:
    return 2.0 * params.delta_sens**2 / params.epsilon**2


def laplace_density(params: PrivacyParams, x: float, z):
    b = laplace_scale(params)
    return np.exp(-np.abs(np.asarray(z, dtype=np.float64) - x) / b) / (2.0 * b)


def sample_laplace(params: PrivacyParams, x: float, rng) -> PrivatizedValue:
    """Inverse-transform Laplace draw: random sign times ``-b*log(1-U)``.

    Consumes two uniforms, sign first.
    """
    b = laplace_scale(params)
    sign = -1.0 if rng.random() < 0.5 else 1.0
    mag = -b * math.log1p(-rng.random())
    return PrivatizedValue(x + sign * mag, Mechanism.LAPLACE)


def sample_laplace_batch(params: PrivacyParams, xs, uniforms) -> np.ndarray:
    return kernels.laplace_sample(np.asarray(xs, dtype=np.float64), uniforms, laplace_scale(params))


# ---------------------------------------------------------------------------
# Staircase


@dataclass(frozen=True)
class StaircaseShape:
    params: PrivacyParams
    gamma: float
    a_gamma: float

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def delta(self) -> float:
        return self.params.delta_sens

    @property
    def low_branch_prob(self) -> float:
        """Probability that a draw lands in the ``[0, gamma*delta)`` part of its layer."""
        q = math.exp(-self.epsilon)
        return self.gamma / (self.gamma + q * (1.0 - self.gamma))

    def n_layers(self) -> int:
        """Number of geometric layers heavier than :data:`TAIL_CUTOFF`."""
        return int(math.ceil(-math.log(TAIL_CUTOFF) / self.epsilon))


def staircase_gamma(epsilon: float) -> float:
    """Optimal split point of the staircase layer.

    Algebraically equal to the textbook closed form
    ``-q/(1-q) + cbrt(q - 2q^2 + 2q^4 - q^5) / (cbrt(2) (1-q)^2)`` with
    ``q = e^-eps``, rearranged so it stays accurate as ``eps -> 0`` and
    ``eps -> inf``.
    """
    q = math.exp(-epsilon)
    g = (q * (1.0 + q) / 2.0) ** (1.0 / 3.0)
    return q * (1.0 + 2.0 * q) / (2.0 * (g * g + g * q + q * q))


def staircase_shape(params: PrivacyParams) -> StaircaseShape:
    gamma = staircase_gamma(params.epsilon)
    q = math.exp(-params.epsilon)
    a = -math.expm1(-params.epsilon) / (2.0 * params.delta_sens * (gamma + q * (1.0 - gamma)))
    return StaircaseShape(params=params, gamma=gamma, a_gamma=a)


def staircase_density(shape: StaircaseShape, z):
    """Staircase noise density at ``z`` (scalar or array)."""
    za = np.abs(np.asarray(z, dtype=np.float64))
    delta = shape.delta
    k = np.floor(za / delta)
    r = za - k * delta
    # Layer index * eps can exceed the float range of exp() only far in the tail.
    level = np.where(r < shape.gamma * delta, 0.0, shape.epsilon)
    out = shape.a_gamma * np.exp(-(k * shape.epsilon + level))
    return out if out.ndim else float(out)


def staircase_breakpoints(shape: StaircaseShape, x: float = 0.0) -> np.ndarray:
    k = np.arange(shape.n_layers() + 1, dtype=np.float64)
    pos = np.concatenate([k, k[:-1] + shape.gamma]) * shape.delta
    return np.unique(np.concatenate([x - pos, x + pos]))


def staircase_variance(params: PrivacyParams) -> float:
    eps = params.epsilon
    q = math.exp(-eps)
    num = 2.0 ** (-2.0 / 3.0) * math.exp(-2.0 * eps / 3.0) * (1.0 + q) ** (2.0 / 3.0) + q
    return params.delta_sens**2 * num / math.expm1(-eps) ** 2


def sample_staircase(shape: StaircaseShape, x: float, rng) -> PrivatizedValue:
    """Staircase draw from sign, layer, branch and position.

    Consumes four uniforms in that order; the layer is geometric with
    ``P(G = k) = (1 - e^-eps) e^(-k eps)``, drawn by inverse CDF.
    """
    eps, delta, gamma = shape.epsilon, shape.delta, shape.gamma
    sign = -1.0 if rng.random() < 0.5 else 1.0
    g = math.floor(math.log1p(-rng.random()) / -eps)
    if rng.random() < shape.low_branch_prob:
        inner = rng.random() * gamma * delta
    else:
        inner = gamma * delta + rng.random() * (1.0 - gamma) * delta
    return PrivatizedValue(x + sign * (g * delta + inner), Mechanism.STAIRCASE)


def sample_staircase_batch(shape: StaircaseShape, xs, uniforms) -> np.ndarray:
    return kernels.staircase_sample(
        np.asarray(xs, dtype=np.float64), uniforms, shape.epsilon, shape.delta, shape.gamma
    )
