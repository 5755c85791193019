"""Shared domain types, input shifting and estimator comparison."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import (
    NonPositiveEpsilon,
    NonPositiveSensitivity,
    NonPositiveVariance,
    OutOfDomain,
)


class Mechanism(str, enum.Enum):
    PODIUM_EXACT = "podium-exact"
    PODIUM_APPROX = "podium-approx"
    LAPLACE = "laplace"
    STAIRCASE = "staircase"

    def __str__(self) -> str:
        return self.value


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise NonPositiveEpsilon(f"epsilon must be positive and finite, got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget ``epsilon`` (nats) and sensitivity ``delta_sens``."""

    epsilon: float
    delta_sens: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        delta = float(self.delta_sens)
        if not (delta > 0 and math.isfinite(delta)):
            raise NonPositiveSensitivity(f"sensitivity must be positive and finite, got {delta}")
        object.__setattr__(self, "delta_sens", delta)


@dataclass(frozen=True)
class InputDomain:
    """A-priori input range ``[min_x, min_x + delta_sens]``."""

    min_x: float
    delta_sens: float

    def __post_init__(self):
        if not (self.delta_sens > 0 and math.isfinite(self.delta_sens)):
            raise NonPositiveSensitivity(f"sensitivity must be positive, got {self.delta_sens}")

    @property
    def center(self) -> float:
        return self.min_x + self.delta_sens / 2

    @property
    def max_x(self) -> float:
        return self.min_x + self.delta_sens


@dataclass(frozen=True)
class PrivatizedValue:
    value: float
    mechanism: Mechanism


def shift_to_centered(domain: InputDomain, x: float) -> float:
    """Map ``x`` from the raw domain onto ``[-delta/2, delta/2]``.

    Raises :class:`OutOfDomain` rather than clamping: the privacy guarantee
    only holds for inputs inside the declared range.
    """
    if not (domain.min_x <= x <= domain.max_x):
        raise OutOfDomain(f"x={x} outside [{domain.min_x}, {domain.max_x}]")
    return x - domain.center


def unshift(domain: InputDomain, z: float) -> float:
    return z + domain.center


def relative_efficiency(var_1: float, var_2: float) -> float:
    """Variance ratio ``var_1 / var_2``; below 1 favours the first estimator."""
    if not (var_1 > 0 and var_2 > 0):
        raise NonPositiveVariance(f"variances must be positive, got {var_1}, {var_2}")
    return var_1 / var_2
