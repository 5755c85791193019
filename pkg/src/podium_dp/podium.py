"""The Podium mechanism.

A Podium density is piecewise constant on ``[-delta*m/2, delta*m/2]`` with two
levels, ``d`` and ``d*e^eps``. The raised step has a fixed width ``w``; only
its left edge ``t`` moves with the input, chosen so the density has mean ``x``.

The offline part (:func:`compute_shape`) fixes ``s``, ``m``, ``w`` and ``d``
from the step-location parameter ``s`` that minimises the worst-case
variance. The online part (:func:`step_location`, :func:`sample`) places the
step for each input and draws from the resulting three-uniform mixture.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .core import Mechanism, PrivacyParams, PrivatizedValue, check_epsilon
from .errors import InputOutOfRange, InternalConsistencyError

LOG_SQRT2 = 0.5 * math.log(2.0)

# Probabilities closer than this to 0 are rounding residue at x = +-delta/2.
_PROB_SLACK = 1e-12


class SolverMode(str, enum.Enum):
    EXACT = "exact"
    APPROXIMATE = "approx"


# ---------------------------------------------------------------------------
# step-location parameter s


def _dvds_terms(s: float, epsilon: float) -> tuple[float, float, float, float]:
    return (
        -2.0 * math.exp(epsilon - s),
        2.0 * math.exp(s + epsilon),
        -math.exp(2.0 * epsilon - 2.0 * s),
        math.exp(2.0 * s),
    )


def dvds(s: float, epsilon: float) -> float:
    """Derivative (up to a positive factor) of the worst-case variance in ``s``."""
    return math.fsum(_dvds_terms(s, epsilon))


def d2vds2(s: float, epsilon: float) -> float:
    return 4.0 * math.exp(epsilon) * (math.cosh(2.0 * s - epsilon) + math.cosh(s))


def stationarity_residual(s: float, epsilon: float) -> float:
    """``dvds`` divided by the sum of its terms' magnitudes.

    The terms grow like ``e^(4*eps/3)``, so only a scale-free residual is a
    meaningful test of a root in double precision.
    """
    terms = _dvds_terms(s, epsilon)
    return math.fsum(terms) / math.fsum(abs(v) for v in terms)


def extreme_variance(s: float, epsilon: float, delta: float = 1.0) -> float:
    """Variance of the extreme right shape (mean ``delta/2``) as a function of ``s``."""
    return (
        delta * delta / 12.0
        * (math.cosh(2.0 * s - epsilon) + 4.0 * math.cosh(s) + 3.0)
        / (math.cosh(epsilon) - 1.0)
    )


def _closed_form_root(epsilon: float) -> float:
    e1 = math.exp(epsilon)
    e2 = e1 * e1
    a = float(np.cbrt(4.0 * (e2 - e2 * e2)))  # real cube root; a < 0
    ra = math.sqrt(a + e2)
    b = 2.0 * (2.0 * e1 - e1 * e2) / ra
    if epsilon >= LOG_SQRT2:
        num = -ra - e1 + math.sqrt(-b + 2.0 * e2 - a)
    else:
        num = ra - e1 + math.sqrt(b + 2.0 * e2 - a)
    return math.log(num / 2.0)


def solve_s_exact(epsilon: float) -> float:
    """Real root of the stationarity quartic for ``s``.

    Evaluates the closed-form root, then polishes it with Newton steps on
    ``dvds``. The closed form cancels catastrophically for large ``epsilon``
    (relative error ~ ``e^(-2*eps/3)``) and is 0/0 at the branch point
    ``eps = log(sqrt(2))``; where it breaks down the iteration starts from
    ``eps/3``. The function is strictly convex, so
    Newton converges to the same root either way.
    """
    epsilon = check_epsilon(epsilon)
    try:
        s = _closed_form_root(epsilon)
    except (ValueError, OverflowError, ZeroDivisionError):
        s = epsilon / 3.0
    if not math.isfinite(s):
        s = epsilon / 3.0
    for _ in range(50):
        step = dvds(s, epsilon) / d2vds2(s, epsilon)
        s -= step
        if abs(step) <= 1e-16 * max(1.0, abs(s)):
            break
    return s


def solve_s_approx(epsilon: float) -> float:
    return check_epsilon(epsilon) / 3.0


# ---------------------------------------------------------------------------
# offline shape


@dataclass(frozen=True)
class PodiumShape:
    """Precomputed extreme-right shape parameters for one ``(epsilon, delta)``."""

    params: PrivacyParams
    mode: SolverMode
    s: float
    m: float
    w: float
    d: float

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def delta(self) -> float:
        return self.params.delta_sens

    @property
    def lo(self) -> float:
        return -self.delta * self.m / 2.0

    @property
    def hi(self) -> float:
        return self.delta * self.m / 2.0

    @property
    def high_density(self) -> float:
        return self.d * math.exp(self.epsilon)

    @property
    def mechanism(self) -> Mechanism:
        if self.mode is SolverMode.EXACT:
            return Mechanism.PODIUM_EXACT
        return Mechanism.PODIUM_APPROX


def compute_shape(params: PrivacyParams, mode: SolverMode = SolverMode.EXACT) -> PodiumShape:
    mode = SolverMode(mode)
    eps, delta = params.epsilon, params.delta_sens
    s = solve_s_exact(eps) if mode is SolverMode.EXACT else solve_s_approx(eps)
    es = math.exp(s)
    norm = 1.0 + es + math.exp(eps) + math.exp(eps - s)
    m = norm / math.expm1(eps)
    w = delta * m / (1.0 + es)
    d = (1.0 + 1.0 / es) * (1.0 + es) / (delta * m * norm)
    return PodiumShape(params=params, mode=mode, s=s, m=m, w=w, d=d)


# ---------------------------------------------------------------------------
# online step placement


@dataclass(frozen=True)
class PodiumStep:
    t: float
    p1: float
    p2: float
    p3: float


def _check_input(shape: PodiumShape, x: float) -> None:
    if not abs(x) <= shape.delta / 2.0:
        raise InputOutOfRange(f"x={x} outside [-{shape.delta / 2}, {shape.delta / 2}]")


def _clean_prob(p: float, name: str) -> float:
    if p < 0.0:
        if p > -_PROB_SLACK:
            return 0.0
        raise InternalConsistencyError(f"{name}={p} is negative")
    return p


def step_location(shape: PodiumShape, x: float) -> PodiumStep:
    """Place the raised step so that the density has mean ``x``."""
    _check_input(shape, x)
    w, d = shape.w, shape.d
    k = w * d * math.expm1(shape.epsilon)
    t = (2.0 * x - w * k) / (2.0 * k)
    t = min(max(t, shape.lo), shape.hi - w)
    p1 = _clean_prob(d * (t - shape.lo), "p1")
    p2 = d * math.exp(shape.epsilon) * w
    p3 = _clean_prob(1.0 - p1 - p2, "p3")
    return PodiumStep(t=t, p1=p1, p2=p2, p3=p3)


def sample(shape: PodiumShape, x: float, rng) -> PrivatizedValue:
    """Privatize one centered input.

    ``rng`` is anything with a ``random()`` method returning uniforms on
    [0, 1) (``random.Random``, ``numpy.random.Generator``). Exactly two
    uniforms are consumed: one picks the mixture component, one the position.
    """
    step = step_location(shape, x)
    y = rng.random()
    v = rng.random()
    lo, hi, t, w = shape.lo, shape.hi, step.t, shape.w
    if y < step.p1:
        z = lo + v * (t - lo)
    elif y < step.p1 + step.p2:
        z = t + v * w
    else:
        z = (t + w) + v * (hi - (t + w))
    return PrivatizedValue(z, shape.mechanism)


def sample_batch(shape: PodiumShape, xs, uniforms) -> np.ndarray:
    """Vectorised :func:`sample` from pre-drawn uniforms of shape ``(n, 2)``."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.size and not np.all(np.abs(xs) <= shape.delta / 2.0):
        raise InputOutOfRange(f"inputs outside [-{shape.delta / 2}, {shape.delta / 2}]")
    return kernels.podium_sample(
        xs, uniforms, shape.lo, shape.hi, shape.w, shape.d, math.exp(shape.epsilon)
    )


def sample_many(shape: PodiumShape, xs, rng: np.random.Generator) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    return sample_batch(shape, xs, rng.random((xs.size, 2)))


# ---------------------------------------------------------------------------
# density and variance


def density(shape: PodiumShape, x: float, z: float) -> float:
    """Density of the privatized output at ``z`` given centered input ``x``.

    Intervals are closed on the left and open on the right, except that the
    right end of the support belongs to the rightmost non-empty interval.
    """
    t = step_location(shape, x).t
    lo, hi = shape.lo, shape.hi
    if z < lo or z > hi:
        return 0.0
    right = t + shape.w
    if t <= z < right or (z == hi and right >= hi):
        return shape.high_density
    return shape.d


def density_grid(shape: PodiumShape, x: float, zs) -> np.ndarray:
    """Vectorised :func:`density` over an array of outputs."""
    zs = np.asarray(zs, dtype=np.float64)
    t = step_location(shape, x).t
    lo, hi, right = shape.lo, shape.hi, t + shape.w
    high = ((zs >= t) & (zs < right)) | ((zs == hi) & (right >= hi))
    out = np.where(high, shape.high_density, shape.d)
    return np.where((zs < lo) | (zs > hi), 0.0, out)


def breakpoints(shape: PodiumShape, x: float) -> np.ndarray:
    t = step_location(shape, x).t
    return np.array([shape.lo, t, t + shape.w, shape.hi])


def variance_at(shape: PodiumShape, x: float) -> float:
    """Noise variance of the mechanism at centered input ``x``.

    Mixture of three uniforms: sum of ``p_i * ((mu_i - x)^2 + sigma_i^2)``,
    written about the mean ``x`` to avoid cancellation when the variance is
    tiny compared to ``x^2``.
    """
    step = step_location(shape, x)
    lo, hi, t, w = shape.lo, shape.hi, step.t, shape.w
    comps = ((step.p1, lo, t), (step.p2, t, t + w), (step.p3, t + w, hi))
    total = 0.0
    for p, a, b in comps:
        mid = 0.5 * (a + b) - x
        total += p * (mid * mid + (b - a) ** 2 / 12.0)
    return total


def center_variance(shape: PodiumShape) -> float:
    """Closed-form noise variance at ``x = 0`` (the best case)."""
    dm = shape.delta * shape.m
    return shape.d / 12.0 * (dm**3 + shape.w**3 * math.expm1(shape.epsilon))


def worst_case_variance(shape: PodiumShape) -> float:
    """Closed-form noise variance at ``x = +-delta/2``."""
    return extreme_variance(shape.s, shape.epsilon, shape.delta)


# ---------------------------------------------------------------------------
# lookup table


class LookupRow(NamedTuple):
    epsilon: float
    exp_epsilon: float
    d_delta: float
    w_over_delta: float
    m: float
    s: float


def lookup_table(eps_list: Sequence[float], delta: float = 1.0) -> list[LookupRow]:
    eps_list = list(eps_list)
    if not eps_list:
        raise ValueError("eps_list must be non-empty")
    rows = []
    for eps in eps_list:
        shape = compute_shape(PrivacyParams(check_epsilon(eps), delta), SolverMode.EXACT)
        rows.append(
            LookupRow(
                epsilon=shape.epsilon,
                exp_epsilon=math.exp(shape.epsilon),
                d_delta=shape.d * delta,
                w_over_delta=shape.w / delta,
                m=shape.m,
                s=shape.s,
            )
        )
    return rows
