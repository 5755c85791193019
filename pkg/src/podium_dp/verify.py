"""Independent oracles for the analytic formulas.

Every density is wrapped in a small adapter exposing ``pdf``, ``breakpoints``
and ``support``; the quadrature oracles and the ratio certifier only use
that interface, never the closed forms they are meant to check.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Protocol, Sequence

import numpy as np

from . import kernels
from .baselines import (
    laplace_density,
    laplace_scale,
    laplace_variance,
    staircase_breakpoints,
    staircase_density,
    staircase_shape,
    staircase_variance,
)
from .core import PrivacyParams, relative_efficiency
from .errors import InvalidParameter, RegimeMismatch, ToleranceNotMet, ZeroDensity
from .podium import (
    PodiumShape,
    SolverMode,
    breakpoints,
    center_variance,
    compute_shape,
    density_grid,
    worst_case_variance,
)

RATIO_TOL = 1e-9
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


class MechanismDensity(Protocol):
    epsilon: float
    delta_sens: float
    #: True when the density takes only two levels, ``d`` and ``d*e^eps``.
    two_level: bool

    def pdf(self, x: float, z: np.ndarray) -> np.ndarray: ...

    def breakpoints(self, x: float) -> np.ndarray: ...

    def support(self, x: float) -> tuple[float, float]: ...


class PodiumDensity:
    two_level = True

    def __init__(self, shape: PodiumShape):
        self.shape = shape
        self.epsilon = shape.epsilon
        self.delta_sens = shape.delta

    def pdf(self, x, z):
        return density_grid(self.shape, x, z)

    def breakpoints(self, x):
        return breakpoints(self.shape, x)

    def support(self, x):
        return self.shape.lo, self.shape.hi


class LaplaceDensity:
    two_level = False

    def __init__(self, params: PrivacyParams, bound: float = 40.0):
        self.params = params
        self.epsilon = params.epsilon
        self.delta_sens = params.delta_sens
        self.bound = bound

    def pdf(self, x, z):
        return laplace_density(self.params, x, z)

    def breakpoints(self, x):
        return np.array([x])

    def support(self, x):
        return x - self.bound, x + self.bound


class StaircaseDensity:
    two_level = False

    def __init__(self, params: PrivacyParams):
        self.shape = staircase_shape(params)
        self.epsilon = params.epsilon
        self.delta_sens = params.delta_sens

    def pdf(self, x, z):
        return np.asarray(staircase_density(self.shape, np.asarray(z, dtype=np.float64) - x))

    def breakpoints(self, x):
        return staircase_breakpoints(self.shape, x)

    def support(self, x):
        span = self.shape.n_layers() * self.delta_sens
        return x - span, x + span


class TruncatedLaplaceDensity:
    """Negative control: Laplace noise cut to ``[-bound, bound]`` and renormalised.

    Shifted copies stop overlapping near the cut, so no ratio bound exists.
    """

    two_level = False

    def __init__(self, params: PrivacyParams, bound: float = 3.0):
        self.params = params
        self.epsilon = params.epsilon
        self.delta_sens = params.delta_sens
        self.bound = bound
        self._mass = -math.expm1(-bound / laplace_scale(params))

    def pdf(self, x, z):
        z = np.asarray(z, dtype=np.float64)
        inside = np.abs(z - x) <= self.bound
        return np.where(inside, laplace_density(self.params, x, z) / self._mass, 0.0)

    def breakpoints(self, x):
        return np.array([x - self.bound, x, x + self.bound])

    def support(self, x):
        return x - self.bound, x + self.bound


# ---------------------------------------------------------------------------
# privacy ratio certification


@dataclass(frozen=True)
class RatioReport:
    epsilon: float
    max_log_ratio: float
    min_log_ratio: float
    grid_points: int
    violations: int
    unclassified: int = 0
    #: Distinct ratio values observed, for two-level densities.
    ratio_set: tuple[float, ...] = ()

    @property
    def certified(self) -> bool:
        return self.violations == 0


def certify_ratio(
    density: MechanismDensity,
    params: PrivacyParams,
    x_grid: Sequence[float],
    z_grid: Sequence[float],
    tol: float = RATIO_TOL,
) -> RatioReport:
    """Check ``e^-eps <= f(z|x_i) / f(z|x_j) <= e^eps`` over all grid pairs.

    Raises :class:`ZeroDensity` if some output has zero density under one
    input and positive density under another. For two-level densities every
    ratio must also be one of ``e^-eps``, 1 or ``e^eps``; any that is not
    counts as a violation.
    """
    xs = np.asarray(x_grid, dtype=np.float64)
    zs = np.asarray(z_grid, dtype=np.float64)
    half = params.delta_sens / 2.0
    if np.any(np.abs(xs) > half):
        raise InvalidParameter(f"x_grid must lie within [-{half}, {half}]")
    f = np.vstack([density.pdf(x, zs) for x in xs])
    positive = f > 0
    covered = positive.any(axis=0)
    mismatch = covered & ~positive.all(axis=0)
    if mismatch.any():
        k = int(np.argmax(mismatch))
        raise ZeroDensity(
            f"{int(mismatch.sum())} output points have support mismatch, first at z={float(zs[k])!r}"
        )
    logf = np.log(f[:, covered])
    eps = params.epsilon
    max_abs, n_exceed, n_uncl, seen_off, seen_zero = kernels.pair_log_ratio_scan(logf, eps, tol)
    violations = int(n_exceed)
    ratio_set: tuple[float, ...] = ()
    if density.two_level:
        violations += int(n_uncl)
        values = []
        if seen_off:
            values.append(math.exp(-eps))
        if seen_zero:
            values.append(1.0)
        if seen_off:
            values.append(math.exp(eps))
        ratio_set = tuple(values)
    return RatioReport(
        epsilon=eps,
        max_log_ratio=float(max_abs),
        min_log_ratio=-float(max_abs),
        grid_points=int(f.size),
        violations=violations,
        unclassified=int(n_uncl) if density.two_level else 0,
        ratio_set=ratio_set,
    )


# ---------------------------------------------------------------------------
# quadrature oracles


class VarianceOracleResult(NamedTuple):
    value: float
    abs_error_estimate: float


def _panel_edges(cuts: np.ndarray, n_panels: int) -> np.ndarray:
    lengths = np.diff(cuts)
    counts = np.maximum(1, np.round(n_panels * lengths / lengths.sum()).astype(int))
    return np.concatenate(
        [np.linspace(a, b, c + 1)[:-1] for a, b, c in zip(cuts[:-1], cuts[1:], counts)]
        + [cuts[-1:]]
    )


def integrate(
    density: MechanismDensity,
    x: float,
    g: Callable[[np.ndarray], np.ndarray],
    support: tuple[float, float] | None = None,
    n_panels: int = 1000,
) -> float:
    """Integrate ``g(z) * pdf(x, z)`` over ``support``.

    Panels are snapped to the density's breakpoints and each uses 5-point
    Gauss-Legendre, whose nodes are strictly interior. A piecewise-constant
    density times a polynomial of degree <= 9 is therefore integrated exactly.
    """
    lo, hi = density.support(x) if support is None else support
    bp = np.asarray(density.breakpoints(x), dtype=np.float64)
    cuts = np.unique(np.concatenate([[lo, hi], bp[(bp > lo) & (bp < hi)]]))
    edges = _panel_edges(cuts, n_panels)
    a, b = edges[:-1], edges[1:]
    if np.any(b <= a):
        keep = b > a
        a, b = a[keep], b[keep]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    vals = (g(nodes) * density.pdf(x, nodes)).reshape(-1, _GL_NODES.size)
    panel = half * (vals @ _GL_WEIGHTS)
    return math.fsum(panel)


def mass_oracle(density, x, support=None, n_panels=1000) -> float:
    return integrate(density, x, np.ones_like, support, n_panels)


def mean_oracle(density, x, support=None, n_panels=1000) -> float:
    return integrate(density, x, lambda z: z, support, n_panels)


def variance_oracle(
    density: MechanismDensity,
    x: float,
    support: tuple[float, float] | None = None,
    n_panels: int = 1000,
    tol: float = 1e-9,
) -> VarianceOracleResult:
    """``E[(Z - x)^2]`` by breakpoint-aligned quadrature.

    The error estimate is the change when the panel count is halved.
    """
    if n_panels < 1000:
        raise InvalidParameter("n_panels must be at least 1000")

    def sq(z):
        return (z - x) ** 2

    fine = integrate(density, x, sq, support, n_panels)
    coarse = integrate(density, x, sq, support, n_panels // 2)
    err = abs(fine - coarse)
    if err > tol:
        raise ToleranceNotMet(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}")
    return VarianceOracleResult(fine, err)


def expected_noise_variance(
    density: MechanismDensity,
    input_pdf: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n_nodes: int = 16,
    n_panels: int = 1000,
) -> float:
    """``E_x[Var(noise | x)]`` for inputs distributed with ``input_pdf`` on ``[lo, hi]``.

    Outer Gauss-Legendre over ``x``, inner :func:`variance_oracle` at each node.
    """
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    xs = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    ws = 0.5 * (hi - lo) * weights * input_pdf(xs)
    inner = [variance_oracle(density, float(x), n_panels=n_panels).value for x in xs]
    return math.fsum(w * v for w, v in zip(ws, inner))


# ---------------------------------------------------------------------------
# asymptotics and efficiency


class Regime(str, enum.Enum):
    HIGH = "high"
    LOW = "low"


HIGH_PRIVACY_MAX_EPS = 0.01
LOW_PRIVACY_MIN_EPS = 15.0


def asymptote_check(
    regime: Regime, eps: float, mode: SolverMode = SolverMode.EXACT, delta: float = 1.0
) -> float:
    """Scaled worst-case Podium variance in a limiting regime.

    HIGH (``eps <= 0.01``) returns ``V * eps^2 / delta^2``, which tends to 4/3.
    LOW (``eps >= 15``) returns ``V * e^(2 eps / 3) / delta^2``; with
    ``s = eps/3`` this tends to 5/12.
    """
    regime = Regime(regime)
    params = PrivacyParams(eps, delta)
    if regime is Regime.HIGH and eps > HIGH_PRIVACY_MAX_EPS:
        raise RegimeMismatch(f"high-privacy check needs eps <= {HIGH_PRIVACY_MAX_EPS}, got {eps}")
    if regime is Regime.LOW and eps < LOW_PRIVACY_MIN_EPS:
        raise RegimeMismatch(f"low-privacy check needs eps >= {LOW_PRIVACY_MIN_EPS}, got {eps}")
    v = worst_case_variance(compute_shape(params, mode))
    if regime is Regime.HIGH:
        return v * eps * eps / (delta * delta)
    return v * math.exp(2.0 * eps / 3.0) / (delta * delta)


class EfficiencyRow(NamedTuple):
    epsilon: float
    pm3_over_pm: float
    pm0_over_pm_half: float
    pm_over_lm: float
    sm_over_lm: float
    pm0_over_sm: float
    pm_over_sm: float


def efficiency_row(eps: float, delta: float = 1.0) -> EfficiencyRow:
    params = PrivacyParams(eps, delta)
    exact = compute_shape(params, SolverMode.EXACT)
    approx = compute_shape(params, SolverMode.APPROXIMATE)
    pm = worst_case_variance(exact)
    pm0 = center_variance(exact)
    pm3 = worst_case_variance(approx)
    lm = laplace_variance(params)
    sm = staircase_variance(params)
    return EfficiencyRow(
        epsilon=params.epsilon,
        pm3_over_pm=relative_efficiency(pm3, pm),
        pm0_over_pm_half=relative_efficiency(pm0, pm),
        pm_over_lm=relative_efficiency(pm, lm),
        sm_over_lm=relative_efficiency(sm, lm),
        pm0_over_sm=relative_efficiency(pm0, sm),
        pm_over_sm=relative_efficiency(pm, sm),
    )


def efficiency_table(eps_list: Sequence[float], delta: float = 1.0) -> list[EfficiencyRow]:
    """Relative efficiencies; Podium columns use the worst case unless marked ``pm0``."""
    return [efficiency_row(eps, delta) for eps in eps_list]
