import math

import numpy as np
import pytest
from conftest import load_table, parse_eps

from podium_dp import PrivacyParams
from podium_dp.errors import InvalidParameter, RegimeMismatch, ToleranceNotMet, ZeroDensity
from podium_dp.podium import SolverMode, center_variance, compute_shape, variance_at, worst_case_variance
from podium_dp.verify import (
    LaplaceDensity,
    PodiumDensity,
    Regime,
    TruncatedLaplaceDensity,
    asymptote_check,
    certify_ratio,
    efficiency_row,
    efficiency_table,
    expected_noise_variance,
    integrate,
    mass_oracle,
    mean_oracle,
    variance_oracle,
)

P1 = PrivacyParams(1.0, 1.0)


def podium(eps=1.0, mode=SolverMode.EXACT, delta=1.0):
    return PodiumDensity(compute_shape(PrivacyParams(eps, delta), mode))


# --- certification ----------------------------------------------------------


@pytest.mark.parametrize("mode", list(SolverMode))
@pytest.mark.parametrize("eps", [0.5, math.log(3)])
def test_podium_ratio_set(eps, mode):
    dens = podium(eps, mode)
    sh = dens.shape
    rep = certify_ratio(dens, sh.params, np.linspace(-0.5, 0.5, 21), np.linspace(sh.lo, sh.hi, 2001))
    assert rep.certified
    assert rep.unclassified == 0
    assert rep.ratio_set == pytest.approx((math.exp(-eps), 1.0, math.exp(eps)), rel=1e-12)
    assert rep.max_log_ratio == pytest.approx(eps, rel=1e-9)


def test_laplace_certified():
    rep = certify_ratio(LaplaceDensity(P1), P1, np.linspace(-0.5, 0.5, 11), np.linspace(-20, 20, 4001))
    assert rep.certified
    assert rep.max_log_ratio == pytest.approx(1.0, rel=1e-9)
    assert rep.ratio_set == ()


def test_truncated_laplace_rejected():
    dens = TruncatedLaplaceDensity(P1)
    with pytest.raises(ZeroDensity):
        certify_ratio(dens, P1, np.linspace(-0.5, 0.5, 11), np.linspace(-4, 4, 801))


def test_certify_flags_ratio_beyond_budget():
    # A density built for eps=2 exceeds an eps=1 budget.
    dens = podium(2.0)
    rep = certify_ratio(dens, P1, np.linspace(-0.5, 0.5, 11), np.linspace(dens.shape.lo, dens.shape.hi, 1001))
    assert not rep.certified
    assert rep.violations > 0


def test_certify_rejects_inputs_outside_domain():
    with pytest.raises(InvalidParameter):
        certify_ratio(podium(), P1, [0.0, 0.6], [0.0])


# --- quadrature -------------------------------------------------------------


def test_oracle_center_and_extreme():
    dens = podium()
    assert variance_oracle(dens, 0.0).value == pytest.approx(0.9334195, abs=1e-7)
    assert variance_oracle(dens, 0.0).value == pytest.approx(0.93344, abs=1e-4)
    assert variance_oracle(dens, 0.5).value == pytest.approx(1.2664203, abs=1e-7)
    assert variance_oracle(dens, 0.5).value == pytest.approx(1.26645, abs=1e-4)
    assert variance_oracle(dens, 0.0).value == pytest.approx(center_variance(dens.shape), rel=1e-12)
    assert variance_oracle(dens, 0.5).value == pytest.approx(worst_case_variance(dens.shape), rel=1e-12)


def test_oracle_interior_between_extremes():
    dens = podium()
    v = variance_oracle(dens, 0.25).value
    assert center_variance(dens.shape) < v < worst_case_variance(dens.shape)
    assert v == pytest.approx(variance_at(dens.shape, 0.25), abs=1e-9)


def test_oracle_is_stable_under_panel_doubling():
    dens = podium(0.7)
    for x in (-0.5, -0.13, 0.0, 0.31):
        a = variance_oracle(dens, x, n_panels=1000).value
        b = variance_oracle(dens, x, n_panels=2000).value
        assert abs(a - b) < 1e-12


def test_oracle_laplace():
    res = variance_oracle(LaplaceDensity(P1), 0.0, support=(-40, 40), n_panels=20000)
    assert res.value == pytest.approx(2.0, abs=1e-6)


def test_oracle_requires_enough_panels():
    with pytest.raises(InvalidParameter):
        variance_oracle(podium(), 0.0, n_panels=999)


def test_oracle_reports_unmet_tolerance():
    # Panels several scale lengths wide cannot resolve the exponential tails.
    with pytest.raises(ToleranceNotMet):
        variance_oracle(LaplaceDensity(P1), 0.0, support=(-4000, 4000), n_panels=1000)


def test_integrate_polynomial_exact():
    dens = podium(1.3)
    sh = dens.shape
    # E[Z^3] from the mixture of three uniforms.
    x = 0.2
    got = integrate(dens, x, lambda z: z**3)
    pdf_edges = dens.breakpoints(x)
    levels = [sh.d, sh.high_density, sh.d]
    want = sum(l * (b**4 - a**4) / 4 for l, a, b in zip(levels, pdf_edges[:-1], pdf_edges[1:]))
    assert got == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("x", [-0.5, -0.2, 0.0, 0.45, 0.5])
def test_mass_and_mean(x):
    dens = podium(2.2)
    assert mass_oracle(dens, x) == pytest.approx(1.0, abs=1e-13)
    assert mean_oracle(dens, x) == pytest.approx(x, abs=1e-12)


def test_expected_noise_variance_constant_input_pdf():
    # With a uniform input density the average lies between center and extreme.
    dens = podium()
    v = expected_noise_variance(dens, lambda x: np.ones_like(x), -0.5, 0.5)
    xs = np.linspace(-0.5, 0.5, 20001)
    brute = np.trapezoid([variance_at(dens.shape, float(x)) for x in xs], xs)
    assert v == pytest.approx(brute, rel=1e-7)


# --- asymptotics ------------------------------------------------------------


def test_asymptote_high_privacy():
    assert asymptote_check(Regime.HIGH, 0.001) == pytest.approx(4 / 3, rel=1e-3)


def test_asymptote_low_privacy():
    assert asymptote_check(Regime.LOW, 20.0, SolverMode.APPROXIMATE) == pytest.approx(5 / 12, rel=0.02)


@pytest.mark.parametrize("regime, eps", [(Regime.HIGH, 0.5), (Regime.LOW, 10.0)])
def test_asymptote_regime_mismatch(regime, eps):
    with pytest.raises(RegimeMismatch):
        asymptote_check(regime, eps)


# --- efficiency -------------------------------------------------------------


def test_efficiency_row_epsilon_one():
    row = efficiency_row(1.0)
    want = (1.0033, 0.7370, 0.6332, 0.9590, 0.4866, 0.6603)
    assert row[1:] == pytest.approx(want, abs=5e-4)


def test_efficiency_log3():
    row = efficiency_row(math.log(3))
    assert row.pm_over_sm == pytest.approx(0.6590, abs=5e-4)
    assert row.pm_over_lm == pytest.approx(0.6266, abs=5e-4)


@pytest.mark.parametrize("row", load_table("efficiency_table.csv")[:-1], ids=lambda r: r["epsilon"])
def test_efficiency_table_cells(row):
    got = efficiency_row(parse_eps(row["epsilon"]))
    for key, value in row.items():
        if key != "epsilon":
            assert getattr(got, key) == pytest.approx(float(value), abs=5e-4), key


def test_efficiency_table_is_rowwise():
    rows = efficiency_table([0.1, 5.0])
    assert [r.epsilon for r in rows] == [0.1, 5.0]
    assert rows[1] == efficiency_row(5.0)
