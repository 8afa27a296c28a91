import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import beta as beta_fn

from hamlab.errors import CriticalPointError, MethodUnavailableError, NonCompactLevelSetError
from hamlab.period_lab import (
    PeriodProfile,
    enclosed_area,
    log_energy_grid,
    period,
    period_area_derivative,
    period_profile,
    period_quadrature,
    period_return_time,
    time_form_sample,
    time_function_ho,
)
from hamlab.phase_flow import HamiltonianSystem1D, make_system

# tau(1) for H = p^2/2 + q^4/4 is B(1/4, 1/2); frozen from scipy.special.beta
QUARTIC_TAU_1 = 5.244115108584239


def _radial_system():
    """H = g(r^2/2) with g(s) = s + s^2/2: non-separable, tau(E) = 2 pi / sqrt(1 + 2E)."""

    def energy(q, p):
        s = 0.5 * (q**2 + p**2)
        return s + 0.5 * s**2

    def gradient(q, p):
        s = 0.5 * (q**2 + p**2)
        return (1 + s) * q, (1 + s) * p

    return HamiltonianSystem1D(energy, gradient, label="radial")


def test_quartic_oracle_is_the_beta_function():
    assert beta_fn(0.25, 0.5) == pytest.approx(QUARTIC_TAU_1, rel=1e-15)


def test_energy_grid():
    grid = log_energy_grid(1e-3, 1e3, 33)
    assert grid[0] == pytest.approx(1e-3) and grid[-1] == pytest.approx(1e3)
    assert grid.size == 199
    with pytest.raises(ValueError):
        log_energy_grid(1.0, 0.5)


@pytest.mark.parametrize("omega", [1.0, 2.0])
def test_oscillator_period_all_methods(omega):
    system = make_system("ho", omega=omega)
    for E in (1e-3, 1.0, 1e3):
        assert period_return_time(system, E) == pytest.approx(2 * np.pi / omega, rel=1e-9)
        assert period_quadrature(system, E) == pytest.approx(2 * np.pi / omega, rel=1e-13)
        assert period_area_derivative(system, E) == pytest.approx(2 * np.pi / omega, rel=1e-8)


def test_quartic_period_closed_form_and_scaling():
    system = make_system("quartic")
    assert period_quadrature(system, 1.0) == pytest.approx(QUARTIC_TAU_1, rel=1e-13)
    assert period_return_time(system, 1.0) == pytest.approx(QUARTIC_TAU_1, rel=1e-9)
    assert period(system, 16.0) / period(system, 1.0) == pytest.approx(0.5, rel=1e-13)


def test_anharmonic_small_energy_limit():
    tau = period(make_system("ho_plus_quartic"), 1e-6)
    assert tau == pytest.approx(2 * np.pi, rel=1e-5)
    assert tau < 2 * np.pi


def test_non_separable_system():
    system = _radial_system()
    with pytest.raises(MethodUnavailableError):
        period_quadrature(system, 1.0)
    for E in (0.1, 1.0, 10.0):
        expected = 2 * np.pi / np.sqrt(1 + 2 * E)
        assert period(system, E) == pytest.approx(expected, rel=1e-9)
        assert period_area_derivative(system, E) == pytest.approx(expected, rel=1e-7)


def test_period_rejects_bad_energy_and_method():
    system = make_system("ho")
    with pytest.raises(NonCompactLevelSetError):
        period_return_time(system, 0.0)
    with pytest.raises(ValueError, match="unknown period method"):
        period(system, 1.0, method="fourier")


def test_enclosed_area():
    assert enclosed_area(make_system("ho"), 1.0) == pytest.approx(2 * np.pi, rel=1e-13)
    assert enclosed_area(make_system("ho", omega=2.0), 3.0) == pytest.approx(3 * np.pi, rel=1e-13)
    assert enclosed_area(make_system("ho"), 0.0) == 0.0
    with pytest.raises(NonCompactLevelSetError):
        enclosed_area(make_system("ho"), -1.0)


def test_quartic_area_scaling():
    # A(E) is proportional to E^(3/4)
    system = make_system("quartic")
    assert enclosed_area(system, 16.0) / enclosed_area(system, 1.0) == pytest.approx(8.0, rel=1e-12)


def test_time_function_examples():
    assert time_function_ho(1.0, 1.0, (0.0, 1.0)) == 0.0
    assert time_function_ho(1.0, 1.0, (1.0, 0.0)) == pytest.approx(np.pi / 2)
    assert time_function_ho(1.0, 1.0, (0.0, -1.0)) == pytest.approx(np.pi)
    assert time_function_ho(1.0, 2.0, (-1.0, 0.0)) == pytest.approx(3 * np.pi / 4)
    sample = time_form_sample(1.0, 1.0, (1.0, 0.0))
    assert sample.point == (1.0, 0.0)
    with pytest.raises(CriticalPointError):
        time_function_ho(1.0, 1.0, (0.0, 0.0))


@settings(max_examples=20, deadline=None)
@given(q=st.floats(0.05, 3.0), p=st.floats(-3.0, 3.0), dt=st.floats(0.01, 1.0))
def test_time_function_advances_with_the_flow(q, p, dt):
    # the oscillator flow rotates clockwise; t increases by dt along it
    c, s = np.cos(dt), np.sin(dt)
    q1, p1 = c * q + s * p, -s * q + c * p
    t0 = time_function_ho(1.0, 1.0, (q, p))
    t1 = time_function_ho(1.0, 1.0, (q1, p1))
    assert (t1 - t0) % (2 * np.pi) == pytest.approx(dt, abs=1e-12)


def test_profile_interpolation_and_tails():
    system = make_system("quartic")
    prof = period_profile(system, emin=1e-2, emax=1e2, per_decade=8)
    for E in (0.037, 1.0, 55.0):
        assert prof(E) == pytest.approx(QUARTIC_TAU_1 * E**-0.25, rel=1e-6)
    assert prof.low_exponent == pytest.approx(-0.25, abs=1e-9)
    assert prof.high_exponent == pytest.approx(-0.25, abs=1e-9)
    assert prof(1e-5) == pytest.approx(QUARTIC_TAU_1 * 1e-5**-0.25, rel=1e-8)


def test_profile_validation():
    with pytest.raises(ValueError):
        PeriodProfile(np.array([1.0, 0.5]), np.array([1.0, 1.0]), "return_time")
    with pytest.raises(ValueError):
        PeriodProfile(np.array([1.0, 2.0]), np.array([1.0, -1.0]), "return_time")
    with pytest.raises(ValueError):
        PeriodProfile(np.array([1.0, 2.0]), np.array([1.0, 1.0]), "guess")


def test_profile_independent_of_workers():
    system = make_system("ho_plus_quartic")
    a = period_profile(system, emin=0.1, emax=10.0, per_decade=3, workers=1)
    b = period_profile(system, emin=0.1, emax=10.0, per_decade=3, workers=3)
    assert np.array_equal(a.periods, b.periods)


@settings(max_examples=10, deadline=None)
@given(logE=st.floats(-2.0, 2.0))
def test_return_time_matches_quadrature(logE):
    system = make_system("ho_plus_quartic")
    E = 10.0**logE
    assert period_return_time(system, E) == pytest.approx(period_quadrature(system, E), rel=1e-8)


@settings(max_examples=10, deadline=None)
@given(logE=st.floats(-3.0, 3.0))
def test_period_is_area_derivative(logE):
    system = make_system("quartic")
    E = 10.0**logE
    assert period_area_derivative(system, E) == pytest.approx(period_quadrature(system, E), rel=1e-7)
