import numpy as np
import pytest
from scipy.special import gamma

from hamlab.canonical_z import (
    EnsembleParams,
    ZEstimate,
    gaussian_nd_reference,
    ho_reference,
    relative_spread,
    run_invariance_experiment,
    shift_invariance_check,
    z_boundary,
    z_coordinate_change,
    z_deformed,
    z_direct,
    z_gaussian_nd,
    z_shell,
)
from hamlab.deformations import CoordinateChange, catalog, get_deformation
from hamlab.errors import ConvergenceError
from hamlab.period_lab import PeriodProfile
from hamlab.phase_flow import OscillatorFamilyND, make_system, random_spd


def quartic_z(beta, h=2 * np.pi):
    """Closed form for H = p^2/2 + q^4/4: sqrt(2 pi/beta) * 2 (4/beta)^(1/4) Gamma(5/4) / h."""
    return np.sqrt(2 * np.pi / beta) * 2 * (4 / beta) ** 0.25 * gamma(1.25) / h


def test_params_validation():
    with pytest.raises(ValueError):
        EnsembleParams(0.0)
    with pytest.raises(ValueError):
        EnsembleParams(1.0, h=-1.0)
    assert EnsembleParams(1.0).hbar == pytest.approx(1.0)


def test_estimate_must_be_positive():
    with pytest.raises(ConvergenceError):
        ZEstimate(0.0, "shell", 0.0)


def test_oscillator_reference():
    assert ho_reference(EnsembleParams(2.0), omega=0.5) == pytest.approx(1.0)
    assert ho_reference(EnsembleParams(1.0, h=1.0), omega=1.0) == pytest.approx(2 * np.pi)


@pytest.mark.parametrize("beta", [0.3, 1.0, 4.0])
def test_quartic_against_closed_form(beta):
    system = make_system("quartic")
    params = EnsembleParams(beta)
    ref = quartic_z(beta)
    assert z_direct(system, params).value == pytest.approx(ref, rel=1e-9)
    assert z_shell(system, params).value == pytest.approx(ref, rel=1e-8)


def test_non_default_planck_constant():
    system = make_system("ho")
    params = EnsembleParams(1.0, h=1.0)
    assert z_direct(system, params).value == pytest.approx(2 * np.pi, rel=1e-10)


def test_deformed_forms_agree_and_reproduce_oscillator():
    system = make_system("ho", omega=2.0)
    params = EnsembleParams(0.7)
    for d in catalog():
        est = z_deformed(system, d, params)
        assert est.value == pytest.approx(ho_reference(params, 2.0), rel=1e-8)
        assert est.metadata["form_gap_rel"] <= 1e-8


def test_scaled_deformation_changes_quartic_value():
    # f = 2x: Z_f(beta) = 2 Z(2 beta) = 2^(1/4) Z(beta) for the quartic
    system = make_system("quartic")
    params = EnsembleParams(1.0)
    ratio = z_deformed(system, get_deformation("scaled"), params).value / quartic_z(1.0)
    assert ratio == pytest.approx(2**0.25, rel=1e-8)


def test_coordinate_change_equality():
    change = CoordinateChange(get_deformation("affine_quadratic"))
    lhs, rhs = z_coordinate_change(change, EnsembleParams(1.5))
    assert lhs.value == pytest.approx(rhs.value, rel=1e-8)


def test_boundary_formula_oscillator_and_anharmonic():
    params = EnsembleParams(1.0)
    assert z_boundary(make_system("ho"), params).value == pytest.approx(1.0, rel=1e-10)
    # tau(0) = 2 pi for the anharmonic system, so the boundary formula still gives 1
    hq = make_system("ho_plus_quartic")
    bnd = z_boundary(hq, params).value
    shell = z_shell(hq, params).value
    assert bnd == pytest.approx(1.0, rel=1e-8)
    assert shell < 0.9 * bnd


def test_non_integrable_period_profile_rejected():
    E = np.geomspace(1e-3, 1e3, 30)
    prof = PeriodProfile(E, E**-1.5, "return_time")
    with pytest.raises(ConvergenceError, match="not integrable"):
        z_shell(make_system("ho"), EnsembleParams(1.0), prof)


def test_gaussian_family_is_independent_of_B():
    rng = np.random.default_rng(5)
    params = EnsembleParams(0.5, h=3.0)
    for n in (1, 2, 4):
        vals = [z_gaussian_nd(OscillatorFamilyND(random_spd(n, rng)), params).value for _ in range(10)]
        assert relative_spread(vals) <= 1e-10
        assert vals[0] == pytest.approx(gaussian_nd_reference(n, params), rel=1e-10)


def test_shift_law():
    out = shift_invariance_check(make_system("quartic"), EnsembleParams(2.0), 0.5)
    assert out["ratio"] == pytest.approx(out["expected_ratio"], rel=1e-9)
    assert out["U_shift"] == pytest.approx(0.5, abs=1e-6)
    # equipartition-style check: U = 1/(2 beta) + 1/(4 beta) for p^2/2 + q^4/4
    assert out["U"] == pytest.approx(0.75 / 2.0, rel=1e-5)


def test_invariance_experiment_verdicts():
    report = run_invariance_experiment(make_system("ho"), catalog(), [0.5, 2.0])
    assert report.verdict == "invariant_within_tol"
    assert report.max_relative_spread <= 1e-10
    keys = report.cells()
    assert keys[0] == (0.5, "direct", "")
    assert len(keys) == 2 * (3 + len(catalog()))

    bad = run_invariance_experiment(make_system("quartic"), [get_deformation("scaled")], [1.0])
    assert bad.verdict == "discrepancy"
    est = bad.estimates
    ratio = est[(1.0, "deformed", "scaled")].value / est[(1.0, "direct", "")].value
    assert ratio == pytest.approx(2**0.25, rel=1e-8)
    # tau diverges at the bottom of the quartic well, so the boundary value is far off
    assert est[(1.0, "boundary", "")].value > 10 * est[(1.0, "direct", "")].value


def test_relative_spread():
    assert relative_spread([1.0, 1.0]) == 0.0
    assert relative_spread([1.0, 1.5]) == pytest.approx(0.5)
