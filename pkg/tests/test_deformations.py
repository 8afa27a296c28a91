import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamlab.deformations import (
    CATALOG_LABELS,
    CoordinateChange,
    Deformation,
    catalog,
    coordinate_change_apply,
    deform_energy,
    deformed_volume_density,
    get_deformation,
    undeform_energy,
)
from hamlab.errors import DeformationRejected


def test_affine_quadratic_values():
    d = get_deformation("affine_quadratic")
    assert deform_energy(d, 2.0) == 6.0
    assert deformed_volume_density(d, 2.0) == 5.0
    assert undeform_energy(d, 6.0) == pytest.approx(2.0, rel=1e-15)


def test_beta0_scaling():
    d = get_deformation("exp_ramp", beta0=2.0)
    assert deform_energy(d, 0.5) == pytest.approx(np.expm1(1.0) / 2.0)
    assert deformed_volume_density(d, 0.5) == pytest.approx(np.e)


def test_catalog_passes_screen():
    labels = [d.label for d in catalog()]
    assert tuple(labels) == CATALOG_LABELS


def test_bounded_function_rejected():
    with pytest.raises(DeformationRejected, match="bounded above"):
        get_deformation("tanh")
    with pytest.raises(DeformationRejected, match="bounded above"):
        Deformation(lambda x: 1 - np.exp(-np.asarray(x, float)), lambda x: np.exp(-np.asarray(x, float)))


def test_other_screen_failures():
    with pytest.raises(DeformationRejected, match="must vanish"):
        Deformation(lambda x: np.asarray(x, float) + 1.0, lambda x: np.ones_like(np.asarray(x, float)))
    with pytest.raises(DeformationRejected, match="positive"):
        # unbounded but not monotone near the origin
        Deformation(lambda x: np.asarray(x, float) ** 2 - np.asarray(x, float) * 0.5,
                    lambda x: 2 * np.asarray(x, float) - 0.5)
    with pytest.raises(DeformationRejected, match="unknown deformation"):
        get_deformation("cubic")
    with pytest.raises(DeformationRejected, match="beta0"):
        get_deformation("identity", beta0=0.0)


def test_numerical_inverse_for_custom_deformation():
    d = Deformation(lambda x: np.asarray(x, float) ** 3 + np.asarray(x, float),
                    lambda x: 3 * np.asarray(x, float) ** 2 + 1, label="cubic")
    assert undeform_energy(d, 10.0) == pytest.approx(2.0, rel=1e-12)


def test_negative_energy_rejected():
    d = get_deformation("identity")
    with pytest.raises(ValueError):
        deform_energy(d, -1.0)
    with pytest.raises(ValueError):
        deformed_volume_density(d, -1.0)


def test_coordinate_change_example():
    change = CoordinateChange(get_deformation("identity"))
    assert coordinate_change_apply(change, (1.0, 0.0)) == (1.5, 0.0)
    assert change.H_prime(1.0, 0.0) == pytest.approx(1.125)
    assert change.jacobian_F(0.5) == pytest.approx(3.75)


@settings(max_examples=30, deadline=None)
@given(label=st.sampled_from(CATALOG_LABELS), H=st.floats(0.0, 20.0))
def test_round_trip(label, H):
    d = get_deformation(label)
    assert undeform_energy(d, deform_energy(d, H)) == pytest.approx(H, rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(label=st.sampled_from(CATALOG_LABELS), H=st.floats(0.01, 5.0))
def test_density_is_derivative(label, H):
    d = get_deformation(label)
    h = 1e-5 * H
    fd = (deform_energy(d, H + h) - deform_energy(d, H - h)) / (2 * h)
    assert deformed_volume_density(d, H) == pytest.approx(fd, rel=1e-7)


@settings(max_examples=30, deadline=None)
@given(label=st.sampled_from(["identity", "exp_ramp", "log1p"]), H=st.floats(0.01, 3.0))
def test_jacobian_is_derivative_of_new_energy(label, H):
    change = CoordinateChange(get_deformation(label))
    q = np.sqrt(2 * H)
    h = 1e-5 * H
    Hp = lambda E: change.H_prime(np.sqrt(2 * E), 0.0)  # noqa: E731
    fd = (Hp(H + h) - Hp(H - h)) / (2 * h)
    assert change.jacobian_F(H) == pytest.approx(fd, rel=1e-7)
    assert change.H_prime(q, 0.0) == pytest.approx((1 + change.phi(H)) ** 2 * H)


@settings(max_examples=30, deadline=None)
@given(q=st.floats(-3, 3), p=st.floats(-3, 3))
def test_jacobian_determinant_of_the_map(q, p):
    # the map pulls dQ ^ dP back to F(H) dq ^ dp
    change = CoordinateChange(get_deformation("exp_ramp"))
    H = change.base_energy(q, p)
    eps = 1e-6
    dQ_dq = (np.array(change.forward(q + eps, p)) - np.array(change.forward(q - eps, p))) / (2 * eps)
    dQ_dp = (np.array(change.forward(q, p + eps)) - np.array(change.forward(q, p - eps))) / (2 * eps)
    det = dQ_dq[0] * dQ_dp[1] - dQ_dq[1] * dQ_dp[0]
    assert det == pytest.approx(change.jacobian_F(H), rel=1e-6)
