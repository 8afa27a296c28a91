import numpy as np
import pytest

from hamlab.errors import StructureError, WeightOverflowError
from hamlab.fock_nonlinear import (
    F_CATALOG,
    FockSpace,
    adjoint_in,
    build_ladder,
    build_nonlinear,
    commutator,
    deformed_commutator_residual,
    get_f,
    heisenberg_residual,
    oscillator_partition,
    scale_spread,
    second_adjoint,
    second_structure,
    thermal_operator,
    tilde_hamiltonian,
    trace_pair,
    truncation_tail,
)

TANH = F_CATALOG["one_plus_tanh"]
GROWING = ["one_plus_tanh", "one_plus_n", "exp_tenth"]


def test_space_validation():
    with pytest.raises(ValueError):
        FockSpace(4)
    assert FockSpace(32).top == 29


def test_ladder_matrix_elements():
    ops = build_ladder(16)
    vac = np.zeros(16)
    vac[0] = 1.0
    assert np.all(ops.a @ vac == 0.0)
    assert (ops.a_dagger @ vac)[1] == 1.0
    assert np.allclose(ops.a_dagger @ ops.a, ops.number)
    c = np.diag(commutator(ops.a, ops.a_dagger))
    assert np.allclose(c[:-1], 1.0, atol=1e-12)
    assert c[-1] == pytest.approx(-15.0)


def test_heisenberg_motion():
    ops = build_ladder(32)
    assert heisenberg_residual(ops, [0.0]) == 0.0
    assert heisenberg_residual(ops, [2 * np.pi]) <= 1e-10
    A = build_nonlinear(ops, TANH, "f_first").A
    assert heisenberg_residual(ops, [0.3, 2 * np.pi, 7.0], A) <= 1e-10


def test_nonlinear_construction():
    ops = build_ladder(16)
    assert np.array_equal(build_nonlinear(ops, F_CATALOG["one"]).A, ops.a)
    first = build_nonlinear(ops, TANH, "f_first")
    assert first.A[2, 3] == pytest.approx(np.sqrt(3) * (1 + np.tanh(2)), rel=1e-15)
    last = build_nonlinear(ops, TANH, "f_last")
    assert last.A[2, 3] == pytest.approx(np.sqrt(3) * (1 + np.tanh(3)), rel=1e-15)
    assert np.array_equal(first.A_dagger, first.A.T)


def test_nonlinear_validation():
    ops = build_ladder(8)
    with pytest.raises(StructureError, match="positive"):
        build_nonlinear(ops, lambda n: n - 1.0)
    with pytest.raises(StructureError, match="nondecreasing"):
        build_nonlinear(ops, lambda n: 1.0 / (1.0 + n))
    with pytest.raises(ValueError, match="ordering"):
        build_nonlinear(ops, TANH, "middle")
    with pytest.raises(StructureError, match="available"):
        get_f("sqrt")


@pytest.mark.parametrize("label", GROWING)
def test_deformed_commutator_under_f_last(label):
    ops = build_ladder(32)
    nl = build_nonlinear(ops, F_CATALOG[label], "f_last")
    assert deformed_commutator_residual(nl) <= 1e-10


def test_deformed_commutator_explicit_phi():
    ops = build_ladder(32)
    nl = build_nonlinear(ops, TANH, "f_last")
    C = np.diag(commutator(nl.A, nl.A_dagger))
    phi = lambda x: x * (1 + np.tanh(x)) ** 2  # noqa: E731
    for n in range(30):
        assert C[n] == pytest.approx(phi(n + 1) - phi(n), abs=1e-12)


def test_f_first_carries_shifted_phi():
    # with A = f(n) a the literal Phi(x) = x f(x)^2 is off by one step
    ops = build_ladder(32)
    nl = build_nonlinear(ops, TANH, "f_first")
    C = np.diag(commutator(nl.A, nl.A_dagger))
    phi = lambda x: x * (1 + np.tanh(x)) ** 2  # noqa: E731
    assert abs(C[3] - (phi(4) - phi(3))) > 1e-3
    assert deformed_commutator_residual(nl) <= 1e-10


def test_second_structure_weights():
    ops = build_ladder(16)
    nl = build_nonlinear(ops, TANH, "f_first")
    s = second_structure(nl)
    assert s.log_scale[0] == 0.0
    assert s.log_scale[3] == pytest.approx(np.log(TANH(0) * TANH(1) * TANH(2)))
    G2 = s.metric()
    for n in range(16):
        e = np.zeros(16)
        e[n] = np.exp(s.log_scale[n])
        assert e @ G2 @ e == pytest.approx(1.0, rel=1e-13)
        assert s.inner(e, e).real == pytest.approx(1.0, rel=1e-13)


def test_second_adjoint_f_one_is_a():
    ops = build_ladder(16)
    nl = build_nonlinear(ops, F_CATALOG["one"])
    assert np.allclose(second_adjoint(ops, nl, second_structure(nl)), ops.a)


@pytest.mark.parametrize("label", GROWING)
def test_second_adjoint_identities(label):
    N = 32
    ops = build_ladder(N)
    nl = build_nonlinear(ops, F_CATALOG[label], "f_first")
    s = second_structure(nl)
    B = second_adjoint(ops, nl, s)
    block = ops.space.block
    fv = nl.f_values
    for n in range(1, N):
        assert B[n - 1, n] == pytest.approx(np.sqrt(n) / fv[n - 1], rel=1e-12)
    assert np.max(np.abs(block(B - np.diag(1 / fv[:N]) @ ops.a))) <= 1e-10
    assert np.max(np.abs(block(commutator(B, nl.A_dagger) - np.eye(N)))) <= 1e-10


def test_adjoint_matches_dense_formula():
    ops = build_ladder(12)
    nl = build_nonlinear(ops, F_CATALOG["one_plus_n"], "f_first")
    s = second_structure(nl)
    G2 = s.metric()
    dense = np.linalg.solve(G2, nl.A_dagger.T @ G2)
    assert np.allclose(adjoint_in(s, nl.A_dagger), dense, rtol=1e-12, atol=0)


def test_weight_overflow_reported():
    ops = build_ladder(300)
    nl = build_nonlinear(ops, F_CATALOG["one_plus_n"], "f_first")
    s = second_structure(nl)
    with pytest.raises(WeightOverflowError, match="smaller cutoff"):
        s.metric()
    # the adjoint itself only needs neighbouring weight ratios
    B = second_adjoint(ops, nl, s)
    assert B[9, 10] == pytest.approx(np.sqrt(10) / 10.0)
    with pytest.raises(WeightOverflowError):
        adjoint_in(s, np.ones((300, 300)))


@pytest.mark.parametrize("label", ["one"] + GROWING)
def test_tilde_hamiltonian(label):
    N = 32
    ops = build_ladder(N)
    nl = build_nonlinear(ops, F_CATALOG[label], "f_first")
    Ht = tilde_hamiltonian(nl, second_structure(nl))
    block = ops.space.block
    assert np.max(np.abs(block(Ht - ops.number - 0.5 * np.eye(N)))) <= 1e-10
    levels = np.sort(np.linalg.eigvals(block(Ht)).real)
    assert np.max(np.abs(levels - (np.arange(N - 2) + 0.5))) <= 1e-10


def test_trace_examples():
    ops = build_ladder(64)
    s = second_structure(build_nonlinear(ops, TANH))
    tr1, tr2 = trace_pair(None, s, 1.0)
    assert abs(tr1 - tr2) <= 1e-12
    assert tr1 == pytest.approx(0.9595174, abs=1e-7)
    assert abs(tr1 - 1 / (2 * np.sinh(0.5))) <= 1e-10
    s1 = second_structure(build_nonlinear(ops, F_CATALOG["one"]))
    assert trace_pair(None, s1, 1.0)[1] == pytest.approx(tr2, rel=1e-14)
    big = trace_pair(None, s, 20.0)[0]
    assert big == pytest.approx(np.exp(-10.0), rel=1e-8)


def test_trace_requires_positive_beta():
    s = second_structure(build_nonlinear(build_ladder(16), TANH))
    with pytest.raises(ValueError):
        trace_pair(None, s, 0.0)
    with pytest.raises(ValueError):
        thermal_operator(16, -1.0)


@pytest.mark.parametrize("N", [32, 64])
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_two_traces_agree(N, beta):
    ops = build_ladder(N)
    for label in GROWING:
        s = second_structure(build_nonlinear(ops, F_CATALOG[label]))
        tr1, tr2 = trace_pair(None, s, beta)
        assert abs(tr1 - tr2) <= 1e-12
        assert oscillator_partition(beta) - tr1 == pytest.approx(truncation_tail(N, beta), rel=1e-6, abs=1e-15)


def test_trace_of_non_diagonal_operator():
    ops = build_ladder(16)
    s = second_structure(build_nonlinear(ops, F_CATALOG["exp_tenth"]))
    O = ops.a @ ops.a_dagger + 0.3 * ops.a
    tr1, tr2 = trace_pair(O, s)
    assert tr1 == pytest.approx(np.trace(O))
    assert tr2 == pytest.approx(tr1, rel=1e-13)


def test_truncation_convergence_rate():
    beta = 0.7
    errs = []
    for N in range(10, 30):
        s = second_structure(build_nonlinear(build_ladder(N), TANH))
        errs.append(oscillator_partition(beta) - trace_pair(None, s, beta)[0])
    ratios = np.array(errs[1:]) / np.array(errs[:-1])
    assert np.allclose(ratios, np.exp(-beta), rtol=1e-6)


@pytest.mark.parametrize("label", GROWING)
def test_second_product_is_not_a_rescaling(label):
    s = second_structure(build_nonlinear(build_ladder(32), F_CATALOG[label]))
    assert scale_spread(s) > 1 + 1e-6


def test_constant_f_gives_the_same_product():
    s = second_structure(build_nonlinear(build_ladder(32), F_CATALOG["one"]))
    assert scale_spread(s) == 1.0
