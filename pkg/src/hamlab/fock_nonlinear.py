"""
Truncated Fock space: standard and nonlinear ladder operators, a second
scalar product and the two thermal traces.

Operators are dense ``N x N`` matrices in the number basis ``|0>, ..., |N-1>``.
Truncation corrupts the top rows of operator products, so identities are
asserted only on ``n <= N - 1 - g`` (the guard band g defaults to 2).

Two orderings of the nonlinear annihilator are supported:

    f_first   A = f(n) a      A|n> = f(n-1) sqrt(n) |n-1>
    f_last    A = a f(n)      A|n> = f(n)   sqrt(n) |n-1>

Under f_last, ``[A, A^dagger] = Phi(n+1) - Phi(n)`` with ``Phi(x) = x f(x)^2``;
under f_first the same holds with ``Phi(x) = x f(x-1)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StructureError, WeightOverflowError

ORDERINGS = ("f_first", "f_last")

#: Largest log-weight difference exponentiated before declaring overflow.
_LOG_LIMIT = 700.0


@dataclass(frozen=True)
class FockSpace:
    cutoff: int
    guard: int = 2

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 8:
            raise ValueError(f"cutoff must be an integer >= 8, got {self.cutoff}")
        if int(self.guard) != self.guard or not 0 <= self.guard < self.cutoff - 1:
            raise ValueError(f"guard band must be an integer in [0, cutoff-1), got {self.guard}")

    @property
    def top(self) -> int:
        """Largest level on which identities are asserted."""
        return self.cutoff - 1 - self.guard

    def block(self, M: np.ndarray) -> np.ndarray:
        k = self.top + 1
        return np.asarray(M)[:k, :k]


@dataclass(frozen=True)
class LadderOps:
    space: FockSpace
    a: np.ndarray
    a_dagger: np.ndarray
    number: np.ndarray

    @property
    def N(self) -> int:
        return self.space.cutoff


def _frozen(M: np.ndarray) -> np.ndarray:
    M = np.array(M, dtype=float)
    M.setflags(write=False)
    return M


def build_ladder(N: int, guard: int = 2) -> LadderOps:
    """``a|n> = sqrt(n)|n-1>``, ``a^dagger = a^T``, ``n = a^dagger a``."""
    space = FockSpace(N, guard)
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1)
    return LadderOps(space, _frozen(a), _frozen(a.T), _frozen(np.diag(np.arange(N, dtype=float))))


def oscillator_hamiltonian(ops: LadderOps) -> np.ndarray:
    """``a^dagger a + 1/2``."""
    return ops.a_dagger @ ops.a + 0.5 * np.eye(ops.N)


def heisenberg_residual(ops: LadderOps, t_grid, lowering: np.ndarray | None = None,
                        relative: bool = False) -> float:
    """Max over t of ``|| e^{iHt} L e^{-iHt} - e^{-it} L ||`` on the guard-banded block.

    ``H = a^dagger a + 1/2`` and L is ``a`` unless another lowering operator
    (for instance a nonlinear A) is passed. The propagators come from a dense
    eigendecomposition of H. With ``relative=True`` the residual is divided
    by ``max(1, ||L||)``.
    """
    L = ops.a if lowering is None else np.asarray(lowering, float)
    evals, V = np.linalg.eigh(oscillator_hamiltonian(ops))
    worst = 0.0
    for t in np.atleast_1d(np.asarray(t_grid, float)):
        U = (V * np.exp(-1j * evals * t)) @ V.T
        moved = U.conj().T @ L @ U
        diff = ops.space.block(moved - np.exp(-1j * t) * L)
        worst = max(worst, float(np.linalg.norm(diff, 2)))
    if relative:
        worst /= max(1.0, float(np.linalg.norm(L, 2)))
    return worst


def _f_values(f: Callable, N: int) -> np.ndarray:
    vals = np.array([float(f(k)) for k in range(N + 1)])
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise StructureError("f must be positive and finite on 0..N")
    if np.any(np.diff(vals) < -1e-12 * np.abs(vals[1:])):
        raise StructureError("f must be nondecreasing on 0..N")
    return vals


@dataclass(frozen=True)
class NonlinearOps:
    ladder: LadderOps
    f: Callable
    ordering: str
    f_values: np.ndarray
    A: np.ndarray
    A_dagger: np.ndarray
    label: str = "custom"

    def phi(self, x) -> np.ndarray:
        """``Phi(x) = x f(x)^2`` (f_last) or ``x f(x-1)^2`` (f_first), on integers."""
        x = np.asarray(x, int)
        shift = 1 if self.ordering == "f_first" else 0
        fx = np.where(x - shift >= 0, self.f_values[np.clip(x - shift, 0, None)], 0.0)
        return x * fx**2


def build_nonlinear(ops: LadderOps, f: Callable, ordering: str = "f_first", label: str = "custom") -> NonlinearOps:
    """Nonlinear ladder pair; ``A_dagger`` is the transpose (standard adjoint)."""
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    fv = _f_values(f, ops.N)
    F = np.diag(fv[: ops.N])
    A = F @ ops.a if ordering == "f_first" else ops.a @ F
    return NonlinearOps(ops, f, ordering, _frozen(fv), _frozen(A), _frozen(A.T), label)


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def deformed_commutator_residual(nl: NonlinearOps, relative: bool = False) -> float:
    """Max deviation of ``[A, A^dagger]`` from ``Phi(n+1) - Phi(n)`` on the guard-banded block.

    With ``relative=True`` the deviation is divided by ``max(1, max Phi)`` on
    the block, the size of the products being subtracted.
    """
    n = np.arange(nl.ladder.N)
    target = np.diag(nl.phi(n + 1) - nl.phi(n))
    diff = nl.ladder.space.block(commutator(nl.A, nl.A_dagger) - target)
    worst = float(np.max(np.abs(diff)))
    if relative:
        worst /= max(1.0, float(np.max(nl.phi(np.arange(nl.ladder.space.top + 2)))))
    return worst


@dataclass(frozen=True)
class SecondStructure:
    """Diagonal metric ``G2 = diag(exp(w_n))`` making ``c_n |n>`` orthonormal.

    ``log_scale[n] = log c_n`` is the log of the factor carrying the standard
    number state to the second one: ``prod_{k<n} f(k)`` for f_first and
    ``prod_{k=1..n} f(k)`` for f_last, and ``w_n = -2 log c_n``. The vacuum
    has unit norm in both products.
    """

    log_scale: np.ndarray
    ordering: str

    @property
    def log_weights(self) -> np.ndarray:
        return -2.0 * self.log_scale

    @property
    def size(self) -> int:
        return self.log_scale.size

    def metric(self) -> np.ndarray:
        w = self.log_weights
        if np.max(np.abs(w)) > _LOG_LIMIT:
            raise WeightOverflowError(
                "metric entries overflow; use log_weights, a smaller cutoff or a slower-growing f"
            )
        return np.diag(np.exp(w))

    def inner(self, x, y) -> complex:
        """``<x, y>_2`` in number-basis coordinates."""
        x, y = np.asarray(x, complex), np.asarray(y, complex)
        return complex(np.sum(x.conj() * y * np.exp(self.log_weights)))


def second_structure(nl: NonlinearOps) -> SecondStructure:
    logf = np.log(nl.f_values)
    N = nl.ladder.N
    if nl.ordering == "f_first":
        log_c = np.concatenate([[0.0], np.cumsum(logf[: N - 1])])
    else:
        log_c = np.concatenate([[0.0], np.cumsum(logf[1:N])])
    log_c.setflags(write=False)
    return SecondStructure(log_c, nl.ordering)


def _check_sizes(nl: NonlinearOps, structure: SecondStructure) -> None:
    if structure.size != nl.ladder.N:
        raise StructureError(f"structure has {structure.size} levels, operators have {nl.ladder.N}")
    if structure.ordering != nl.ordering:
        raise StructureError("structure and operators were built with different orderings")


def adjoint_in(structure: SecondStructure, X: np.ndarray) -> np.ndarray:
    """``G2^-1 X^dagger G2``; entries rescaled by ``exp(w_n - w_m)`` on nonzeros only."""
    Xd = np.asarray(X).conj().T
    w = structure.log_weights
    out = np.zeros_like(Xd)
    rows, cols = np.nonzero(Xd)
    delta = w[cols] - w[rows]
    if delta.size and np.max(delta) > _LOG_LIMIT:
        raise WeightOverflowError(
            f"weight ratio exp({np.max(delta):.0f}) overflows; use a smaller cutoff or a slower-growing f"
        )
    out[rows, cols] = Xd[rows, cols] * np.exp(delta)
    return out


def second_adjoint(ops: LadderOps, nl: NonlinearOps, structure: SecondStructure) -> np.ndarray:
    """Adjoint of ``A^dagger`` in the second product, ``G2^-1 (A^dagger)^dagger G2``.

    Under f_first this equals ``(1/f(n)) a``.
    """
    if nl.ladder.N != ops.N:
        raise StructureError("nonlinear operators were built on a different Fock space")
    _check_sizes(nl, structure)
    return adjoint_in(structure, nl.A_dagger)


def tilde_hamiltonian(nl: NonlinearOps, structure: SecondStructure) -> np.ndarray:
    """``A^dagger (A^dagger)_2^dagger + 1/2``."""
    B = second_adjoint(nl.ladder, nl, structure)
    return nl.A_dagger @ B + 0.5 * np.eye(nl.ladder.N)


def thermal_operator(N: int, beta: float) -> np.ndarray:
    """``exp(-beta (n + 1/2))`` on the truncated space (diagonal)."""
    if not beta > 0:
        raise ValueError(f"beta must be positive for a trace-class operator, got {beta}")
    return np.diag(np.exp(-beta * (np.arange(N) + 0.5)))


def truncation_tail(N: int, beta: float) -> float:
    """``sum_{n >= N} exp(-beta (n + 1/2))``: what the cutoff removes from the trace."""
    return float(np.exp(-beta * (N + 0.5)) / -np.expm1(-beta))


def oscillator_partition(beta: float) -> float:
    """``1 / (2 sinh(beta/2))``."""
    return float(1.0 / (2.0 * np.sinh(0.5 * beta)))


def trace_pair(op_matrix, structure: SecondStructure, beta: float | None = None,
               N: int | None = None) -> tuple[float, float]:
    """``(Tr_1, Tr_2)`` over bases orthonormal in the first and second products.

    ``Tr_2 = sum_n <n_2 | G2 O | n_2>`` with ``|n_2> = c_n |n>``; the factor
    ``c_n^2 exp(w_n)`` is formed in log space. With ``op_matrix=None`` the
    operator is ``exp(-beta H)``, built from ``beta`` and ``N``.
    """
    if op_matrix is None:
        if beta is None:
            raise ValueError("beta is required when op_matrix is not given")
        op_matrix = thermal_operator(structure.size if N is None else N, beta)
    elif beta is not None and not beta > 0:
        raise ValueError(f"beta must be positive for a trace-class operator, got {beta}")
    O = np.asarray(op_matrix)
    if O.shape != (structure.size, structure.size):
        raise StructureError(f"operator shape {O.shape} does not match structure size {structure.size}")
    tr1 = float(np.real(np.trace(O)))
    if np.max(np.abs(structure.log_weights)) <= _LOG_LIMIT:
        # explicit basis vectors: columns of diag(c_n)
        C = np.diag(np.exp(structure.log_scale))
        tr2 = float(np.real(np.trace(C.conj().T @ structure.metric() @ O @ C)))
    else:
        factor = np.exp(2.0 * structure.log_scale + structure.log_weights)
        tr2 = float(np.sum(factor * np.real(np.diag(O))))
    return tr1, tr2


def scale_spread(structure: SecondStructure) -> float:
    """``max_n c_n / min_n c_n``: 1 only when the second product is a multiple of the first."""
    return float(np.exp(np.max(structure.log_scale) - np.min(structure.log_scale)))


F_CATALOG: dict[str, Callable[[float], float]] = {
    "one": lambda n: 1.0,
    "one_plus_tanh": lambda n: 1.0 + np.tanh(n),
    "one_plus_n": lambda n: 1.0 + n,
    "exp_tenth": lambda n: np.exp(n / 10.0),
}

F_FORMULAS = {
    "one": "1",
    "one_plus_tanh": "1 + tanh(n)",
    "one_plus_n": "1 + n",
    "exp_tenth": "exp(n/10)",
}


def get_f(label: str) -> Callable[[float], float]:
    try:
        return F_CATALOG[label]
    except KeyError:
        raise StructureError(f"unknown f {label!r}; available: {list(F_CATALOG)}") from None


__all__ = [
    "F_CATALOG",
    "F_FORMULAS",
    "FockSpace",
    "LadderOps",
    "NonlinearOps",
    "ORDERINGS",
    "SecondStructure",
    "adjoint_in",
    "build_ladder",
    "build_nonlinear",
    "commutator",
    "deformed_commutator_residual",
    "get_f",
    "heisenberg_residual",
    "oscillator_hamiltonian",
    "oscillator_partition",
    "scale_spread",
    "second_adjoint",
    "second_structure",
    "thermal_operator",
    "truncation_tail",
    "tilde_hamiltonian",
    "trace_pair",
]
