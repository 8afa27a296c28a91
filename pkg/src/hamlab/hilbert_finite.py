"""
Finite-dimensional quantum mechanics with interchangeable Hermitian structures.

A Hermitian structure is a positive-definite metric G realizing the inner
product ``<x, y>_G = x^dagger G y``. The identity is the standard structure.
With ``G = L L^dagger`` (Cholesky) the vectors ``chi = L^dagger psi`` are
orthonormal coordinates for G, and the realized coordinates are

    q = sqrt(2) Re(chi),  p = sqrt(2) Im(chi),

so ``psi = (q + i p) / sqrt(2)`` for the standard structure. In these
coordinates the Schrodinger flow is Hamilton's equations for the quadratic
functional ``<psi | H | psi>_G``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructureError

#: Tolerance for G = G^dagger.
HERMITIAN_TOL = 1e-12
#: Tolerance for G H = H^dagger G (relative to ||G|| ||H||).
SELF_ADJOINT_TOL = 1e-10


def _as_square(matrix, name: str) -> np.ndarray:
    M = np.array(matrix, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise StructureError(f"{name} must be a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise StructureError(f"{name} has non-finite entries")
    return M


@dataclass(frozen=True)
class HermitianStructure:
    """Inner product ``x^dagger G y`` with G Hermitian positive-definite."""

    metric: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        G = _as_square(self.metric, "metric")
        scale = max(1.0, float(np.max(np.abs(G))))
        if np.max(np.abs(G - G.conj().T)) > HERMITIAN_TOL * scale:
            raise StructureError(f"{self.label}: metric is not Hermitian")
        G = 0.5 * (G + G.conj().T)
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise StructureError(f"{self.label}: metric is not positive-definite") from None
        G.setflags(write=False)
        L.setflags(write=False)
        object.__setattr__(self, "metric", G)
        object.__setattr__(self, "_chol", L)

    @classmethod
    def standard(cls, n: int) -> "HermitianStructure":
        return cls(np.eye(n), label="standard")

    @property
    def dimension(self) -> int:
        return self.metric.shape[0]

    @property
    def cholesky(self) -> np.ndarray:
        """Lower-triangular L with ``G = L L^dagger``."""
        return self._chol

    def inner(self, x, y) -> complex:
        x, y = np.asarray(x, complex), np.asarray(y, complex)
        return complex(x.conj() @ self.metric @ y)

    def norm(self, x) -> float:
        return float(np.sqrt(max(self.inner(x, x).real, 0.0)))

    def adjoint(self, X) -> np.ndarray:
        """Adjoint relative to this structure, ``G^-1 X^dagger G``."""
        X = np.asarray(X, complex)
        return np.linalg.solve(self.metric, X.conj().T @ self.metric)

    def orthonormal_basis(self) -> np.ndarray:
        """Columns orthonormal for this structure: ``L^-dagger``."""
        return np.linalg.inv(self._chol.conj().T)

    def to_orthonormal(self, psi) -> np.ndarray:
        """``chi = L^dagger psi``."""
        return self._chol.conj().T @ np.asarray(psi, complex)

    def from_orthonormal(self, chi) -> np.ndarray:
        return np.linalg.solve(self._chol.conj().T, np.asarray(chi, complex))


@dataclass(frozen=True)
class QuantumSystem:
    """Hamiltonian matrix together with the structure it is self-adjoint for."""

    structure: HermitianStructure
    hamiltonian: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        H = _as_square(self.hamiltonian, "hamiltonian")
        G = self.structure.metric
        if H.shape != G.shape:
            raise StructureError(f"hamiltonian shape {H.shape} does not match metric {G.shape}")
        residual = np.max(np.abs(G @ H - H.conj().T @ G))
        scale = max(1.0, float(np.linalg.norm(G, 2) * np.linalg.norm(H, 2)))
        if residual > SELF_ADJOINT_TOL * scale:
            raise StructureError(
                f"{self.label}: hamiltonian is not self-adjoint for this structure (residual {residual:.2e})"
            )
        H.setflags(write=False)
        object.__setattr__(self, "hamiltonian", H)
        # Hermitian representative in G-orthonormal coordinates
        L = self.structure.cholesky
        Hc = L.conj().T @ H @ np.linalg.inv(L.conj().T)
        Hc = 0.5 * (Hc + Hc.conj().T)
        evals, evecs = np.linalg.eigh(Hc)
        object.__setattr__(self, "_eig", (evals, evecs))

    @property
    def dimension(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def spectrum(self) -> np.ndarray:
        return self._eig[0].copy()

    def with_structure(self, structure: HermitianStructure) -> "QuantumSystem":
        return QuantumSystem(structure, self.hamiltonian, self.label)


@dataclass(frozen=True)
class RealizedState:
    """Real coordinates of a state relative to a structure."""

    q: np.ndarray
    p: np.ndarray

    @classmethod
    def from_state(cls, structure: HermitianStructure, psi) -> "RealizedState":
        chi = structure.to_orthonormal(psi)
        return cls(np.sqrt(2.0) * chi.real, np.sqrt(2.0) * chi.imag)

    def to_state(self, structure: HermitianStructure) -> np.ndarray:
        chi = (np.asarray(self.q, float) + 1j * np.asarray(self.p, float)) / np.sqrt(2.0)
        return structure.from_orthonormal(chi)


def _check_state(state, n: int) -> np.ndarray:
    psi = np.asarray(state, complex).reshape(-1)
    if psi.size != n:
        raise ValueError(f"state has length {psi.size}, expected {n}")
    if not np.any(psi):
        raise ValueError("state must be nonzero")
    return psi


def quadratic_functional(system: QuantumSystem, state, operator=None):
    """``<psi | A | psi>`` in the system's structure; A defaults to the Hamiltonian.

    Returns a float when the imaginary part is at rounding level (A
    self-adjoint), otherwise the complex value.
    """
    psi = _check_state(state, system.dimension)
    A = system.hamiltonian if operator is None else np.asarray(operator, complex)
    value = complex(psi.conj() @ system.structure.metric @ A @ psi)
    scale = max(1.0, abs(value))
    if abs(value.imag) <= 1e-12 * scale * max(1.0, float(np.linalg.norm(A, 2))):
        return value.real
    return value


def evolution_operator(system: QuantumSystem, t: float) -> np.ndarray:
    """``exp(-i H t)`` built from the eigendecomposition in G-orthonormal coordinates."""
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    evals, V = system._eig
    Uc = (V * np.exp(-1j * evals * t)) @ V.conj().T
    L = system.structure.cholesky
    return np.linalg.solve(L.conj().T, Uc @ L.conj().T)


def schrodinger_flow(system: QuantumSystem, state, t: float) -> np.ndarray:
    """``psi(t) = exp(-i H t) psi(0)`` (hbar = 1)."""
    psi = np.asarray(state, complex).reshape(-1)
    if psi.size != system.dimension:
        raise ValueError(f"state has length {psi.size}, expected {system.dimension}")
    if t == 0:
        return psi.copy()
    return evolution_operator(system, t) @ psi


def _realized_functional(system: QuantumSystem, x: np.ndarray) -> float:
    n = system.dimension
    psi = RealizedState(x[:n], x[n:]).to_state(system.structure)
    return complex(psi.conj() @ system.structure.metric @ system.hamiltonian @ psi).real


def hamilton_form_check(system: QuantumSystem, state, tol: float = 1e-6, step: float = 1e-5) -> float:
    """Max residual between the Schrodinger velocity and ``(df/dp, -df/dq)``.

    The flow side is ``-i H psi`` mapped to realized coordinates; the
    gradient side is a central difference of the quadratic functional in
    those coordinates. ``tol`` is not used for the computation; the residual
    is returned for the caller to compare.
    """
    psi = _check_state(state, system.dimension)
    n = system.dimension
    structure = system.structure
    velocity = RealizedState.from_state(structure, -1j * (system.hamiltonian @ psi))
    flow = np.concatenate([velocity.q, velocity.p])
    r = RealizedState.from_state(structure, psi)
    x = np.concatenate([r.q, r.p])
    h = step * max(1.0, float(np.max(np.abs(x))))
    grad = np.empty(2 * n)
    for i in range(2 * n):
        e = np.zeros(2 * n)
        e[i] = h
        grad[i] = (_realized_functional(system, x + e) - _realized_functional(system, x - e)) / (2 * h)
    hamilton = np.concatenate([grad[n:], -grad[:n]])
    return float(np.max(np.abs(flow - hamilton)))


def flow_preservation_residual(system: QuantumSystem, structure: HermitianStructure,
                               times=(0.7, 1.0, 3.3)) -> float:
    """``max_t || U(t)^dagger G U(t) - G || / ||G||`` for the standard-structure flow."""
    G = structure.metric
    worst = 0.0
    for t in times:
        U = evolution_operator(system, t)
        worst = max(worst, float(np.max(np.abs(U.conj().T @ G @ U - G))))
    return worst / float(np.max(np.abs(G)))


def _eigensystem(hamiltonian) -> tuple[np.ndarray, np.ndarray]:
    H = _as_square(hamiltonian, "hamiltonian")
    if np.max(np.abs(H - H.conj().T)) > SELF_ADJOINT_TOL * max(1.0, float(np.max(np.abs(H)))):
        raise StructureError("hamiltonian must be self-adjoint for the standard structure")
    evals, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    gaps = np.diff(evals)
    spread = max(1.0, float(np.max(np.abs(evals))))
    if gaps.size and np.min(gaps) <= 1e-8 * spread:
        raise StructureError("degenerate spectrum: alternative structures need distinct eigenvalues")
    return evals, V


def structure_from_weights(hamiltonian, weights) -> HermitianStructure:
    """``G = V diag(w) V^dagger`` in the eigenbasis of the Hamiltonian."""
    _, V = _eigensystem(hamiltonian)
    w = np.asarray(weights, float)
    if w.shape != (V.shape[0],) or np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise StructureError(f"weights must be {V.shape[0]} positive numbers")
    G = (V * w) @ V.conj().T
    return HermitianStructure(0.5 * (G + G.conj().T), label="weighted")


def alternative_structures(hamiltonian, count: int, seed: int = 0, weights=None,
                           check_tol: float = 1e-10) -> list[HermitianStructure]:
    """Random metrics commuting with the Hamiltonian, each checked for flow invariance.

    Weights are drawn log-uniformly from [0.2, 5] unless ``weights`` (a list
    of weight vectors, one per structure) is given.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    H = np.asarray(hamiltonian, complex)
    n = H.shape[0]
    if weights is None:
        rng = np.random.default_rng(seed)
        weights = [np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=n)) for _ in range(count)]
    elif len(weights) != count:
        raise ValueError(f"got {len(weights)} weight vectors for count={count}")
    reference = QuantumSystem(HermitianStructure.standard(n), H)
    out = []
    for w in weights:
        G = structure_from_weights(H, w)
        residual = flow_preservation_residual(reference, G)
        if residual > check_tol:
            raise StructureError(f"generated structure is not flow invariant (residual {residual:.2e})")
        out.append(G)
    return out


def thermal_trace(system: QuantumSystem, beta: float, basis: np.ndarray | None = None) -> float:
    """``sum_n <psi_n | exp(-beta H) | psi_n>`` over a basis orthonormal for the system's structure."""
    structure = system.structure
    if basis is None:
        basis = structure.orthonormal_basis()
    if beta == 0:
        rho = np.eye(system.dimension, dtype=complex)
    else:
        evals, V = system._eig
        L = structure.cholesky
        rho_c = (V * np.exp(-beta * evals)) @ V.conj().T
        rho = np.linalg.solve(L.conj().T, rho_c @ L.conj().T)
    G = structure.metric
    total = np.einsum("in,ij,jn->", basis.conj(), G @ rho, basis)
    return float(total.real)


def trace_invariance(hamiltonian, structures, beta: float) -> dict:
    """Thermal trace in each structure and their relative spread.

    ``structures`` may hold :class:`HermitianStructure` objects or raw metric
    matrices; a metric that is not positive-definite raises
    :class:`StructureError`.
    """
    values = []
    for s in structures:
        if not isinstance(s, HermitianStructure):
            s = HermitianStructure(s)
        values.append(thermal_trace(QuantumSystem(s, hamiltonian), beta))
    values = np.array(values)
    spread = float((values.max() - values.min()) / np.min(np.abs(values)))
    return {"beta": float(beta), "values": values, "spread": spread}


def inner_product_violations(structure: HermitianStructure, n_pairs: int = 100, seed: int = 0) -> dict:
    """Largest conjugate-symmetry defect and smallest norm ratio over random pairs."""
    rng = np.random.default_rng(seed)
    n = structure.dimension
    sym, pos = 0.0, np.inf
    for _ in range(n_pairs):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        xy, yx = structure.inner(x, y), structure.inner(y, x)
        sym = max(sym, abs(xy - yx.conjugate()) / max(1.0, abs(xy)))
        pos = min(pos, structure.inner(x, x).real / float(np.vdot(x, x).real))
    return {"conjugate_symmetry": sym, "min_norm_ratio": pos}


def random_hermitian(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


TEST_SYSTEMS = ("diag2", "diag4", "random_hermitian_8")


def builtin_hamiltonian(label: str, seed: int = 0) -> np.ndarray:
    """Built-in Hamiltonians: diag(1,2), diag(1,2,3,4) and a seeded random 8x8."""
    if label == "diag2":
        return np.diag([1.0, 2.0]).astype(complex)
    if label == "diag4":
        return np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    if label == "random_hermitian_8":
        return random_hermitian(8, seed)
    raise StructureError(f"unknown quantum test system {label!r}; available: {list(TEST_SYSTEMS)}")


__all__ = [
    "HermitianStructure",
    "QuantumSystem",
    "RealizedState",
    "TEST_SYSTEMS",
    "alternative_structures",
    "evolution_operator",
    "flow_preservation_residual",
    "hamilton_form_check",
    "inner_product_violations",
    "quadratic_functional",
    "random_hermitian",
    "schrodinger_flow",
    "structure_from_weights",
    "builtin_hamiltonian",
    "thermal_trace",
    "trace_invariance",
]
