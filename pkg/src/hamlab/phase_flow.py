"""
One-degree-of-freedom Hamiltonian systems, their vector fields and flows.

Phase points are ``(q, p)`` pairs. Every system keeps its critical point at
the origin with ``H(0, 0) = 0``; the built-in catalog is

    ho               H = p^2/2m + m omega^2 q^2/2
    quartic          H = p^2/2m + k4 q^4/4
    ho_plus_quartic  H = p^2/2m + m omega^2 q^2/2 + k4 q^4/4

The n-dimensional oscillator family ``H_B = (p.Bp + q.Bq)/2`` is paired with
the constant symplectic form ``B_ij dp_i ^ dq_j``, which makes the standard
isotropic field ``(dq, dp) = (p, -q)`` Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import warnings
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .errors import (
    InvalidSystemError,
    NonCompactLevelSetError,
    StiffnessError,
    ToleranceError,
)

#: ``|grad H|`` below this declares a critical point.
CRITICAL_TOL = 1e-10

_RAY_MAX = 1e12

# scipy's RK45 silently raises any rtol below this
_RTOL_FLOOR = 100 * np.finfo(float).eps


def _ray_root(func: Callable[[float], float], r0: float = 1.0) -> float:
    """Smallest-bracket root of ``func(r) = 0`` for r > 0, assuming func(0) < 0."""
    hi = r0
    while func(hi) <= 0.0:
        hi *= 2.0
        if hi > _RAY_MAX:
            raise NonCompactLevelSetError("no crossing found along ray (level set not compact?)")
    lo = hi / 2.0
    while lo > 1e-300 and func(lo) > 0.0:
        hi, lo = lo, lo / 2.0
    if func(lo) > 0.0:
        raise NonCompactLevelSetError("energy below the minimum of H")
    return brentq(func, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class HamiltonianSystem1D:
    """A Hamiltonian ``H(q, p)`` on the plane with ``Omega = dp ^ dq``.

    ``potential``/``potential_prime`` are given only for separable systems
    ``H = p^2/2m + V(q)``; quadrature-based methods require them.
    """

    energy: Callable
    gradient: Callable
    mass: float = 1.0
    label: str = "custom"
    potential: Callable | None = None
    potential_prime: Callable | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self):
        if not self.mass > 0:
            raise InvalidSystemError(f"mass must be positive, got {self.mass}")
        if self.validate:
            _check_system(self)

    @property
    def separable(self) -> bool:
        return self.potential is not None and self.potential_prime is not None

    @property
    def omega(self) -> float | None:
        return self.params.get("omega")

    def is_critical(self, q: float, p: float) -> bool:
        dq, dp = self.gradient(q, p)
        return float(np.hypot(dq, dp)) < CRITICAL_TOL

    def turning_points(self, E: float) -> tuple[float, float]:
        """Roots ``q- < 0 < q+`` of ``V(q) = E`` (separable systems)."""
        if self.potential is None:
            raise InvalidSystemError(f"{self.label}: turning points need a separable system")
        if not E > 0:
            raise NonCompactLevelSetError(f"energy {E} is not above the minimum 0")
        V = self.potential
        qp = _ray_root(lambda r: V(r) - E)
        qm = -_ray_root(lambda r: V(-r) - E)
        return qm, qp

    def axis_point(self, E: float) -> float:
        """Point on the positive q axis with ``H(q, 0) = E``."""
        if not E > 0:
            raise NonCompactLevelSetError(f"energy {E} is not above the minimum 0")
        return _ray_root(lambda r: self.energy(r, 0.0) - E)

    def ray_radius(self, E: float, angle: float) -> float:
        """Distance from the origin to the level set ``H = E`` along ``angle``."""
        c, s = np.cos(angle), np.sin(angle)
        return _ray_root(lambda r: self.energy(r * c, r * s) - E)


def _check_system(system: HamiltonianSystem1D) -> None:
    H0 = float(system.energy(0.0, 0.0))
    if abs(H0) > 1e-12:
        raise InvalidSystemError(f"{system.label}: H(0,0) = {H0}, expected 0")
    if not system.is_critical(0.0, 0.0):
        raise InvalidSystemError(f"{system.label}: origin is not a critical point")
    angles = np.linspace(0.0, 2 * np.pi, 16, endpoint=False)
    r_small = min(system.ray_radius(1e-2, a) for a in angles)
    r_big = max(system.ray_radius(1e2, a) for a in angles)
    radii = np.geomspace(0.05 * r_small, r_big, 24)
    R, A = np.meshgrid(radii, angles)
    q, p = R * np.cos(A), R * np.sin(A)
    H = np.asarray(system.energy(q, p), dtype=float)
    if np.any(H < 0):
        raise InvalidSystemError(f"{system.label}: H takes negative values")
    dq, dp = system.gradient(q, p)
    if np.any(np.hypot(dq, dp) < CRITICAL_TOL):
        raise InvalidSystemError(f"{system.label}: additional critical point detected")


def _ho(m: float = 1.0, omega: float = 1.0) -> HamiltonianSystem1D:
    k = m * omega**2
    return HamiltonianSystem1D(
        energy=lambda q, p: p**2 / (2 * m) + 0.5 * k * q**2,
        gradient=lambda q, p: (k * q, p / m),
        mass=m,
        label="ho",
        potential=lambda q: 0.5 * k * q**2,
        potential_prime=lambda q: k * q,
        params={"m": m, "omega": omega},
    )


def _quartic(m: float = 1.0, k4: float = 1.0) -> HamiltonianSystem1D:
    return HamiltonianSystem1D(
        energy=lambda q, p: p**2 / (2 * m) + 0.25 * k4 * q**4,
        gradient=lambda q, p: (k4 * q**3, p / m),
        mass=m,
        label="quartic",
        potential=lambda q: 0.25 * k4 * q**4,
        potential_prime=lambda q: k4 * q**3,
        params={"m": m, "k4": k4},
    )


def _ho_plus_quartic(m: float = 1.0, omega: float = 1.0, k4: float = 1.0) -> HamiltonianSystem1D:
    k = m * omega**2
    return HamiltonianSystem1D(
        energy=lambda q, p: p**2 / (2 * m) + 0.5 * k * q**2 + 0.25 * k4 * q**4,
        gradient=lambda q, p: (k * q + k4 * q**3, p / m),
        mass=m,
        label="ho_plus_quartic",
        potential=lambda q: 0.5 * k * q**2 + 0.25 * k4 * q**4,
        potential_prime=lambda q: k * q + k4 * q**3,
        params={"m": m, "omega": omega, "k4": k4},
    )


SYSTEM_CATALOG: dict[str, Callable[..., HamiltonianSystem1D]] = {
    "ho": _ho,
    "quartic": _quartic,
    "ho_plus_quartic": _ho_plus_quartic,
}

SYSTEM_DEFAULTS: dict[str, dict[str, float]] = {
    "ho": {"m": 1.0, "omega": 1.0},
    "quartic": {"m": 1.0, "k4": 1.0},
    "ho_plus_quartic": {"m": 1.0, "omega": 1.0, "k4": 1.0},
}


def make_system(name: str, **params: float) -> HamiltonianSystem1D:
    """Build a catalog system by name, e.g. ``make_system("ho", omega=2)``."""
    try:
        factory = SYSTEM_CATALOG[name]
    except KeyError:
        raise InvalidSystemError(
            f"unknown system {name!r}; available: {sorted(SYSTEM_CATALOG)}"
        ) from None
    unknown = set(params) - set(SYSTEM_DEFAULTS[name])
    if unknown:
        raise InvalidSystemError(
            f"system {name!r} takes parameters {sorted(SYSTEM_DEFAULTS[name])}, got {sorted(unknown)}"
        )
    for key, value in params.items():
        if not (np.isfinite(value) and value > 0):
            raise InvalidSystemError(f"parameter {key} must be positive and finite, got {value}")
    return factory(**params)


def is_isochronous(system: HamiltonianSystem1D) -> bool:
    """True for catalog systems with an energy-independent period."""
    return system.label == "ho"


@dataclass(frozen=True)
class VectorField:
    """Vector field on phase space; ``components(q, p) -> (dq/dt, dp/dt)``.

    For one degree of freedom q and p are scalars (or broadcastable arrays);
    for n degrees of freedom they are length-n vectors.
    """

    components: Callable
    label: str = ""

    def __call__(self, q, p):
        return self.components(q, p)


# The one-degree-of-freedom case is the common one.
VectorField2D = VectorField


def hamiltonian_vector_field(system: HamiltonianSystem1D) -> VectorField:
    """Field ``Gamma`` with ``i_Gamma(dp ^ dq) = -dH``: ``(dH/dp, -dH/dq)``."""
    grad = system.gradient

    def components(q, p):
        dHdq, dHdp = grad(q, p)
        return dHdp, -dHdq

    return VectorField(components, label=f"Gamma[{system.label}]")


@dataclass(frozen=True)
class OscillatorFamilyND:
    """``H_B = (p.Bp + q.Bq) / 2`` with B symmetric positive-definite."""

    B: np.ndarray

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        if B.ndim == 0:
            B = B.reshape(1, 1)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise InvalidSystemError(f"B must be square, got shape {B.shape}")
        if np.max(np.abs(B - B.T)) > 1e-12:
            raise InvalidSystemError("B is not symmetric")
        if np.min(np.linalg.eigvalsh(B)) <= 0:
            raise InvalidSystemError("B is not positive-definite")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @property
    def dimension(self) -> int:
        return self.B.shape[0]

    def energy(self, q, p) -> float:
        q, p = np.atleast_1d(np.asarray(q)), np.atleast_1d(np.asarray(p))
        return 0.5 * (p @ self.B @ p + q @ self.B @ q)

    def gradient(self, q, p):
        q, p = np.asarray(q, float), np.asarray(p, float)
        return self.B @ q, self.B @ p

    def symplectic_matrix(self) -> np.ndarray:
        """Coefficients of ``Omega_B = B_ij dp_i ^ dq_j``."""
        return self.B

    def vector_field(self) -> VectorField:
        return isotropic_field(self.dimension)


def isotropic_field(n: int) -> VectorField:
    """Unit-frequency isotropic oscillator field ``(dq, dp) = (p, -q)``."""

    def components(q, p):
        return np.asarray(p, float).copy(), -np.asarray(q, float)

    return VectorField(components, label=f"isotropic[{n}]")


def random_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric positive-definite matrix with condition number <~ 50."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.exp(rng.uniform(np.log(0.2), np.log(10.0), size=n))
    B = (Q * eig) @ Q.T
    return 0.5 * (B + B.T)


def _gradient_of(H, q: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """dH at (q, p): analytic if H carries one, else complex step (central-difference fallback)."""
    if hasattr(H, "gradient"):
        gq, gp = H.gradient(q, p)
        return np.atleast_1d(np.asarray(gq, float)), np.atleast_1d(np.asarray(gp, float))
    energy = H.energy if hasattr(H, "energy") else H
    x = np.concatenate([q, p]).astype(float)
    n = q.size
    scalar = n == 1

    def ev(z):
        zq, zp = z[:n], z[n:]
        return energy(zq[0], zp[0]) if scalar else energy(zq, zp)

    grad = np.empty_like(x)
    try:
        h = 1e-30
        with warnings.catch_warnings():
            # a silent cast to float would drop the imaginary part
            warnings.simplefilter("error", np.exceptions.ComplexWarning)
            for i in range(x.size):
                z = x.astype(complex)
                z[i] += 1j * h
                grad[i] = complex(ev(z)).imag / h
        if not np.all(np.isfinite(grad)):
            raise ValueError
    except (TypeError, ValueError, np.exceptions.ComplexWarning):
        # fourth-order central stencil
        for i in range(x.size):
            h = 1e-3 * max(1.0, abs(x[i]))
            e = np.zeros_like(x)
            e[i] = h
            f = [float(ev(x + k * e)) for k in (-2, -1, 1, 2)]
            grad[i] = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    return grad[:n], grad[n:]


def verify_hamiltonian_pair(field: VectorField, omega_density, H, sample_points) -> float:
    """Max over samples of ``|i_Gamma Omega + dH|``.

    ``omega_density`` is the coefficient of ``dp ^ dq`` (a number or a callable
    of (q, p)) or, for n degrees of freedom, the matrix B of
    ``B_ij dp_i ^ dq_j`` (an array or a callable returning one). ``H`` is a
    callable energy or an object with ``gradient``.
    """
    points = list(sample_points)
    if not points:
        raise ValueError("sample_points is empty")
    worst = 0.0
    for q, p in points:
        q = np.atleast_1d(np.asarray(q, float))
        p = np.atleast_1d(np.asarray(p, float))
        n = q.size
        dq, dp = field(q[0], p[0]) if n == 1 else field(q, p)
        dq, dp = np.atleast_1d(np.asarray(dq, float)), np.atleast_1d(np.asarray(dp, float))
        W = omega_density(q[0], p[0]) if (callable(omega_density) and n == 1) else (
            omega_density(q, p) if callable(omega_density) else omega_density
        )
        W = np.asarray(W, float).reshape(n, n) if np.ndim(W) else np.eye(n) * float(W)
        Hq, Hp = _gradient_of(H, q, p)
        # i_Gamma (W_ij dp_i ^ dq_j) = W_ij (Gamma^p_i dq_j - Gamma^q_j dp_i)
        res_q = W.T @ dp + Hq
        res_p = -W @ dq + Hp
        worst = max(worst, float(np.linalg.norm(np.concatenate([res_q, res_p]))))
    return worst


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energy_drift: float
    tol: float | None = None
    dense: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, float)
        s = np.asarray(self.states, float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __call__(self, t):
        if self.dense is None:
            raise ValueError("trajectory has no dense output")
        return self.dense(t)


class _DenseOutput:
    """Piecewise dense interpolant assembled from solver steps."""

    def __init__(self, breaks, pieces):
        self.breaks = np.asarray(breaks)
        self.pieces = pieces

    def __call__(self, t):
        t = float(t)
        i = int(np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.pieces) - 1))
        return self.pieces[i](t)


def _state_scale(system: HamiltonianSystem1D, q0: float, p0: float) -> float:
    H0 = float(system.energy(q0, p0))
    return max(float(np.hypot(q0, p0)), np.sqrt(2 * system.mass * max(H0, 0.0)), 1e-300)


def _rk45_walk(system, y0, t_end, rtol, atol, stop=None, max_steps=2_000_000):
    """Step an RK 5(4) solver; ``stop(t0, y0, t1, y1, interp)`` may end the walk early.

    Returns (times, states, pieces, stop_value).
    """
    field_ = hamiltonian_vector_field(system)

    def fun(_t, y):
        dq, dp = field_(y[0], y[1])
        return np.array([dq, dp], dtype=float)

    solver = RK45(fun, 0.0, np.asarray(y0, float), t_end, rtol=rtol, atol=atol)
    times, states, pieces = [0.0], [solver.y.copy()], []
    for _ in range(max_steps):
        if solver.status != "running":
            break
        msg = solver.step()
        if solver.status == "failed":
            raise StiffnessError(f"{system.label}: {msg}")
        interp = solver.dense_output()
        pieces.append(interp)
        times.append(solver.t)
        states.append(solver.y.copy())
        if stop is not None:
            hit = stop(times[-2], states[-2], times[-1], states[-1], interp)
            if hit is not None:
                return np.array(times), np.array(states), pieces, hit
    else:
        raise StiffnessError(f"{system.label}: step budget exhausted")
    return np.array(times), np.array(states), pieces, None


def integrate(system: HamiltonianSystem1D, start, duration: float, tol: float = 1e-10) -> Trajectory:
    """Adaptive Runge-Kutta 5(4) trajectory of ``system`` from ``start``.

    The solver tolerance is tightened until the energy drift satisfies
    ``drift <= 10 * tol * max(1, H(start))``.
    """
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if not 1e-14 < tol < 1e-2:
        raise ValueError(f"tol must lie in (1e-14, 1e-2), got {tol}")
    q0, p0 = map(float, start)
    if system.is_critical(q0, p0):
        y = np.array([q0, p0])
        return Trajectory(
            np.array([0.0, duration]), np.array([y, y]), 0.0, tol,
            dense=lambda t: y.copy(),
        )
    H0 = float(system.energy(q0, p0))
    bound = 10 * tol * max(1.0, abs(H0))
    scale = _state_scale(system, q0, p0)
    rtol = max(tol, _RTOL_FLOOR)
    while True:
        times, states, pieces, _ = _rk45_walk(system, (q0, p0), duration, rtol, rtol * scale)
        drift = float(np.max(np.abs(system.energy(states[:, 0], states[:, 1]) - H0)))
        if drift <= bound:
            return Trajectory(times, states, drift, tol, dense=_DenseOutput(times[:-1], pieces))
        if rtol <= _RTOL_FLOOR:
            raise ToleranceError(
                f"{system.label}: energy drift {drift:.3e} exceeds {bound:.3e} at the tightest tolerance"
            )
        rtol = max(rtol / 10.0, _RTOL_FLOOR)


def leapfrog_step(system: HamiltonianSystem1D, state, dt: float) -> np.ndarray:
    """One kick-drift-kick step for ``H = p^2/2m + V(q)``."""
    if not system.separable:
        raise InvalidSystemError(f"{system.label}: leapfrog needs a separable system")
    q, p = state
    p = p - 0.5 * dt * system.potential_prime(q)
    q = q + dt * p / system.mass
    p = p - 0.5 * dt * system.potential_prime(q)
    return np.array([q, p])


def leapfrog(system: HamiltonianSystem1D, start, dt: float, n_steps: int) -> Trajectory:
    """Fixed-step symplectic reference integrator."""
    y = np.array(start, dtype=float)
    states = [y]
    for _ in range(n_steps):
        y = leapfrog_step(system, y, dt)
        states.append(y)
    states = np.array(states)
    E = system.energy(states[:, 0], states[:, 1])
    times = dt * np.arange(n_steps + 1)
    return Trajectory(times, states, float(np.max(np.abs(E - E[0]))))


__all__ = [
    "CRITICAL_TOL",
    "HamiltonianSystem1D",
    "OscillatorFamilyND",
    "SYSTEM_CATALOG",
    "SYSTEM_DEFAULTS",
    "Trajectory",
    "VectorField",
    "VectorField2D",
    "hamiltonian_vector_field",
    "integrate",
    "is_isochronous",
    "isotropic_field",
    "leapfrog",
    "leapfrog_step",
    "make_system",
    "random_spd",
    "verify_hamiltonian_pair",
]
