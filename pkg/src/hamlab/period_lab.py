"""
Period function, enclosed area and the local time function.

Three independent routes to the period ``tau(E)`` of a closed orbit:

* return time of the flow to the section through the right turning point,
* the turning-point integral ``2 * int sqrt(m / 2(E - V)) dq``,
* the derivative of the enclosed phase-space area, ``tau = dA/dE``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    ConvergenceError,
    CriticalPointError,
    MethodUnavailableError,
    NonCompactLevelSetError,
)
from .phase_flow import HamiltonianSystem1D, _rk45_walk, _state_scale

METHODS = ("return_time", "turning_point_quadrature", "area_derivative")

_GL_X, _GL_W = leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def log_energy_grid(emin: float, emax: float, per_decade: int = 33) -> np.ndarray:
    """Logarithmic energy grid with ``per_decade`` points per factor of ten."""
    if not 0 < emin < emax:
        raise ValueError(f"need 0 < emin < emax, got {emin}, {emax}")
    n = max(2, int(np.ceil(per_decade * np.log10(emax / emin))) + 1)
    return np.geomspace(emin, emax, n)


def period_return_time(system: HamiltonianSystem1D, E: float, tol: float = 1e-10) -> float:
    """First return time to the section ``p = 0`` (p decreasing) through the right turning point."""
    if not E > 0:
        raise NonCompactLevelSetError(f"energy {E} is not above the minimum 0")
    q0 = system.turning_points(E)[1] if system.separable else system.axis_point(E)
    scale = _state_scale(system, q0, 0.0)
    seen_upper = False

    def stop(t0, y0, t1, y1, interp):
        nonlocal seen_upper
        if y1[1] > 0:
            seen_upper = True
            return None
        if seen_upper and y0[1] > 0 >= y1[1]:
            return brentq(lambda t: interp(t)[1], t0, t1, xtol=1e-15 * t1, rtol=1e-15)
        return None

    _, _, _, t_return = _rk45_walk(system, (q0, 0.0), 1e12, tol, tol * scale, stop=stop)
    if t_return is None:
        raise ConvergenceError(f"{system.label}: no return to the section at E={E}")
    return float(t_return)


def _divided_difference(Vp, a: float, q: np.ndarray) -> np.ndarray:
    """``(V(a) - V(q)) / (a - q)`` as the mean of V' over the segment (no cancellation)."""
    x = q[..., None] + _GL_X * (a - q)[..., None]
    return Vp(x) @ _GL_W


def period_quadrature(system: HamiltonianSystem1D, E: float, tol: float = 1e-10) -> float:
    """Turning-point integral with ``q = q+ - s^2`` / ``q = q- + s^2`` at each end.

    After the substitution the integrand is ``2 sqrt(m / 2D)`` with D the
    divided difference of V between the turning point and q, which is bounded
    and smooth on the closed interval.
    """
    if not system.separable:
        raise MethodUnavailableError(
            f"{system.label}: turning-point quadrature needs H = p^2/2m + V(q); use period_return_time"
        )
    qm, qp = system.turning_points(E)
    m, Vp = system.mass, system.potential_prime

    def right(s):
        d = _divided_difference(Vp, qp, np.atleast_1d(qp - s * s))[0]
        return 2.0 * np.sqrt(m / (2.0 * d))

    def left(s):
        d = -_divided_difference(Vp, qm, np.atleast_1d(qm + s * s))[0]
        return 2.0 * np.sqrt(m / (2.0 * d))

    rtol = max(0.1 * tol, 1e-14)
    I_r, err_r = quad(right, 0.0, np.sqrt(qp), epsabs=0.0, epsrel=rtol, limit=200)
    I_l, err_l = quad(left, 0.0, np.sqrt(-qm), epsabs=0.0, epsrel=rtol, limit=200)
    total = 2.0 * (I_r + I_l)
    if not np.isfinite(total) or total <= 0:
        raise ConvergenceError(f"{system.label}: period quadrature failed at E={E}")
    return float(total)


def enclosed_area(system: HamiltonianSystem1D, E: float, tol: float = 1e-13) -> float:
    """Area of ``{H <= E}``, integrated in polar coordinates about the critical point.

    The radial integral is done exactly (``r(theta)^2 / 2``); the angular one
    uses the periodic trapezoid rule, doubled until successive values agree to
    ``tol`` relative.
    """
    if not E > 0:
        if E == 0:
            return 0.0
        raise NonCompactLevelSetError(f"energy {E} is below the minimum 0")
    cache: dict[int, float] = {}

    def r2(n_total: int, idx: int) -> float:
        # nodes are shared between refinement levels via their angle on the finest grid
        key = idx * (1 << 20) // n_total
        if key not in cache:
            theta = 2 * np.pi * idx / n_total
            cache[key] = system.ray_radius(E, theta) ** 2
        return cache[key]

    n = 32
    prev = 0.5 * (2 * np.pi / n) * sum(r2(n, i) for i in range(n))
    while n < (1 << 16):
        n *= 2
        cur = 0.5 * (2 * np.pi / n) * sum(r2(n, i) for i in range(n))
        if abs(cur - prev) <= tol * abs(cur):
            return float(cur)
        prev = cur
    raise ConvergenceError(f"{system.label}: area quadrature did not converge at E={E}")


def period_area_derivative(system: HamiltonianSystem1D, E: float, rel_step: float = 1e-4,
                           tol: float = 1e-13) -> float:
    """``dA/dE`` by a central difference with step ``rel_step * E``."""
    h = rel_step * E
    return (enclosed_area(system, E + h, tol) - enclosed_area(system, E - h, tol)) / (2 * h)


def period(system: HamiltonianSystem1D, E: float, method: str = "auto", tol: float = 1e-10) -> float:
    if method == "auto":
        method = "turning_point_quadrature" if system.separable else "return_time"
    if method == "return_time":
        return period_return_time(system, E, tol)
    if method == "turning_point_quadrature":
        return period_quadrature(system, E, tol)
    if method == "area_derivative":
        return period_area_derivative(system, E)
    raise ValueError(f"unknown period method {method!r}; expected one of {METHODS}")


@dataclass(frozen=True)
class TimeFormSample:
    point: tuple[float, float]
    t_value: float


def time_function_ho(m: float, omega: float, point) -> float:
    """Local time function of the oscillator, ``atan2(m omega q, p) / omega`` in ``[0, 2pi/omega)``."""
    q, p = map(float, point)
    if q == 0.0 and p == 0.0:
        raise CriticalPointError("time function is undefined at the critical point")
    t = np.arctan2(m * omega * q, p) / omega
    period_ = 2 * np.pi / omega
    t = t % period_
    return float(t if t < period_ else 0.0)


def time_form_sample(m: float, omega: float, point) -> TimeFormSample:
    return TimeFormSample((float(point[0]), float(point[1])), time_function_ho(m, omega, point))


def _power_law_fit(logE: np.ndarray, logT: np.ndarray) -> tuple[float, float]:
    """Least-squares ``log tau = log c + alpha log E``; returns (log c, alpha)."""
    if logE.size == 1:
        return float(logT[0]), 0.0
    alpha, logc = np.polyfit(logE, logT, 1)
    return float(logc), float(alpha)


@dataclass(frozen=True)
class PeriodProfile:
    """Sampled ``tau(E)`` with cubic log-log interpolation and power-law tails."""

    energies: np.ndarray
    periods: np.ndarray
    method: str
    label: str = ""

    def __post_init__(self):
        E = np.asarray(self.energies, float)
        T = np.asarray(self.periods, float)
        if E.shape != T.shape or E.ndim != 1 or E.size == 0:
            raise ValueError("energies and periods must be equal-length 1-D arrays")
        if np.any(np.diff(E) <= 0) or np.any(E <= 0):
            raise ValueError("energies must be positive and increasing")
        if not np.all(np.isfinite(T)) or np.any(T <= 0):
            raise ValueError("periods must be finite and positive")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        E.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "energies", E)
        object.__setattr__(self, "periods", T)
        logE, logT = np.log(E), np.log(T)
        spline = CubicSpline(logE, logT) if E.size >= 4 else None
        k = min(4, E.size)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_low", _power_law_fit(logE[:k], logT[:k]))
        object.__setattr__(self, "_high", _power_law_fit(logE[-k:], logT[-k:]))

    @property
    def low_exponent(self) -> float:
        """Power-law exponent used below the sampled range."""
        return self._low[1]

    @property
    def high_exponent(self) -> float:
        return self._high[1]

    def __call__(self, E):
        E = np.asarray(E, float)
        logE = np.log(np.maximum(E, 1e-300))
        lo, hi = np.log(self.energies[0]), np.log(self.energies[-1])
        if self._spline is not None:
            inside = self._spline(np.clip(logE, lo, hi))
        else:
            inside = np.interp(logE, np.log(self.energies), np.log(self.periods))
        low = self._low[0] + self._low[1] * logE
        high = self._high[0] + self._high[1] * logE
        out = np.where(logE < lo, low, np.where(logE > hi, high, inside))
        return np.exp(out)


def period_profile(system: HamiltonianSystem1D, energies=None, *, emin: float = 1e-3,
                   emax: float = 1e3, per_decade: int = 33, method: str = "auto",
                   tol: float = 1e-10, workers: int | None = None) -> PeriodProfile:
    """Evaluate ``tau`` on a grid; the result does not depend on ``workers``."""
    if method == "auto":
        method = "turning_point_quadrature" if system.separable else "return_time"
    E = log_energy_grid(emin, emax, per_decade) if energies is None else np.asarray(energies, float)

    def one(e):
        return period(system, float(e), method, tol)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            T = list(pool.map(one, E))
    else:
        T = [one(e) for e in E]
    return PeriodProfile(E, np.array(T), method, system.label)


__all__ = [
    "METHODS",
    "PeriodProfile",
    "TimeFormSample",
    "enclosed_area",
    "log_energy_grid",
    "period",
    "period_area_derivative",
    "period_profile",
    "period_quadrature",
    "period_return_time",
    "time_form_sample",
    "time_function_ho",
]
