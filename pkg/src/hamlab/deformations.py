"""
Alternative descriptions of one-dimensional dynamics.

A deformation ``f`` replaces ``(H, dH ^ dt)`` by ``(H_f, dH_f ^ dt)`` with
``H_f = f(beta0 H) / beta0``; the flow is unchanged. The coordinate change
``(Q, P) = (1 + phi) (q, p)`` with ``phi = f(beta0 H)`` is the noncanonical
example built on the unit oscillator.

Catalog entries must satisfy ``f(0) = 0``, ``f' > 0`` and be unbounded above.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DeformationRejected

#: Upper end of the monotonicity screen.
SCREEN_XMAX = 1e3


def _bracket_inverse(f: Callable[[float], float]) -> Callable:
    """Numerical inverse of an increasing f with f(0) = 0 (root-solve, 1e-12)."""

    def inverse(y):
        y_arr = np.asarray(y, float)
        out = np.empty_like(y_arr)
        for idx, yi in np.ndenumerate(y_arr):
            if yi == 0.0:
                out[idx] = 0.0
                continue
            hi = 1.0
            while f(hi) < yi:
                hi *= 2.0
                if hi > 1e300:
                    raise DeformationRejected(f"value {yi} outside the range of f")
            out[idx] = brentq(lambda x: f(x) - yi, 0.0, hi, xtol=1e-12, rtol=1e-15)
        return out if out.ndim else float(out)

    return inverse


def _check_unbounded(f: Callable) -> bool:
    """Growth screen: increments of f over decades must not die out.

    A bounded increasing f has decade increments that shrink to zero; any
    f that grows at least like ``log log x`` keeps them comparable.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        xs = 10.0 ** np.arange(2, 11)
        vals = np.array([f(x) for x in xs], dtype=float)
    if np.any(np.isinf(vals)) and np.all(np.isfinite(vals[:1])):
        return True
    inc = np.diff(vals)
    if not np.all(np.isfinite(inc)) or inc[-1] <= 0:
        return False
    return inc[-1] >= 0.05 * inc[0] and inc[-1] > 1e-8 * max(1.0, abs(vals[-1]))


@dataclass(frozen=True)
class Deformation:
    """Scalar reparametrization of the energy, ``H_f = f(beta0 H) / beta0``."""

    f: Callable
    f_prime: Callable
    f_inverse: Callable | None = None
    beta0: float = 1.0
    label: str = "custom"

    def __post_init__(self):
        if not (np.isfinite(self.beta0) and self.beta0 > 0):
            raise DeformationRejected(f"{self.label}: beta0 must be positive, got {self.beta0}")
        if self.f_inverse is None:
            object.__setattr__(self, "f_inverse", _bracket_inverse(self.f))
        screen(self)

    def with_beta0(self, beta0: float) -> "Deformation":
        return Deformation(self.f, self.f_prime, self.f_inverse, beta0, self.label)


def screen(d: Deformation) -> None:
    """Raise :class:`DeformationRejected` unless d passes every catalog screen."""
    f0 = float(d.f(0.0))
    if abs(f0) > 1e-14:
        raise DeformationRejected(f"{d.label}: f(0) = {f0}, must vanish")
    if not _check_unbounded(d.f):
        raise DeformationRejected(
            f"{d.label}: f appears bounded above, so exp(-beta H_f) does not decay and Z_f diverges"
        )
    x = np.concatenate([[0.0], np.geomspace(1e-8, SCREEN_XMAX, 400)])
    with np.errstate(over="ignore"):
        fp = np.asarray(d.f_prime(x), float)
    if not np.all(fp > 0):
        raise DeformationRejected(f"{d.label}: f' must be positive on [0, {SCREEN_XMAX:g}]")
    grid = np.linspace(0.0, 50.0, 101)
    with np.errstate(over="ignore"):
        back = np.asarray(d.f_inverse(d.f(grid)), float)
    if np.max(np.abs(back - grid) / np.maximum(1.0, grid)) > 1e-10:
        raise DeformationRejected(f"{d.label}: f_inverse(f(x)) != x on the sample grid")


def _aq_inverse(y):
    y = np.asarray(y, float)
    return 2.0 * y / (1.0 + np.sqrt(1.0 + 4.0 * y))


_CANDIDATES: dict[str, tuple] = {
    "identity": (lambda x: x, lambda x: np.ones_like(np.asarray(x, float)), lambda y: y),
    "affine_quadratic": (lambda x: x + x * x, lambda x: 1.0 + 2.0 * np.asarray(x, float), _aq_inverse),
    "exp_ramp": (np.expm1, np.exp, np.log1p),
    "log1p": (np.log1p, lambda x: 1.0 / (1.0 + np.asarray(x, float)), np.expm1),
    "scaled": (lambda x: 2.0 * x, lambda x: 2.0 * np.ones_like(np.asarray(x, float)), lambda y: 0.5 * y),
    # bounded: kept only so that requesting it produces a screen rejection
    "tanh": (np.tanh, lambda x: 1.0 / np.cosh(x) ** 2, np.arctanh),
}

#: Human-readable formulas for listings.
FORMULAS = {
    "identity": "x",
    "affine_quadratic": "x + x^2",
    "exp_ramp": "exp(x) - 1",
    "log1p": "ln(1 + x)",
    "scaled": "2x",
    "tanh": "tanh(x)  [rejected: bounded]",
}

CATALOG_LABELS = ("identity", "affine_quadratic", "exp_ramp", "log1p", "scaled")


def get_deformation(label: str, beta0: float = 1.0) -> Deformation:
    """Build and screen a named deformation."""
    try:
        f, fp, finv = _CANDIDATES[label]
    except KeyError:
        raise DeformationRejected(
            f"unknown deformation {label!r}; available: {list(CATALOG_LABELS)}"
        ) from None
    return Deformation(f, fp, finv, beta0, label)


def catalog(beta0: float = 1.0) -> list[Deformation]:
    return [get_deformation(label, beta0) for label in CATALOG_LABELS]


def deform_energy(d: Deformation, H_value):
    """``H_f = f(beta0 H) / beta0``."""
    H = np.asarray(H_value, float)
    if np.any(H < 0):
        raise ValueError("energies must be non-negative")
    out = d.f(d.beta0 * H) / d.beta0
    return float(out) if np.ndim(out) == 0 else out


def deformed_volume_density(d: Deformation, H_value):
    """``dH_f/dH = f'(beta0 H)``: density of ``dH_f ^ dt`` relative to ``dH ^ dt``."""
    H = np.asarray(H_value, float)
    if np.any(H < 0):
        raise ValueError("energies must be non-negative")
    out = d.f_prime(d.beta0 * H)
    return float(out) if np.ndim(out) == 0 else out


def undeform_energy(d: Deformation, u):
    """Inverse of :func:`deform_energy`."""
    out = d.f_inverse(d.beta0 * np.asarray(u, float)) / d.beta0
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CoordinateChange:
    """``(Q, P) = (1 + phi(H)) (q, p)`` on the unit oscillator, ``phi = f(beta0 H)``."""

    deformation: Deformation

    @staticmethod
    def base_energy(q, p):
        return 0.5 * (np.asarray(q) ** 2 + np.asarray(p) ** 2)

    def phi(self, H):
        return self.deformation.f(self.deformation.beta0 * np.asarray(H, float))

    def phi_prime(self, H):
        d = self.deformation
        return d.beta0 * d.f_prime(d.beta0 * np.asarray(H, float))

    def forward(self, q, p):
        s = 1.0 + self.phi(self.base_energy(q, p))
        return s * q, s * p

    def H_prime(self, q, p):
        """``(1 + phi)^2 H``."""
        H = self.base_energy(q, p)
        return (1.0 + self.phi(H)) ** 2 * H

    def jacobian_F(self, H):
        """``F(H) = (1 + phi)(1 + phi + 2 H phi') = dH'/dH``."""
        H = np.asarray(H, float)
        phi = self.phi(H)
        return (1.0 + phi) * (1.0 + phi + 2.0 * H * self.phi_prime(H))


def coordinate_change_apply(c: CoordinateChange, point) -> tuple[float, float]:
    q, p = map(float, point)
    Q, P = c.forward(q, p)
    return float(Q), float(P)


__all__ = [
    "CATALOG_LABELS",
    "CoordinateChange",
    "Deformation",
    "FORMULAS",
    "catalog",
    "coordinate_change_apply",
    "deform_energy",
    "deformed_volume_density",
    "get_deformation",
    "screen",
    "undeform_energy",
]
