"""
Classical canonical partition functions and invariance experiments.

Estimators for ``Z = h^-1 int exp(-beta H) dp dq``:

``direct``     2-D quadrature over a box in (q, p)
``shell``      ``h^-1 int exp(-beta E) tau(E) dE`` from a period profile
``deformed``   the same shell integral for ``(H_f, dH_f ^ dt)``, in two forms
``boundary``   ``tau(0+) / (beta h)``, the boundary-term expression
``gaussian_nd``  closed-form Gaussian integral for the n-D family with ``|det B|`` volume

Units: ``k_B = 1``; ``h`` defaults to ``2 pi`` so ``hbar = 1``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .deformations import CoordinateChange, Deformation, undeform_energy
from .errors import ConvergenceError, HamlabError, InvalidSystemError
from .period_lab import PeriodProfile, log_energy_grid, period, period_profile
from .phase_flow import HamiltonianSystem1D, OscillatorFamilyND, _ray_root, make_system

TWO_PI = 2.0 * np.pi

METHODS = ("direct_2d", "shell", "deformed", "boundary", "gaussian_nd")


@dataclass(frozen=True)
class EnsembleParams:
    beta: float
    h: float = TWO_PI

    def __post_init__(self):
        for name in ("beta", "h"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def hbar(self) -> float:
        return self.h / TWO_PI

    def with_beta(self, beta: float) -> "EnsembleParams":
        return EnsembleParams(beta, self.h)


@dataclass(frozen=True)
class ZEstimate:
    value: float
    method: str
    error_bound: float
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown estimator {self.method!r}")
        if not self.value > 0:
            raise ConvergenceError(f"{self.method}: non-positive partition function {self.value}")
        if not self.error_bound >= 0:
            raise ValueError("error_bound must be non-negative")


def ho_reference(params: EnsembleParams, omega: float = 1.0) -> float:
    """``1 / (beta hbar omega)``."""
    return 1.0 / (params.beta * params.hbar * omega)


# ---------------------------------------------------------------- direct

def _box_integral(energy: Callable, beta: float, tol: float, weight: Callable | None = None,
                  offset: float = 0.0, max_growth: int = 8):
    """``int exp(-beta (E(q,p) + offset)) w(q,p)`` over a box containing ``{E <= E_cut}``.

    The box is grown until the tail outside it, bounded by
    ``exp(-beta E_cut) * area * max w * (1 + 2/(beta E_cut))``, is below
    ``0.1 * tol`` of the value. Inner integrals run at ``tol / 4``.
    """
    angles = np.linspace(0.0, TWO_PI, 64, endpoint=False)
    w = weight if weight is not None else (lambda q, p: 1.0)
    E_cut = (np.log(1.0 / tol) + 10.0) / beta
    for _ in range(max_growth):
        r = np.array([_ray_root(lambda s, c=np.cos(a), d=np.sin(a): energy(s * c, s * d) - E_cut)
                      for a in angles])
        Lq = 1.02 * np.max(np.abs(r * np.cos(angles)))
        Lp = 1.02 * np.max(np.abs(r * np.sin(angles)))
        # coarse estimate of the value to judge the tail against
        gq, gp = np.meshgrid(np.linspace(-Lq, Lq, 201), np.linspace(-Lp, Lp, 201))
        vals = np.exp(-beta * (energy(gq, gp) + offset)) * w(gq, gp)
        rough = float(vals.sum() * (2 * Lq / 200) * (2 * Lp / 200))
        w_max = 1.0
        if weight is not None:
            # weights here grow with |(q, p)|; sample the level curve and box corners
            eq = np.concatenate([r * np.cos(angles), [Lq, -Lq, Lq, -Lq]])
            ep = np.concatenate([r * np.sin(angles), [Lp, Lp, -Lp, -Lp]])
            w_max = float(np.max(np.abs(w(eq, ep))))
        tail = np.exp(-beta * (E_cut + offset)) * 4 * Lq * Lp * w_max * (1 + 2 / (beta * E_cut))
        if rough > 0 and tail <= 0.1 * tol * rough:
            break
        E_cut *= 1.5
    else:
        raise ConvergenceError(f"tail bound {tail:.3e} not achievable within the box-growth limit")

    inner_tol = tol / 4.0

    def inner(q):
        val, _ = quad(lambda p: np.exp(-beta * (energy(q, p) + offset)) * w(q, p), -Lp, Lp,
                      points=[0.0], epsabs=0.0, epsrel=inner_tol, limit=200)
        return val

    value, abserr = quad(inner, -Lq, Lq, points=[0.0], epsabs=1e-3 * tol * rough,
                         epsrel=tol, limit=200)
    meta = {"box": (float(Lq), float(Lp)), "E_cut": float(E_cut), "tail_bound": float(tail)}
    return float(value), float(abserr + tail), meta


def z_direct(system: HamiltonianSystem1D, params: EnsembleParams, tol: float = 1e-8,
             offset: float = 0.0) -> ZEstimate:
    """``h^-1 iint exp(-beta (H + offset)) dq dp`` by iterated adaptive quadrature."""
    value, err, meta = _box_integral(system.energy, params.beta, tol, offset=offset)
    meta.update(system=system.label, beta=params.beta, offset=offset)
    return ZEstimate(value / params.h, "direct_2d", err / params.h, meta)


# ---------------------------------------------------------------- shell integrals

_X_GRID = np.arange(-740.0, 705.0, 0.25)


def _half_line_integral(g: Callable, tol: float):
    """``int_0^inf g(E) dE`` computed as ``int g(e^x) e^x dx`` over the support of the integrand.

    The support is located on a fixed grid in x; the part outside it is
    bounded by the grid sum there and added to the error estimate.
    """
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        E = np.exp(_X_GRID)
        y = np.nan_to_num(g(E) * E, nan=0.0, posinf=np.inf)
    if not np.all(np.isfinite(y)):
        raise ConvergenceError("integrand is not finite (divergent partition integral)")
    peak = float(np.max(y))
    if not peak > 0:
        raise ConvergenceError("integrand vanishes identically")
    support = np.nonzero(y > 1e-5 * tol * peak)[0]
    i0, i1 = support[0], support[-1]
    if i0 == 0 or i1 == len(_X_GRID) - 1:
        raise ConvergenceError("integrand does not decay at the ends of the energy range (divergence)")
    i0, i1 = max(i0 - 4, 0), min(i1 + 4, len(_X_GRID) - 1)
    x_lo, x_hi = _X_GRID[i0], _X_GRID[i1]
    x_peak = _X_GRID[int(np.argmax(y))]
    dx = _X_GRID[1] - _X_GRID[0]
    rough = float(np.sum(y) * dx)
    outside = float((np.sum(y[:i0]) + np.sum(y[i1 + 1:])) * dx)

    def integrand(x):
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            e = np.exp(x)
            v = g(np.array([e]))[0] * e
        return 0.0 if not np.isfinite(v) else float(v)

    pts = [x_peak] if x_lo < x_peak < x_hi else None
    value, abserr = quad(integrand, x_lo, x_hi, points=pts, epsabs=1e-4 * tol * rough,
                         epsrel=0.1 * tol, limit=500)
    return float(value), float(abserr + outside), {"x_range": (float(x_lo), float(x_hi))}


def default_profile(system: HamiltonianSystem1D, betas, per_decade: int = 33,
                    tol: float = 1e-11) -> PeriodProfile:
    """Profile covering ``[1e-4/beta_max, 100/beta_min]``; tails are power-law extrapolated."""
    betas = np.atleast_1d(np.asarray(betas, float))
    return period_profile(system, emin=1e-4 / betas.max(), emax=100.0 / betas.min(),
                          per_decade=per_decade, tol=tol)


def _check_profile(profile: PeriodProfile) -> None:
    if profile.low_exponent <= -1.0:
        raise ConvergenceError(
            f"period diverges like E^{profile.low_exponent:.3f} at the critical point; not integrable"
        )


def z_shell(system: HamiltonianSystem1D, params: EnsembleParams,
            period_profile: PeriodProfile | None = None, tol: float = 1e-8) -> ZEstimate:
    """``h^-1 int exp(-beta E) tau(E) dE`` with tau interpolated from the profile."""
    prof = period_profile if period_profile is not None else default_profile(system, params.beta)
    _check_profile(prof)
    beta = params.beta

    def g(E):
        return np.exp(-beta * E) * prof(E)

    value, err, meta = _half_line_integral(g, tol)
    meta.update(system=system.label, beta=beta, profile_method=prof.method,
                profile_range=(float(prof.energies[0]), float(prof.energies[-1])))
    return ZEstimate(value / params.h, "shell", err / params.h, meta)


def z_deformed(system: HamiltonianSystem1D, deformation: Deformation, params: EnsembleParams,
               period_profile: PeriodProfile | None = None, tol: float = 1e-8) -> ZEstimate:
    """Partition function of ``(H_f, dH_f ^ dt)``.

    Energy form: ``h^-1 int exp(-beta H_f(E)) f'(beta0 E) tau(E) dE``.
    Substituted form: ``h^-1 int exp(-beta u) tau(H_f^-1(u)) du``.
    The reported value is the energy form; the two must agree.
    """
    prof = period_profile if period_profile is not None else default_profile(system, params.beta)
    _check_profile(prof)
    beta, d = params.beta, deformation

    def g_energy(E):
        with np.errstate(over="ignore", invalid="ignore"):
            boltz = np.exp(-beta * d.f(d.beta0 * E) / d.beta0)
            val = boltz * d.f_prime(d.beta0 * E) * prof(E)
        return np.where(boltz > 0, val, 0.0)

    def g_subst(u):
        with np.errstate(over="ignore", invalid="ignore"):
            # the inverse overflows (log1p: E = e^u - 1) long after exp(-beta u) is negligible
            E = np.minimum(undeform_energy(d, u), 1e300)
            return np.exp(-beta * u) * prof(E)

    a, err_a, meta_a = _half_line_integral(g_energy, tol)
    b, err_b, meta_b = _half_line_integral(g_subst, tol)
    gap = abs(a - b)
    meta = {
        "system": system.label, "deformation": d.label, "beta0": d.beta0, "beta": beta,
        "energy_form": a / params.h, "substituted_form": b / params.h,
        "form_gap_rel": gap / abs(a), "consistent": bool(gap <= max(tol, 1e-12) * abs(a) + err_a + err_b),
        "x_range_energy": meta_a["x_range"], "x_range_subst": meta_b["x_range"],
    }
    return ZEstimate(a / params.h, "deformed", (err_a + gap) / params.h, meta)


def z_coordinate_change(change: CoordinateChange, params: EnsembleParams,
                        tol: float = 1e-8) -> tuple[ZEstimate, ZEstimate]:
    """Both sides of ``int exp(-beta H') dP dQ = int exp(-beta H) dp dq`` on the unit oscillator.

    The left side is integrated over (q, p) with ``dP ^ dQ = F(H) dp ^ dq``.
    """
    H = CoordinateChange.base_energy

    def weight(q, p):
        return change.jacobian_F(H(q, p))

    value, err, meta = _box_integral(change.H_prime, params.beta, tol, weight=weight)
    meta.update(deformation=change.deformation.label, beta=params.beta, side="lhs")
    lhs = ZEstimate(value / params.h, "direct_2d", err / params.h, meta)
    rhs = z_direct(make_system("ho"), params, tol)
    rhs.metadata["side"] = "rhs"
    return lhs, rhs


RICHARDSON_EPS = (1e-4, 1e-5, 1e-6)


def z_boundary(system: HamiltonianSystem1D, params: EnsembleParams,
               period_profile: PeriodProfile | None = None, eps: float | None = None,
               E_max: float | None = None) -> ZEstimate:
    """``-(1/beta h) [exp(-beta E_max) tau(E_max) - exp(-beta eps) tau(eps)]``.

    The lower term is extrapolated to ``eps -> 0`` (Richardson, ratio 10)
    from ``eps, 10 eps, 100 eps``; with ``eps=None`` the sequence is
    1e-4, 1e-5, 1e-6. Periods come from the profile when given, otherwise they
    are computed directly.
    """
    beta, h = params.beta, params.h
    eps_seq = RICHARDSON_EPS if eps is None else (100 * eps, 10 * eps, eps)
    E_max = 50.0 / beta if E_max is None else E_max

    def tau(E):
        return float(period_profile(E)) if period_profile is not None else period(system, E, tol=1e-12)

    lower = [np.exp(-beta * e) * tau(e) for e in eps_seq]
    finite = bool(np.all(np.isfinite(lower)))
    upper = np.exp(-beta * E_max) * tau(E_max)
    # linear leading behaviour in eps: remove it with ratio-10 extrapolation twice
    r1 = [(10 * lower[i + 1] - lower[i]) / 9 for i in range(2)]
    g0 = (100 * r1[1] - r1[0]) / 99 if finite else lower[-1]
    value = -(upper - g0) / (beta * h)
    err = (abs(g0 - lower[-1]) + abs(upper)) / (beta * h)
    meta = {
        "system": system.label, "beta": beta, "eps": list(eps_seq), "E_max": E_max,
        "lower_terms": [float(v) for v in lower], "lower_extrapolated": float(g0),
        "upper_term": float(upper), "tau_eps_finite": finite,
    }
    return ZEstimate(float(value), "boundary", float(err), meta)


def z_gaussian_nd(family: OscillatorFamilyND, params: EnsembleParams, tol: float = 1e-12) -> ZEstimate:
    """``h^-n int exp(-beta H_B) |det B| d^n p d^n q``.

    Each Gaussian factor is evaluated through a Cholesky factor of B; the
    volume factor ``|det B|`` comes from an independent LU determinant.
    """
    B = family.B
    n = family.dimension
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise InvalidSystemError("B is not positive-definite") from None
    log_gauss = 0.5 * n * np.log(TWO_PI / params.beta) - np.sum(np.log(np.diag(L)))
    sign, log_vol = np.linalg.slogdet(B)
    log_z = 2 * log_gauss + log_vol - n * np.log(params.h)
    value = float(np.exp(log_z))
    cond = float(np.linalg.cond(B))
    meta = {"n": n, "log_det_cholesky": float(2 * np.sum(np.log(np.diag(L)))),
            "log_det_lu": float(log_vol), "condition": cond}
    return ZEstimate(value, "gaussian_nd", 10 * n * np.finfo(float).eps * cond * value, meta)


def gaussian_nd_reference(n: int, params: EnsembleParams) -> float:
    """``(2 pi / (beta h))^n``."""
    return (TWO_PI / (params.beta * params.h)) ** n


def internal_energy(system: HamiltonianSystem1D, params: EnsembleParams, offset: float = 0.0,
                    rel_step: float = 1e-3, tol: float = 1e-11) -> float:
    """``U = -d ln Z / d beta`` by central differences of :func:`z_direct`."""
    d = rel_step * params.beta
    zp = z_direct(system, params.with_beta(params.beta + d), tol, offset).value
    zm = z_direct(system, params.with_beta(params.beta - d), tol, offset).value
    return -(np.log(zp) - np.log(zm)) / (2 * d)


def shift_invariance_check(system: HamiltonianSystem1D, params: EnsembleParams, c: float,
                           tol: float = 1e-11) -> dict:
    """Compare ``Z(H + c)`` with ``exp(-beta c) Z(H)`` and the internal-energy shift with c."""
    z0 = z_direct(system, params, tol).value
    zc = z_direct(system, params, tol, offset=c).value
    U0 = internal_energy(system, params, tol=tol)
    Uc = internal_energy(system, params, offset=c, tol=tol)
    return {
        "c": c,
        "ratio": zc / z0,
        "expected_ratio": float(np.exp(-params.beta * c)),
        "U": U0,
        "U_shifted": Uc,
        "U_shift": Uc - U0,
    }


# ---------------------------------------------------------------- experiments

@dataclass
class InvarianceReport:
    system: str
    deformations: list[str]
    betas: list[float]
    estimates: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    spread_by_beta: dict = field(default_factory=dict)
    max_relative_spread: float = float("nan")
    verdict: str = "discrepancy"
    tol: float = 0.0

    def cells(self):
        """Cells in a stable order: by beta, then estimator, then deformation label."""
        keys = set(self.estimates) | set(self.errors)
        order = {"direct": 0, "shell": 1, "boundary": 2, "deformed": 3}
        return sorted(keys, key=lambda k: (k[0], order.get(k[1], 9), k[2]))


def relative_spread(values: Sequence[float]) -> float:
    """Largest pairwise relative difference, ``(max - min) / min``."""
    v = np.asarray(values, float)
    if v.size < 2:
        return 0.0
    return float((v.max() - v.min()) / np.min(np.abs(v)))


def run_invariance_experiment(system: HamiltonianSystem1D, deformations: Sequence[Deformation],
                              beta_grid: Sequence[float], params: EnsembleParams | None = None,
                              tol: float = 1e-6, workers: int | None = None,
                              profile: PeriodProfile | None = None) -> InvarianceReport:
    """All estimators at every beta; verdict is invariant iff every spread <= 10 tol."""
    h = params.h if params is not None else TWO_PI
    betas = [float(b) for b in beta_grid]
    if not betas:
        raise ValueError("beta grid is empty")
    prof = profile if profile is not None else default_profile(system, betas)
    est_tol = min(tol, 1e-8)

    tasks = []
    for b in betas:
        p = EnsembleParams(b, h)
        tasks.append(((b, "direct", ""), lambda p=p: z_direct(system, p, est_tol)))
        tasks.append(((b, "shell", ""), lambda p=p: z_shell(system, p, prof, est_tol)))
        tasks.append(((b, "boundary", ""), lambda p=p: z_boundary(system, p)))
        for d in deformations:
            tasks.append(((b, "deformed", d.label),
                          lambda p=p, d=d: z_deformed(system, d, p, prof, est_tol)))

    def run_one(task):
        key, fn = task
        try:
            return key, fn(), None
        except (HamlabError, ValueError, ArithmeticError) as exc:
            return key, None, f"{type(exc).__name__}: {exc}"

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, tasks))
    else:
        results = [run_one(t) for t in tasks]

    report = InvarianceReport(system.label, [d.label for d in deformations], betas, tol=tol)
    for key, est, err in results:
        if est is not None:
            report.estimates[key] = est
        else:
            report.errors[key] = err
    for b in betas:
        vals = [e.value for k, e in report.estimates.items() if k[0] == b]
        report.spread_by_beta[b] = relative_spread(vals)
    report.max_relative_spread = max(report.spread_by_beta.values())
    ok = not report.errors and report.max_relative_spread <= 10 * tol
    report.verdict = "invariant_within_tol" if ok else "discrepancy"
    return report


__all__ = [
    "EnsembleParams",
    "InvarianceReport",
    "RICHARDSON_EPS",
    "ZEstimate",
    "default_profile",
    "gaussian_nd_reference",
    "ho_reference",
    "internal_energy",
    "relative_spread",
    "run_invariance_experiment",
    "shift_invariance_check",
    "z_boundary",
    "z_coordinate_change",
    "z_deformed",
    "z_direct",
    "z_gaussian_nd",
    "z_shell",
]
