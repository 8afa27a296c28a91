"""
Experiment execution: turns a validated config into report cells.

Each experiment kind expands into independent tasks; tasks run on a thread
pool and their cells are concatenated in task order, so the report does not
depend on the worker count. A task that raises becomes an error cell and the
run continues.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..canonical_z import (
    EnsembleParams,
    default_profile,
    gaussian_nd_reference,
    ho_reference,
    relative_spread,
    run_invariance_experiment,
    z_boundary,
    z_coordinate_change,
    z_gaussian_nd,
    z_shell,
)
from ..deformations import CoordinateChange, get_deformation
from ..errors import HamlabError
from ..fock_nonlinear import (
    build_ladder,
    build_nonlinear,
    commutator,
    deformed_commutator_residual,
    get_f,
    heisenberg_residual,
    oscillator_partition,
    second_adjoint,
    second_structure,
    tilde_hamiltonian,
    trace_pair,
    truncation_tail,
)
from ..hilbert_finite import (
    HermitianStructure,
    QuantumSystem,
    alternative_structures,
    builtin_hamiltonian,
    hamilton_form_check,
    schrodinger_flow,
    trace_invariance,
)
from ..period_lab import period, log_energy_grid
from ..phase_flow import OscillatorFamilyND, is_isochronous, make_system, random_spd
from .config import ExperimentConfig

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ReportRecord:
    """One report cell. ``passed`` is None for cells that are recorded but not judged."""

    experiment_id: str
    beta: float | None
    method: str
    label: str
    value: float | None
    error_bound: float | None
    reference: float | None = None
    passed: bool | None = None
    contract: bool = False
    error: str = ""

    @property
    def failed_contract(self) -> bool:
        return self.contract and (self.passed is False or bool(self.error))


Task = Callable[[], list]


def _cell(cfg: ExperimentConfig, beta, method, label, value, bound, reference=None,
          passed=None, contract=False) -> ReportRecord:
    return ReportRecord(cfg.experiment_id, beta, method, label,
                        None if value is None else float(value),
                        None if bound is None else float(bound),
                        None if reference is None else float(reference),
                        None if passed is None else bool(passed), contract)


def _rounding_bound(value: float, n_ops: int = 64) -> float:
    return float(n_ops * EPS * max(1.0, abs(value)))


def _system(cfg: ExperimentConfig):
    return make_system(cfg.params["system"], **cfg.params["system_params"])


# classical_invariance ------------------------------------------------------

def _classical_invariance(cfg: ExperimentConfig) -> tuple[list[Task], Callable]:
    system = _system(cfg)
    contract = is_isochronous(system)
    deformations = [get_deformation(label, cfg.params["beta0"]) for label in cfg.params["deformations"]]

    def task():
        report = run_invariance_experiment(system, deformations, cfg.betas,
                                           EnsembleParams(cfg.betas[0], cfg.h), cfg.tol,
                                           workers=cfg.workers)
        cells = []
        for key in report.cells():
            beta, method, label = key
            params = EnsembleParams(beta, cfg.h)
            ref = ho_reference(params, system.omega) if contract else None
            if key in report.errors:
                cells.append(ReportRecord(cfg.experiment_id, beta, method, label, None, None, ref,
                                          False, contract, report.errors[key]))
                continue
            est = report.estimates[key]
            ok = abs(est.value / ref - 1.0) <= 10 * cfg.tol if contract else None
            cells.append(_cell(cfg, beta, method, label, est.value, est.error_bound, ref, ok, contract))
        for beta in report.betas:
            spread = report.spread_by_beta[beta]
            bound = max((e.error_bound / e.value for k, e in report.estimates.items() if k[0] == beta),
                        default=0.0)
            cells.append(_cell(cfg, beta, "spread", "all", spread, 2 * bound, None,
                               spread <= 10 * cfg.tol, contract))
        return cells

    def verdict(cells):
        bad = any(c.error for c in cells)
        spreads = [c.value for c in cells if c.method == "spread"]
        ok = not bad and spreads and max(spreads) <= 10 * cfg.tol
        return "invariant_within_tol" if ok else "discrepancy"

    return [task], verdict


# coordinate_change ---------------------------------------------------------

def _coordinate_change(cfg: ExperimentConfig):
    tasks = []
    for beta in cfg.betas:
        for label in cfg.params["deformations"]:
            def task(beta=beta, label=label):
                change = CoordinateChange(get_deformation(label, cfg.params["beta0"]))
                lhs, rhs = z_coordinate_change(change, EnsembleParams(beta, cfg.h), min(cfg.tol, 1e-8))
                gap = abs(lhs.value / rhs.value - 1.0)
                bound = lhs.error_bound / lhs.value + rhs.error_bound / rhs.value
                return [
                    _cell(cfg, beta, "transformed", label, lhs.value, lhs.error_bound),
                    _cell(cfg, beta, "original", label, rhs.value, rhs.error_bound),
                    _cell(cfg, beta, "relative_gap", label, gap, bound, 0.0, gap <= cfg.tol, True),
                ]
            tasks.append(task)

    def verdict(cells):
        ok = all(c.passed for c in cells if c.method == "relative_gap") and not any(c.error for c in cells)
        return "equal_within_tol" if ok else "discrepancy"

    return tasks, verdict


# gaussian_nd ---------------------------------------------------------------

def _gaussian_nd(cfg: ExperimentConfig):
    tasks = []
    for n in cfg.params["dims"]:
        # one seeded draw of matrices per dimension, shared across beta
        rng = np.random.default_rng([cfg.seed, n])
        mats = [random_spd(n, rng) for _ in range(cfg.params["samples"])]
        for beta in cfg.betas:
            def task(n=n, beta=beta, mats=mats):
                params = EnsembleParams(beta, cfg.h)
                ests = [z_gaussian_nd(OscillatorFamilyND(B), params) for B in mats]
                vals = [e.value for e in ests]
                ref = gaussian_nd_reference(n, params)
                bound = max(e.error_bound for e in ests)
                spread = relative_spread(vals)
                worst = max(abs(v / ref - 1.0) for v in vals)
                return [
                    _cell(cfg, beta, "mean", f"n={n}", float(np.mean(vals)), bound, ref,
                          worst <= cfg.tol, True),
                    _cell(cfg, beta, "spread", f"n={n}", spread, 2 * bound / ref, 0.0,
                          spread <= cfg.tol, True),
                ]
            tasks.append(task)

    def verdict(cells):
        ok = all(c.passed for c in cells) and not any(c.error for c in cells)
        return "independent_of_B" if ok else "discrepancy"

    return tasks, verdict


# period_profile ------------------------------------------------------------

_AGREEMENT = {"return_time": 1e-6, "area_derivative": 1e-5}


def _period_profile(cfg: ExperimentConfig):
    system = _system(cfg)
    methods = list(cfg.params["methods"])
    if not system.separable and "turning_point_quadrature" in methods:
        methods.remove("turning_point_quadrature")
    energies = log_energy_grid(cfg.params["emin"], cfg.params["emax"], cfg.params["per_decade"])
    ptol = min(cfg.tol, 1e-10)

    tasks = []
    for E in energies:
        def task(E=float(E)):
            label = f"E={E:.6e}"
            values = {m: period(system, E, m, ptol) for m in methods}
            cells = []
            for m in methods:
                bound = (1e-9 if m == "area_derivative" else 10 * ptol) * values[m]
                cells.append(_cell(cfg, None, m, label, values[m], bound))
            base = "turning_point_quadrature" if "turning_point_quadrature" in methods else methods[0]
            for m in methods:
                if m == base:
                    continue
                gap = abs(values[m] / values[base] - 1.0)
                limit = _AGREEMENT.get(m, 1e-6)
                cells.append(_cell(cfg, None, f"agreement:{m}", label, gap, 20 * ptol, 0.0,
                                   gap <= limit, True))
            if is_isochronous(system):
                ref = 2 * math.pi / system.omega
                gap = abs(values[base] / ref - 1.0)
                cells.append(_cell(cfg, None, "isochrony", label, values[base], 10 * ptol * ref,
                                   ref, gap <= 1e-8, True))
            return cells
        tasks.append(task)

    def verdict(cells):
        ok = all(c.passed is not False for c in cells) and not any(c.error for c in cells)
        return "methods_agree" if ok else "discrepancy"

    return tasks, verdict


# quantum_finite ------------------------------------------------------------

def _quantum_finite(cfg: ExperimentConfig):
    H = builtin_hamiltonian(cfg.params["quantum_system"], cfg.seed)
    n = H.shape[0]
    label = cfg.params["quantum_system"]
    structures = alternative_structures(H, cfg.params["structures"], seed=cfg.seed)
    all_structures = [HermitianStructure.standard(n)] + structures
    exact = np.linalg.eigvalsh(H)

    tasks = []
    for beta in cfg.betas:
        def trace_task(beta=beta):
            r = trace_invariance(H, all_structures, beta)
            ref = float(np.sum(np.exp(-beta * exact)))
            bound = _rounding_bound(ref, 16 * n)
            return [
                _cell(cfg, beta, "trace_standard", label, r["values"][0], bound, ref,
                      abs(r["values"][0] / ref - 1.0) <= cfg.tol, True),
                _cell(cfg, beta, "trace_spread", label, r["spread"], 2 * bound / ref, 0.0,
                      r["spread"] <= cfg.tol, True),
            ]
        tasks.append(trace_task)

    def hamilton_task():
        rng = np.random.default_rng([cfg.seed, 1])
        states = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(cfg.params["states"])]
        cells = []
        for name, s in (("standard", all_structures[0]), ("alternative", structures[0])):
            system = QuantumSystem(s, H)
            worst = max(hamilton_form_check(system, psi) for psi in states)
            cells.append(_cell(cfg, None, "hamilton_residual", name, worst, 1e-8, 0.0, worst <= 1e-6, True))
        return cells

    def unitarity_task():
        rng = np.random.default_rng([cfg.seed, 2])
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        worst = 0.0
        for s in all_structures:
            system = QuantumSystem(s, H)
            n0 = s.norm(psi)
            for t in np.linspace(0.0, 10.0, 11):
                worst = max(worst, abs(s.norm(schrodinger_flow(system, psi, t)) / n0 - 1.0))
        return [_cell(cfg, None, "norm_drift", label, worst, _rounding_bound(1.0, 16 * n), 0.0,
                      worst <= 1e-10, True)]

    tasks += [hamilton_task, unitarity_task]

    def verdict(cells):
        ok = all(c.passed is not False for c in cells) and not any(c.error for c in cells)
        return "trace_invariant" if ok else "discrepancy"

    return tasks, verdict


# fock_traces ---------------------------------------------------------------

def _fock_traces(cfg: ExperimentConfig):
    tasks = []
    for N in cfg.params["cutoffs"]:
        for f_label in cfg.params["f"]:
            f = get_f(f_label)

            def identity_task(N=N, f_label=f_label, f=f):
                ops = build_ladder(N)
                block = ops.space.block
                last = build_nonlinear(ops, f, "f_last", f_label)
                first = build_nonlinear(ops, f, "f_first", f_label)
                s = second_structure(first)
                B = second_adjoint(ops, first, s)
                target = np.diag(1.0 / first.f_values[:N]) @ ops.a
                heis = float(np.max(np.abs(block(commutator(B, first.A_dagger) - np.eye(N)))))
                levels = np.sort(np.linalg.eigvals(block(tilde_hamiltonian(first, s))).real)
                levels_gap = float(np.max(np.abs(levels - (np.arange(levels.size) + 0.5))))
                # residuals relative to the operator size: Phi grows like n f(n)^2
                rows = [
                    ("deformed_commutator[f_last]", deformed_commutator_residual(last, relative=True)),
                    ("second_adjoint[f_first]", float(np.max(np.abs(block(B - target))))),
                    ("heisenberg_algebra[f_first]", heis),
                    ("tilde_spectrum[f_first]", levels_gap),
                    ("heisenberg_motion", heisenberg_residual(ops, [2 * math.pi], first.A, relative=True)),
                ]
                lab = f"{f_label},N={N}"
                return [_cell(cfg, None, m, lab, v, _rounding_bound(N, 4 * N), 0.0, v <= 1e-10, True)
                        for m, v in rows]
            tasks.append(identity_task)

            for beta in cfg.betas:
                def trace_task(N=N, f_label=f_label, f=f, beta=beta):
                    ops = build_ladder(N)
                    s = second_structure(build_nonlinear(ops, f, cfg.params["ordering"], f_label))
                    tr1, tr2 = trace_pair(None, s, beta)
                    ref = oscillator_partition(beta)
                    trunc = truncation_tail(N, beta)
                    bound = _rounding_bound(tr1, 4 * N)
                    lab = f"{f_label},N={N}"
                    return [
                        _cell(cfg, beta, "trace_1", lab, tr1, bound + trunc, ref,
                              abs(tr1 - ref) <= trunc + 1e-10, True),
                        _cell(cfg, beta, "trace_2", lab, tr2, bound + trunc, ref,
                              abs(tr2 - ref) <= trunc + 1e-10, True),
                        _cell(cfg, beta, "trace_1_eq_trace_2", lab, abs(tr1 - tr2), 2 * bound, 0.0,
                              abs(tr1 - tr2) <= cfg.tol, True),
                    ]
                tasks.append(trace_task)

    def verdict(cells):
        ok = all(c.passed is not False for c in cells) and not any(c.error for c in cells)
        return "same_partition_function" if ok else "discrepancy"

    return tasks, verdict


# boundary_vs_shell ---------------------------------------------------------

def _boundary_vs_shell(cfg: ExperimentConfig):
    system = _system(cfg)
    contract = is_isochronous(system)
    prof = default_profile(system, cfg.betas)
    tasks = []
    for beta in cfg.betas:
        def task(beta=beta):
            params = EnsembleParams(beta, cfg.h)
            shell = z_shell(system, params, prof, min(cfg.tol, 1e-8))
            bnd = z_boundary(system, params, prof)
            gap = abs(bnd.value / shell.value - 1.0)
            bound = shell.error_bound / shell.value + bnd.error_bound / bnd.value
            ref = ho_reference(params, system.omega) if contract else None
            return [
                _cell(cfg, beta, "shell", system.label, shell.value, shell.error_bound, ref),
                _cell(cfg, beta, "boundary", system.label, bnd.value, bnd.error_bound, ref),
                _cell(cfg, beta, "relative_discrepancy", system.label, gap, bound, None,
                      gap <= cfg.tol if contract else None, contract),
            ]
        tasks.append(task)

    def verdict(cells):
        if any(c.error for c in cells):
            return "incomplete"
        if contract:
            return "agree_within_tol" if all(c.passed is not False for c in cells) else "discrepancy"
        worst = max(c.value for c in cells if c.method == "relative_discrepancy")
        return f"discrepancy_recorded max_relative={worst:.6e}"

    return tasks, verdict


EXPERIMENTS = {
    "classical_invariance": _classical_invariance,
    "coordinate_change": _coordinate_change,
    "gaussian_nd": _gaussian_nd,
    "period_profile": _period_profile,
    "quantum_finite": _quantum_finite,
    "fock_traces": _fock_traces,
    "boundary_vs_shell": _boundary_vs_shell,
}


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    records: list
    verdict: str

    @property
    def contract_failed(self) -> bool:
        return any(r.failed_contract for r in self.records)


def _error_record(cfg: ExperimentConfig, index: int, exc: BaseException) -> ReportRecord:
    return ReportRecord(cfg.experiment_id, None, "task", f"#{index}", None, None, None, False,
                        True, f"{type(exc).__name__}: {exc}")


def run(cfg: ExperimentConfig, workers: int | None = None) -> RunResult:
    """Execute an experiment; per-task failures become error cells."""
    try:
        tasks, verdict = EXPERIMENTS[cfg.kind](cfg)
    except (HamlabError, ValueError, ArithmeticError) as exc:
        rec = _error_record(cfg, 0, exc)
        return RunResult(cfg, [rec], "incomplete")
    workers = cfg.workers if workers is None else workers

    def one(item):
        index, task = item
        try:
            return task()
        except (HamlabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return [_error_record(cfg, index, exc)]

    items = list(enumerate(tasks))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, items))
    else:
        chunks = [one(item) for item in items]
    records = [r for chunk in chunks for r in chunk]
    return RunResult(cfg, records, verdict(records))


__all__ = ["EXPERIMENTS", "ReportRecord", "RunResult", "run"]
