"""
Experiment configuration: strict YAML schema, validation and hashing.

A config is a YAML mapping. Keys common to every experiment::

    experiment   one of EXPERIMENT_KINDS (required)
    id           experiment id used in reports (default: the kind)
    seed         integer seed for every random draw (default 0)
    tol          tolerance in (1e-14, 1e-1) (default depends on the kind)
    betas        list of positive inverse temperatures
    h            Planck constant (default 2 pi)
    output       report directory (default reports/<id>)
    workers      worker threads (default 1; HAMLAB_WORKERS overrides)

Each kind accepts a few more keys, listed in KIND_KEYS. Unknown keys are
rejected with the line they appear on.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any

import yaml

from ..deformations import CATALOG_LABELS, get_deformation
from ..errors import ConfigError, DeformationRejected
from ..fock_nonlinear import F_CATALOG, ORDERINGS
from ..hilbert_finite import TEST_SYSTEMS
from ..period_lab import METHODS as PERIOD_METHODS
from ..phase_flow import SYSTEM_CATALOG, SYSTEM_DEFAULTS

EXPERIMENT_KINDS = (
    "classical_invariance",
    "coordinate_change",
    "gaussian_nd",
    "period_profile",
    "quantum_finite",
    "fock_traces",
    "boundary_vs_shell",
)

COMMON_KEYS = ("experiment", "id", "seed", "tol", "betas", "h", "output", "workers")

KIND_KEYS: dict[str, tuple[str, ...]] = {
    "classical_invariance": ("system", "system_params", "deformations", "beta0"),
    "coordinate_change": ("deformations", "beta0"),
    "gaussian_nd": ("dims", "samples"),
    "period_profile": ("system", "system_params", "emin", "emax", "per_decade", "methods"),
    "quantum_finite": ("quantum_system", "structures", "states"),
    "fock_traces": ("f", "cutoffs", "ordering"),
    "boundary_vs_shell": ("system", "system_params"),
}

KIND_DEFAULTS: dict[str, dict[str, Any]] = {
    "classical_invariance": {
        "system": "ho", "system_params": {}, "deformations": list(CATALOG_LABELS),
        "beta0": 1.0, "betas": [0.1, 1.0, 10.0], "tol": 1e-6,
    },
    "coordinate_change": {
        "deformations": ["identity", "exp_ramp"], "beta0": 1.0, "betas": [0.5, 1.0, 2.0], "tol": 1e-6,
    },
    "gaussian_nd": {"dims": [1, 2, 3], "samples": 20, "betas": [0.1, 1.0, 10.0], "tol": 1e-9},
    "period_profile": {
        "system": "ho", "system_params": {}, "emin": 1e-3, "emax": 1e3, "per_decade": 2,
        "methods": list(PERIOD_METHODS), "betas": [], "tol": 1e-6,
    },
    "quantum_finite": {
        "quantum_system": "diag2", "structures": 20, "states": 100, "betas": [0.5, 1.0, 2.0], "tol": 1e-10,
    },
    "fock_traces": {
        "f": ["one_plus_tanh"], "cutoffs": [64], "ordering": "f_first", "betas": [0.5, 1.0, 2.0], "tol": 1e-12,
    },
    "boundary_vs_shell": {
        "system": "ho_plus_quartic", "system_params": {}, "betas": [0.1, 1.0, 10.0], "tol": 1e-5,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; ``params`` holds the kind-specific keys."""

    kind: str
    experiment_id: str
    seed: int
    tol: float
    betas: tuple[float, ...]
    h: float
    params: dict = field(default_factory=dict)
    output: str = ""
    workers: int = 1

    def canonical(self) -> dict:
        """Everything that determines the results (output and workers excluded)."""
        data = asdict(self)
        data.pop("output")
        data.pop("workers")
        data["betas"] = list(self.betas)
        return data

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _key_lines(text: str) -> dict[str, int]:
    """Line numbers (1-based) of the top-level keys."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


class _Diag:
    def __init__(self, source: str, lines: dict[str, int]):
        self.source = source
        self.lines = lines

    def fail(self, key: str | None, message: str) -> ConfigError:
        where = self.source
        if key is not None and key in self.lines:
            where = f"{where}:{self.lines[key]}"
        field_ = f" field '{key}':" if key else ""
        return ConfigError(f"{where}:{field_} {message}")


def _positive_float(d: _Diag, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise d.fail(key, f"expected a number, got {value!r}")
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise d.fail(key, f"must be positive and finite, got {value}")
    return value


def _int(d: _Diag, key: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise d.fail(key, f"expected an integer, got {value!r}")
    if value < minimum:
        raise d.fail(key, f"must be >= {minimum}, got {value}")
    return int(value)


def _label_list(d: _Diag, key: str, value, available) -> list[str]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not value:
        raise d.fail(key, "expected a nonempty list of labels")
    for item in value:
        if item not in available:
            raise d.fail(key, f"unknown label {item!r}; available: {list(available)}")
    return list(value)


def _system_params(d: _Diag, system: str, value) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise d.fail("system_params", "expected a mapping of parameter names to numbers")
    allowed = SYSTEM_DEFAULTS[system]
    out = {}
    for k, v in value.items():
        if k not in allowed:
            raise d.fail("system_params", f"system {system!r} takes {sorted(allowed)}, got {k!r}")
        out[k] = _positive_float(d, "system_params", v)
    return dict(sorted(out.items()))


def validate(raw: Any, source: str = "<config>", lines: dict[str, int] | None = None) -> ExperimentConfig:
    """Validate a parsed mapping, filling defaults."""
    d = _Diag(source, lines or {})
    if not isinstance(raw, dict):
        raise d.fail(None, "config must be a mapping of keys to values")
    kind = raw.get("experiment")
    if kind is None:
        raise d.fail(None, f"missing required key 'experiment' (one of {list(EXPERIMENT_KINDS)})")
    if kind not in EXPERIMENT_KINDS:
        raise d.fail("experiment", f"unknown experiment {kind!r}; available: {list(EXPERIMENT_KINDS)}")
    allowed = set(COMMON_KEYS) | set(KIND_KEYS[kind])
    for key in raw:
        if key not in allowed:
            raise d.fail(key, f"unknown key {key!r} for experiment {kind!r}; allowed: {sorted(allowed)}")

    merged = dict(KIND_DEFAULTS[kind])
    merged.update({k: v for k, v in raw.items() if v is not None})

    exp_id = merged.get("id", kind)
    if not isinstance(exp_id, str) or not exp_id or any(c in exp_id for c in "/\\"):
        raise d.fail("id", f"expected a plain name, got {exp_id!r}")
    seed = _int(d, "seed", merged.get("seed", 0), 0)
    tol = merged["tol"]
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not 1e-14 < float(tol) < 1e-1:
        raise d.fail("tol", f"must lie in (1e-14, 1e-1), got {tol!r}")
    betas = merged["betas"]
    if isinstance(betas, (int, float)) and not isinstance(betas, bool):
        betas = [betas]
    if not isinstance(betas, list):
        raise d.fail("betas", "expected a list of positive numbers")
    if not betas and kind != "period_profile":
        raise d.fail("betas", "beta grid must be nonempty")
    betas = tuple(_positive_float(d, "betas", b) for b in betas)
    h = _positive_float(d, "h", merged.get("h", 2 * math.pi))
    output = merged.get("output", os.path.join("reports", exp_id))
    if not isinstance(output, str) or not output:
        raise d.fail("output", "expected a directory path")
    workers = _int(d, "workers", merged.get("workers", 1), 1)

    params: dict[str, Any] = {}
    if "system" in KIND_KEYS[kind]:
        system = merged["system"]
        if system not in SYSTEM_CATALOG:
            raise d.fail("system", f"unknown system {system!r}; available: {sorted(SYSTEM_CATALOG)}")
        params["system"] = system
        params["system_params"] = _system_params(d, system, merged.get("system_params"))
    if "deformations" in KIND_KEYS[kind]:
        labels = merged["deformations"]
        labels = [labels] if isinstance(labels, str) else labels
        if not isinstance(labels, list) or not labels:
            raise d.fail("deformations", "expected a nonempty list of labels")
        beta0 = _positive_float(d, "beta0", merged["beta0"])
        for label in labels:
            try:
                get_deformation(label, beta0)
            except DeformationRejected as exc:
                raise d.fail("deformations", str(exc)) from None
        params["deformations"] = list(labels)
        params["beta0"] = beta0
    if kind == "gaussian_nd":
        dims = merged["dims"]
        dims = [dims] if isinstance(dims, int) else dims
        if not isinstance(dims, list) or not dims:
            raise d.fail("dims", "expected a nonempty list of dimensions")
        params["dims"] = [_int(d, "dims", n, 1) for n in dims]
        params["samples"] = _int(d, "samples", merged["samples"], 1)
    if kind == "period_profile":
        emin = _positive_float(d, "emin", merged["emin"])
        emax = _positive_float(d, "emax", merged["emax"])
        if not emin < emax:
            raise d.fail("emax", f"need emin < emax, got {emin}, {emax}")
        params.update(emin=emin, emax=emax, per_decade=_int(d, "per_decade", merged["per_decade"], 1))
        params["methods"] = _label_list(d, "methods", merged["methods"], PERIOD_METHODS)
    if kind == "quantum_finite":
        qs = merged["quantum_system"]
        if qs not in TEST_SYSTEMS:
            raise d.fail("quantum_system", f"unknown quantum system {qs!r}; available: {list(TEST_SYSTEMS)}")
        params["quantum_system"] = qs
        params["structures"] = _int(d, "structures", merged["structures"], 1)
        params["states"] = _int(d, "states", merged["states"], 1)
    if kind == "fock_traces":
        params["f"] = _label_list(d, "f", merged["f"], F_CATALOG)
        cutoffs = merged["cutoffs"]
        cutoffs = [cutoffs] if isinstance(cutoffs, int) else cutoffs
        if not isinstance(cutoffs, list) or not cutoffs:
            raise d.fail("cutoffs", "expected a nonempty list of cutoffs")
        params["cutoffs"] = [_int(d, "cutoffs", n, 8) for n in cutoffs]
        if merged["ordering"] not in ORDERINGS:
            raise d.fail("ordering", f"expected one of {list(ORDERINGS)}, got {merged['ordering']!r}")
        params["ordering"] = merged["ordering"]

    return ExperimentConfig(kind, exp_id, seed, float(tol), betas, h, params, output, workers)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: YAML syntax error: {problem}") from None
    return validate(raw, source, _key_lines(text))


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML experiment config."""
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, path)


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Re-validate with command-line values replacing config fields (None = keep)."""
    raw = {"experiment": config.kind, "id": config.experiment_id, "seed": config.seed,
           "tol": config.tol, "betas": list(config.betas), "h": config.h,
           "output": config.output, "workers": config.workers}
    raw.update(config.params)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return validate(raw, "<command line>")


__all__ = [
    "COMMON_KEYS",
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "KIND_DEFAULTS",
    "KIND_KEYS",
    "apply_overrides",
    "load_config",
    "parse_config",
    "validate",
]
