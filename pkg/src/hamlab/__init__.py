"""
hamlab: numerical laboratory for alternative Hamiltonian descriptions.

Modules
-------
phase_flow      one-degree-of-freedom systems, vector fields, flows
period_lab      period function, enclosed area, time function
deformations    energy reparametrizations and the noncanonical coordinate change
canonical_z     classical partition-function estimators
hilbert_finite  finite-dimensional quantum mechanics with several Hermitian structures
fock_nonlinear  truncated Fock space, nonlinear ladder operators, the two traces
lab_cli         experiment configs, runner and report writer
"""

__version__ = "0.1.0"

from .canonical_z import (  # noqa: E402
    EnsembleParams,
    ZEstimate,
    run_invariance_experiment,
    z_boundary,
    z_coordinate_change,
    z_deformed,
    z_direct,
    z_gaussian_nd,
    z_shell,
)
from .deformations import CoordinateChange, Deformation, get_deformation  # noqa: E402
from .phase_flow import HamiltonianSystem1D, OscillatorFamilyND, integrate, make_system  # noqa: E402
from .period_lab import enclosed_area, period, period_profile  # noqa: E402

__all__ = [
    "CoordinateChange",
    "Deformation",
    "EnsembleParams",
    "HamiltonianSystem1D",
    "OscillatorFamilyND",
    "ZEstimate",
    "__version__",
    "enclosed_area",
    "get_deformation",
    "integrate",
    "make_system",
    "period",
    "period_profile",
    "run_invariance_experiment",
    "z_boundary",
    "z_coordinate_change",
    "z_deformed",
    "z_direct",
    "z_gaussian_nd",
    "z_shell",
]
