"""
A noncanonical change of coordinates maps the oscillator to a new Hamiltonian
H'; integrating exp(-beta H') against the pulled-back volume gives the same Z.
"""

from hamlab.canonical_z import EnsembleParams, z_coordinate_change
from hamlab.deformations import CoordinateChange, get_deformation

for label in ("identity", "exp_ramp"):
    change = CoordinateChange(get_deformation(label))
    for beta in (0.5, 1.0, 2.0):
        lhs, rhs = z_coordinate_change(change, EnsembleParams(beta))
        print(f"{label:10s} beta={beta:<4g} transformed={lhs.value:.12f} original={rhs.value:.12f} "
              f"gap={abs(lhs.value / rhs.value - 1):.1e}")
