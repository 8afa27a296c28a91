"""
The oscillator partition function does not see how its energy is reparametrized.

For every catalog deformation f the deformed integral reproduces
1/(beta hbar omega); for the quartic well the value changes with f.
"""

from hamlab.canonical_z import EnsembleParams, ho_reference, z_deformed, z_direct
from hamlab.deformations import catalog
from hamlab.phase_flow import make_system

for name in ("ho", "quartic"):
    system = make_system(name)
    print(f"\n{name}")
    for beta in (0.1, 1.0, 10.0):
        params = EnsembleParams(beta)
        base = z_direct(system, params).value
        row = "  ".join(f"{d.label}={z_deformed(system, d, params).value / base:.9f}" for d in catalog())
        print(f"  beta={beta:<5g} Z={base:.9g}  ratios: {row}")
    if name == "ho":
        print(f"  reference at beta=1: {ho_reference(EnsembleParams(1.0)):.9g}")
