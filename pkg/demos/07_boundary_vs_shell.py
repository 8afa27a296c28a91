"""
Boundary-term formula against the shell integral.

For the oscillator both equal 1/(beta hbar omega). With a quartic correction
the period varies with energy and the boundary value no longer matches; the
gap is printed, not judged.
"""

from hamlab.canonical_z import EnsembleParams, z_boundary, z_shell
from hamlab.phase_flow import make_system

for name in ("ho", "ho_plus_quartic"):
    system = make_system(name)
    print(f"\n{name}")
    for beta in (0.1, 1.0, 10.0):
        params = EnsembleParams(beta)
        shell, bnd = z_shell(system, params), z_boundary(system, params)
        print(f"  beta={beta:<5g} shell={shell.value:.9f} (+/- {shell.error_bound:.1e})  "
              f"boundary={bnd.value:.9f} (+/- {bnd.error_bound:.1e})  gap={abs(bnd.value / shell.value - 1):.3e}")
