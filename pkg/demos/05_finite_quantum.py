"""
Finite-dimensional quantum mechanics with several inner products.

Each metric commuting with H makes H self-adjoint, gives the same unitary
flow up to the choice of norm, and the same thermal trace.
"""

import numpy as np

from hamlab.hilbert_finite import (
    HermitianStructure,
    QuantumSystem,
    alternative_structures,
    builtin_hamiltonian,
    hamilton_form_check,
    trace_invariance,
)

H = builtin_hamiltonian("random_hermitian_8")
structures = [HermitianStructure.standard(8)] + alternative_structures(H, 20, seed=1)
for beta in (0.5, 1.0, 2.0):
    r = trace_invariance(H, structures, beta)
    print(f"beta={beta}: Tr exp(-beta H) = {r['values'][0]:.12f}, spread over 21 structures {r['spread']:.1e}")

rng = np.random.default_rng(2)
psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
for G in structures[:3]:
    res = hamilton_form_check(QuantumSystem(G, H), psi)
    print(f"structure {G.label or 'standard':>12s}: Hamilton-form residual {res:.1e}")
