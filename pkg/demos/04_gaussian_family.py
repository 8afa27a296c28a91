"""
Quadratic Hamiltonians H = (q^T B q + p^T B^-1 p)/2 all share the partition
function (2 pi / beta h)^n, whatever the positive-definite B.
"""

import numpy as np

from hamlab.canonical_z import EnsembleParams, gaussian_nd_reference, relative_spread, z_gaussian_nd
from hamlab.phase_flow import OscillatorFamilyND, random_spd

rng = np.random.default_rng(0)
params = EnsembleParams(0.5)
for n in (1, 2, 3):
    vals = [z_gaussian_nd(OscillatorFamilyND(random_spd(n, rng)), params).value for _ in range(20)]
    print(f"n={n}: reference {gaussian_nd_reference(n, params):.12f}  mean {np.mean(vals):.12f}  "
          f"spread {relative_spread(vals):.1e}")
