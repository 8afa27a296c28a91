"""
Nonlinear ladder operators A = f(n) a on a truncated Fock space.

The second inner product makes A^dagger and its adjoint a canonical pair, and
the thermal trace taken in either orthonormal basis is the oscillator value.
"""

import numpy as np

from hamlab.fock_nonlinear import (
    F_CATALOG,
    build_ladder,
    build_nonlinear,
    deformed_commutator_residual,
    scale_spread,
    second_structure,
    trace_pair,
    truncation_tail,
)

N = 64
ops = build_ladder(N)
for label, f in F_CATALOG.items():
    nl = build_nonlinear(ops, f, "f_first")
    s = second_structure(nl)
    print(f"\nf = {label}: commutator residual {deformed_commutator_residual(nl, relative=True):.1e}, "
          f"basis scale spread {scale_spread(s):.3g}")
    for beta in (0.5, 1.0, 2.0):
        tr1, tr2 = trace_pair(None, s, beta)
        ref = 1 / (2 * np.sinh(beta / 2))
        print(f"  beta={beta}: Tr1={tr1:.14f} Tr2={tr2:.14f} closed form {ref:.14f} "
              f"tail {truncation_tail(N, beta):.1e}")
