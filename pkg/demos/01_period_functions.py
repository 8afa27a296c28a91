"""
Period function of the three built-in systems.

The oscillator is isochronous, the quartic well has tau ~ E^(-1/4), and the
oscillator with a quartic correction interpolates between the two. Each value
is computed by turning-point quadrature and by timing one orbit.
"""

import numpy as np

from hamlab.period_lab import enclosed_area, log_energy_grid, period_quadrature, period_return_time
from hamlab.phase_flow import make_system

E = log_energy_grid(1e-2, 1e2, 1)
for name in ("ho", "quartic", "ho_plus_quartic"):
    system = make_system(name)
    print(f"\n{name}")
    print(f"{'E':>10s} {'tau (quadrature)':>18s} {'tau (return time)':>18s} {'dA/dE':>14s}")
    for e in E:
        h = 1e-4 * e
        dA = (enclosed_area(system, e + h) - enclosed_area(system, e - h)) / (2 * h)
        print(f"{e:10.3g} {period_quadrature(system, e):18.12f} {period_return_time(system, e):18.12f} {dA:14.9f}")

print(f"\n2 pi = {2 * np.pi:.12f}")
