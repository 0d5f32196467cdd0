"""Mass and energy conservation of the Crank-Nicolson schemes.

Both CN discretizations (finite-difference and spectral in space) conserve
the discrete mass exactly and, for time-independent potentials, a discrete
energy.  This script runs each for ten thousand steps on the torus
benchmark and prints the worst relative drifts, then contrasts them with
the leap-frog scheme, which is stable but only approximately conservative.
"""

import numpy as np

from dirac1d import SchemeConfig, preset, run_simulation

setup = preset("periodic-s51", epsilon=1.0)
problem = setup.discretize(h=np.pi / 16)

print(f"torus benchmark, N = {problem.grid.N}, tau = 0.01, 10^4 steps")
print(f"{'scheme':8s} {'mass drift':>12s} {'energy drift':>14s} {'wall':>7s}")
for scheme in ("cnfd", "cnfp", "lffd", "lffp"):
    result = run_simulation(problem, SchemeConfig(scheme, tau=0.01, t_final=100.0,
                                                  record="mass+energy"))
    m = result.mass_series
    e = result.energy_series
    mass_drift = np.abs(m - m[0]).max() / m[0]
    energy_drift = np.abs(e - e[0]).max() / (1 + abs(e[0]))
    print(f"{scheme:8s} {mass_drift:12.3e} {energy_drift:14.3e} {result.wall_time:6.1f}s")

print("\nThe CN schemes hold both invariants to solver precision; the")
print("leap-frog runs oscillate around the initial values at O(tau^2).")
