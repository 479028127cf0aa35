"""
Adding a tunnelling term
========================

With delta != 0 the model is no longer exactly solvable. A second-order
time-convolutionless master equation gives the reduced state instead.
"""

import numpy as np

from zeno_dephase.bath import BathSpec
from zeno_dephase.crossover import find_crossovers
from zeno_dephase.master_equation import DissipativeRateCurve, ReducedState, evolve_reduced_state

bath = BathSpec.ohmic(0.01, 50.0, 1.0)

# one trajectory evaluates the rate on a whole tau grid
for delta in (0.0, 0.1, 1.0):
    curve = DissipativeRateCurve(2, 0.1, delta, bath, 1.0)
    report = find_crossovers(curve, 2e-3, 1.0, samples=300, grid="linear")
    print(f"delta={delta}: maxima at", ", ".join(f"{e.tau:.3f}" for e in report.maxima))

# the integrator checks trace and Hermiticity as it goes
rho = evolve_reduced_state(1, 0.1, 1.0, bath, 1.0, 1e-3, ReducedState.coherent(1)).rho
print("trace", np.trace(rho).real, "max |rho - rho^H|", np.max(np.abs(rho - rho.conj().T)))
