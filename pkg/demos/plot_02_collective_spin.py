"""
Many spins in a common bath
===========================

A spin-J coherent state on the equator, coupled collectively. For J >= 1
the rate curve develops several maxima.
"""

from zeno_dephase.bath import BathSpec, KernelSet
from zeno_dephase.collective import coherent_weights, gamma_rate_collective
from zeno_dephase.crossover import find_crossovers

kernels = KernelSet(BathSpec.ohmic(0.01, 50.0, 1.0))

for J in (0.5, 1, 2, 50):
    w = coherent_weights(J)
    report = find_crossovers(lambda t: gamma_rate_collective(t, w, kernels), 0.005, 2.0,
                             samples=400, grid="linear")
    peaks = ", ".join(f"{e.tau:.3f}" for e in report.maxima)
    print(f"J={J:>4}: maxima at tau = {peaks}")
