"""
Zeno to anti-Zeno crossover for one spin
========================================

A single spin in an equal superposition is dephased by an ohmic bath and
measured every tau. The effective decay rate rises, peaks and falls again.
"""

import numpy as np

from zeno_dephase.bath import BathSpec, KernelSet
from zeno_dephase.crossover import argmax_rate
from zeno_dephase.single_spin import EQUAL_SUPERPOSITION, expansion_coefficients, gamma_rate

# kernels are cached per bath, so sweeping tau is cheap
kernels = {beta: KernelSet(BathSpec.ohmic(0.01, 15.0, beta)) for beta in (0.25, 1.0, np.inf)}

taus = np.geomspace(1e-3, 5.0, 12)
print("tau       " + "  ".join(f"beta={b:<6}" for b in kernels))
for t in taus:
    print(f"{t:8.4f}  " + "  ".join(f"{gamma_rate(t, EQUAL_SUPERPOSITION, k):.6f}  " for k in kernels.values()))

# the peak separates the Zeno regime (left) from the anti-Zeno regime (right)
for beta, k in kernels.items():
    t_star, r_star = argmax_rate(lambda t: gamma_rate(t, EQUAL_SUPERPOSITION, k), 1e-3, 5.0)
    print(f"beta={beta}: peak at tau={t_star:.4f}, rate {r_star:.5f}")

# at small tau the rate is a tau + b tau^3
a, b = expansion_coefficients(kernels[1.0])
print(f"small-tau expansion: a={a:.5f}, b={b:.5f}")
