"""Fixture comparisons between the analytic machinery and the Fock-space oracle.

Each check returns a row with the observed error and its tolerance; the
CLI ``oracle-check`` subcommand exits 0 only if every row passes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bath import BathSpec, KernelSet
from .collective import coherent_weights, survival_collective
from .correlated import survival_with_backaction
from .fock_oracle import (
    ONE_MODE,
    TWO_MODES,
    TruncatedBath,
    exact_dephasing_offdiagonal,
    exact_survival_discrete,
    reduced_evolution,
)
from .master_equation import ReducedState, evolve_reduced_state

FIXTURES = {"one-mode": ONE_MODE, "two-mode": TWO_MODES}
BETAS = (1.0, math.inf)


@dataclass(frozen=True)
class CheckResult:
    tau: float
    check: str
    N: int
    J: float
    beta: float
    error: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.error <= self.tolerance)

    def as_row(self):
        row = asdict(self)
        row["passed"] = self.passed
        return row


def _baths(name, beta, n_max=14):
    modes = FIXTURES[name]
    return BathSpec.discrete(modes, beta), TruncatedBath(modes, n_max, beta)


def kernel_checks(tau=0.7):
    """|rho_01(t)| / |rho_01(0)| = exp(-gamma(t)) for one spin."""
    out = []
    for name in FIXTURES:
        for beta in BETAS:
            bath, fock = _baths(name, beta)
            ratio = exact_dephasing_offdiagonal(fock, 0.5, tau)[0, 1]
            err = abs(abs(ratio) - math.exp(-KernelSet(bath).gamma(tau)))
            out.append(CheckResult(tau, f"kernel-gamma/{name}", 1, 0.5, beta, err, 1e-8))
    return out


def backaction_checks(tau=0.7, spins=(0.5, 1.0), max_n=3):
    out = []
    for name in FIXTURES:
        for beta in BETAS:
            bath, fock = _baths(name, beta)
            kernels = KernelSet(bath)
            for J in spins:
                w = coherent_weights(J)
                for N in range(1, max_n + 1):
                    exact = exact_survival_discrete(fock, J, math.pi / 2, 0.0, tau, N)
                    approx = survival_with_backaction(tau, N, w, kernels).survival
                    out.append(CheckResult(tau, f"backaction/{name}", N, J, beta,
                                           abs(approx - exact), 1e-8))
                exact = exact_survival_discrete(fock, J, math.pi / 2, 0.0, tau, 1)
                err = abs(survival_collective(tau, w, kernels) - exact)
                out.append(CheckResult(tau, f"collective/{name}", 1, J, beta, err, 1e-8))
    return out


def truncation_checks(tau=0.7, J=0.5, N=3):
    out = []
    for name in FIXTURES:
        for beta in BETAS:
            a = exact_survival_discrete(TruncatedBath(FIXTURES[name], 14, beta), J, math.pi / 2, 0.0, tau, N)
            b = exact_survival_discrete(TruncatedBath(FIXTURES[name], 16, beta), J, math.pi / 2, 0.0, tau, N)
            out.append(CheckResult(tau, f"truncation/{name}", N, J, beta, abs(a - b), 1e-9))
    return out


def master_equation_checks(t=1.5, omega0=0.1, spins=(0.5, 1.0)):
    """Master equation at delta = 0 against exact joint evolution, elementwise relative."""
    out = []
    for beta in BETAS:
        bath, fock = _baths("one-mode", beta)
        for J in spins:
            initial = ReducedState.coherent(J)
            me = evolve_reduced_state(J, omega0, 0.0, bath, t, t / 3000, initial).rho
            exact = reduced_evolution(fock, J, t, initial.rho, omega0)
            err = float(np.max(np.abs(me - exact) / np.abs(exact)))
            out.append(CheckResult(t, "master-equation/one-mode", 1, J, beta, err, 1e-5))
    return out


def run_all():
    return kernel_checks() + backaction_checks() + truncation_checks() + master_equation_checks()

