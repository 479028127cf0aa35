"""Brute-force reference: spin(s) plus a few bosonic modes in truncated Fock space.

Everything here is computed from the full Hamiltonian

    H = w0 J_z + delta J_x + sum_k w_k b_k^+ b_k + 2 J_z sum_k (g_k^* b_k + g_k b_k^+)

by dense matrix exponentiation, with no use of the analytic kernels. It is
the independent check for the kernel sums, the collective formula, the
back-action recipe and the master equation at delta = 0.

Basis ordering is system-major: index = i_spin * dim_bath + i_bath, with
spin states ordered m = -J .. J and modes as a Kronecker product in the
order given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .collective import check_spin, coherent_state
from .errors import AccuracyError, DomainError, ResourceError

MAX_DIMENSION = 4096
LEAKAGE_TOL = 1e-8
UNITARITY_TOL = 1e-10


def thermal_state(omega, beta, n_max):
    """Gibbs state of one mode truncated to n_max quanta and renormalized."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    n = np.arange(n_max + 1)
    if math.isinf(beta):
        p = (n == 0).astype(float)
        return np.diag(p)
    x = math.exp(-beta * omega)
    leak = x ** (n_max + 1)  # weight beyond the cutoff in the untruncated state
    if leak > LEAKAGE_TOL:
        raise ResourceError(
            f"thermal weight {leak:.2e} above n_max={n_max} exceeds {LEAKAGE_TOL:g}", size=n_max
        )
    p = x**n
    return np.diag(p / p.sum())


@dataclass(frozen=True)
class TruncatedBath:
    modes: tuple  # ((g_k, w_k), ...)
    n_max: int = 14
    beta: float = math.inf

    def __post_init__(self):
        modes = tuple((complex(g), float(w)) for g, w in self.modes)
        object.__setattr__(self, "modes", modes)
        if not modes:
            raise DomainError("a truncated bath needs at least one mode")
        for _, w in modes:
            thermal_state(w, self.beta, self.n_max)  # leakage check

    @classmethod
    def from_bath(cls, bath, n_max=14):
        if not bath.is_discrete:
            raise DomainError("the Fock oracle needs a discrete bath")
        return cls(bath.modes, n_max, bath.beta)

    @property
    def dim(self):
        return (self.n_max + 1) ** len(self.modes)

    def joint_dimension(self, J):
        return int(2 * check_spin(J) + 1) * self.dim

    def operators(self):
        """Annihilation operator of every mode on the full bath space, and H_B."""
        d = self.n_max + 1
        a = np.diag(np.sqrt(np.arange(1, d)), 1)
        eye = np.eye(d)
        ops = []
        for k in range(len(self.modes)):
            factors = [a if j == k else eye for j in range(len(self.modes))]
            ops.append(reduce(np.kron, factors))
        h_b = sum(w * (b.conj().T @ b) for (_, w), b in zip(self.modes, ops))
        return ops, h_b

    def thermal(self):
        d = self.n_max + 1
        states = [thermal_state(w, self.beta, self.n_max) for _, w in self.modes]
        return reduce(np.kron, states) if states else np.eye(d)


def spin_operators(J):
    """(J_z, J_x) in the basis m = -J .. J."""
    Jf = float(check_spin(J))
    m = np.arange(-Jf, Jf + 1.0)
    jz = np.diag(m)
    # <m+1|J_+|m> = sqrt(J(J+1) - m(m+1))
    up = np.sqrt(Jf * (Jf + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(up, -1)
    jx = 0.5 * (jp + jp.T)
    return jz, jx


def _system_hamiltonian(J, omega0, delta):
    jz, jx = spin_operators(J)
    return omega0 * jz + delta * jx


def joint_hamiltonian(bath: TruncatedBath, J, omega0=0.0, delta=0.0):
    ds = int(2 * check_spin(J) + 1)
    if bath.joint_dimension(J) > MAX_DIMENSION:
        raise ResourceError(
            f"joint dimension {bath.joint_dimension(J)} exceeds {MAX_DIMENSION}",
            size=bath.joint_dimension(J),
        )
    jz, _ = spin_operators(J)
    ops, h_b = bath.operators()
    coupling = sum(np.conj(g) * b + g * b.conj().T for (g, _), b in zip(bath.modes, ops))
    h_s = _system_hamiltonian(J, omega0, delta)
    return (
        np.kron(h_s, np.eye(bath.dim))
        + np.kron(np.eye(ds), h_b)
        + np.kron(2.0 * jz, coupling)
    )


def evolution_operator(bath, J, t, omega0=0.0, delta=0.0):
    h = joint_hamiltonian(bath, J, omega0, delta)
    u = scipy.linalg.expm(-1j * t * h)
    err = np.max(np.abs(u.conj().T @ u - np.eye(len(u))))
    if err > UNITARITY_TOL:
        raise AccuracyError(f"matrix exponential not unitary to {UNITARITY_TOL:g} (error {err:.2e})", err)
    return u


def exact_survival_discrete(bath: TruncatedBath, J, theta, phi, tau, N,
                            with_rotation=True, omega0=0.0, delta=0.0):
    """Probability that N measurements of |psi><psi|, spaced by tau, all succeed.

    The environment is never reset: after each successful projection the
    bath keeps its conditioned state.
    """
    if N < 1:
        raise DomainError("N must be at least 1")
    ds = int(2 * check_spin(J) + 1)
    u = evolution_operator(bath, J, tau, omega0, delta)
    if with_rotation:
        u_r = scipy.linalg.expm(1j * tau * _system_hamiltonian(J, omega0, delta))
        u = np.kron(u_r, np.eye(bath.dim)) @ u
    psi = coherent_state(J, theta, phi)
    # bath operator <psi| U |psi>; the projected joint state stays |psi><psi| (x) sigma
    blocks = u.reshape(ds, bath.dim, ds, bath.dim)
    a = np.einsum("i,iajb,j->ab", psi.conj(), blocks, psi)
    sigma = bath.thermal().astype(complex)
    for _ in range(N):
        sigma = a @ sigma @ a.conj().T
    return float(np.trace(sigma).real)


def exact_dephasing_offdiagonal(bath: TruncatedBath, J, t, theta=math.pi / 2, phi=0.0, omega0=0.0):
    """Ratio rho_S(t)_{mn} / rho_S(0)_{mn} from exact joint evolution (delta = 0)."""
    ds = int(2 * check_spin(J) + 1)
    psi = coherent_state(J, theta, phi)
    rho_s0 = np.outer(psi, psi.conj())
    if t == 0:
        return np.ones((ds, ds), dtype=complex)
    u = evolution_operator(bath, J, t, omega0)
    rho0 = np.kron(rho_s0, bath.thermal())
    rho = u @ rho0 @ u.conj().T
    rho_s = np.einsum("iaja->ij", rho.reshape(ds, bath.dim, ds, bath.dim))
    return rho_s / rho_s0


def reduced_evolution(bath: TruncatedBath, J, t, rho_s0, omega0=0.0, delta=0.0):
    """Exact reduced state at time t from the product initial state rho_s0 (x) rho_B."""
    ds = int(2 * check_spin(J) + 1)
    u = evolution_operator(bath, J, t, omega0, delta)
    rho = u @ np.kron(rho_s0, bath.thermal()) @ u.conj().T
    return np.einsum("iaja->ij", rho.reshape(ds, bath.dim, ds, bath.dim))


# fixed fixtures used by the oracle checks
ONE_MODE = ((0.2, 3.0),)  # |g|^2 = 0.04
TWO_MODES = ((0.2, 2.0), (math.sqrt(0.02), 5.0))  # |g|^2 = 0.04, 0.02
