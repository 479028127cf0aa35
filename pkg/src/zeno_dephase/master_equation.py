"""Second-order time-local master equation for H_S = w0 J_z + delta J_x.

    d rho/dt = i [rho, H_S] + int_0^t dt' { [F(t') rho(t), F] C(t') + h.c. }

with F = 2 J_z, F(t') = U_S(t') F U_S(t')^+ and C the bath correlation
function. rho(t) sits outside the memory integral, so the memory enters
only through the operator

    K(t) = int_0^t F(t') C(t') dt'

which is precomputed on the integration grid. At delta = 0 the generator
is exact and reproduces the pure-dephasing solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .bath import DEFAULT_QUADRATURE, BathSpec, correlation_on_grid
from .collective import check_spin, coherent_state
from .errors import DomainError, IntegratorError

DRIFT_TOL = 1e-8
STEPS_PER_INTERVAL = 2000


@dataclass(frozen=True)
class SystemOperators:
    J: float
    omega0: float
    delta: float
    jz: np.ndarray
    jx: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray

    @classmethod
    def build(cls, J, omega0=0.0, delta=0.0):
        Jf = float(check_spin(J))
        m = np.arange(-Jf, Jf + 1.0)
        jz = np.diag(m)
        up = np.sqrt(Jf * (Jf + 1) - m[:-1] * (m[:-1] + 1))
        jp = np.diag(up, -1)
        jx = 0.5 * (jp + jp.T)
        energies, vectors = np.linalg.eigh(omega0 * jz + delta * jx)
        return cls(Jf, float(omega0), float(delta), jz, jx, energies, vectors)

    @property
    def coupling(self):
        return 2.0 * self.jz

    @property
    def hamiltonian(self):
        return self.omega0 * self.jz + self.delta * self.jx

    def propagator(self, t):
        """U_S(t) = exp(-i H_S t)."""
        v = self.vectors
        return (v * np.exp(-1j * self.energies * t)) @ v.conj().T


@dataclass
class ReducedState:
    rho: np.ndarray
    time: float = 0.0

    @classmethod
    def coherent(cls, J, theta=math.pi / 2, phi=0.0):
        psi = coherent_state(J, theta, phi)
        return cls(np.outer(psi, psi.conj()), 0.0)


@lru_cache(maxsize=16)
def _correlation_grid(bath: BathSpec, half_step: float, n_points: int, options=DEFAULT_QUADRATURE):
    c = correlation_on_grid(half_step, n_points, bath, options)
    c.setflags(write=False)
    return c


def memory_kernel(ops: SystemOperators, bath: BathSpec, half_step, n_points, options=DEFAULT_QUADRATURE):
    """K(t_j) for t_j = j * half_step, shape (n_points, d, d).

    In the H_S eigenbasis K_ab(t) = F_ab int_0^t e^{-i (E_a - E_b) t'} C(t') dt';
    each distinct Bohr frequency is integrated once with a cubic-spline
    antiderivative on the grid.
    """
    t = half_step * np.arange(n_points)
    c = _correlation_grid(bath, float(half_step), int(n_points), options)
    v = ops.vectors
    f_eig = v.conj().T @ ops.coupling @ v
    bohr = ops.energies[:, None] - ops.energies[None, :]
    d = len(ops.energies)
    k_eig = np.zeros((n_points, d, d), dtype=complex)
    integrals = {}
    for a in range(d):
        for b in range(d):
            if abs(f_eig[a, b]) < 1e-15:
                continue
            nu = round(float(bohr[a, b]), 12)
            if nu not in integrals:
                y = np.exp(-1j * nu * t) * c
                integrals[nu] = CubicSpline(t, y).antiderivative()(t)
            k_eig[:, a, b] = f_eig[a, b] * integrals[nu]
    return np.einsum("ij,njk,lk->nil", v, k_eig, v.conj())


def _generator(h_s, f):
    def rhs(rho, k):
        x = k @ rho @ f - f @ k @ rho
        return 1j * (rho @ h_s - h_s @ rho) + x + x.conj().T

    return rhs


def _check_drift(rho, trace0, t):
    tr = np.trace(rho).real
    herm = np.max(np.abs(rho - rho.conj().T))
    # written so that a non-finite state also fails
    if not (abs(tr - trace0) <= DRIFT_TOL and herm <= DRIFT_TOL):
        raise IntegratorError(
            f"state drifted at t={t:.4g} (trace error {abs(tr - trace0):.2e}, "
            f"Hermiticity error {herm:.2e}); use a smaller step",
            estimate=max(abs(tr - trace0), herm),
        )


def integrate(J, omega0, delta, bath: BathSpec, t_final, step, initial: ReducedState,
              options=DEFAULT_QUADRATURE, keep=False):
    """Fixed-step RK4 integration; returns (times, states) if keep else the final state."""
    if not step > 0:
        raise DomainError("step must be positive")
    if not t_final >= 0:
        raise DomainError("t_final must be non-negative")
    rho0 = np.asarray(initial.rho, dtype=complex)
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-10 or abs(np.trace(rho0).real - 1) > 1e-10:
        raise DomainError("initial state must be Hermitian with unit trace")
    n_steps = int(math.ceil(t_final / step - 1e-9))
    if n_steps == 0:
        return (np.array([initial.time]), rho0[None].copy()) if keep else ReducedState(rho0.copy(), initial.time)
    h = t_final / n_steps
    ops = SystemOperators.build(J, omega0, delta)
    kern = memory_kernel(ops, bath, 0.5 * h, 2 * n_steps + 1, options)
    rhs = _generator(ops.hamiltonian, ops.coupling)
    rho = rho0.copy()
    trace0 = np.trace(rho0).real
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4(rhs, kern, rho, trace0, h, n_steps, initial.time, keep)


def _rk4(rhs, kern, rho, trace0, h, n_steps, t0, keep):
    states = [rho.copy()] if keep else None
    for n in range(n_steps):
        k0, k1, k2 = kern[2 * n], kern[2 * n + 1], kern[2 * n + 2]
        a = rhs(rho, k0)
        b = rhs(rho + 0.5 * h * a, k1)
        c = rhs(rho + 0.5 * h * b, k1)
        d = rhs(rho + h * c, k2)
        rho = rho + (h / 6.0) * (a + 2 * b + 2 * c + d)
        if keep:
            states.append(rho.copy())
        if n % 64 == 63:
            _check_drift(rho, trace0, (n + 1) * h)
    _check_drift(rho, trace0, n_steps * h)
    if keep:
        return t0 + h * np.arange(n_steps + 1), np.array(states)
    return ReducedState(rho, t0 + n_steps * h)


def evolve_reduced_state(J, omega0, delta, bath: BathSpec, t_final, step, initial: ReducedState,
                         options=DEFAULT_QUADRATURE) -> ReducedState:
    """State at ``t_final`` under the master equation, from a product initial state."""
    return integrate(J, omega0, delta, bath, t_final, step, initial, options)


def _survivals(ops, psi, times, states, rotation):
    out = np.empty(len(times))
    for i, (t, rho) in enumerate(zip(times, states)):
        # <psi| U_R rho U_R^+ |psi> with U_R^+ |psi> = U_S(t) |psi>
        phi = ops.propagator(t) @ psi if rotation else psi
        out[i] = np.real(phi.conj() @ rho @ phi)
    return out


def survival_trajectory(J, omega0, delta, bath: BathSpec, t_final, step, theta=math.pi / 2, phi=0.0,
                        rotation=True, options=DEFAULT_QUADRATURE):
    """Single-interval survival s(t) on the whole grid 0..t_final."""
    initial = ReducedState.coherent(J, theta, phi)
    times, states = integrate(J, omega0, delta, bath, t_final, step, initial, options, keep=True)
    ops = SystemOperators.build(J, omega0, delta)
    psi = coherent_state(J, theta, phi)
    return times, _survivals(ops, psi, times, states, rotation)


def _rate(s, tau):
    if not s > 0:
        raise IntegratorError(f"survival {s:.3e} at tau={tau:.4g} is not positive "
                              "(positivity violated by the second-order generator)", estimate=s)
    return -math.log(s) / tau


def gamma_rate_dissipative(tau, J, omega0, delta, bath: BathSpec, theta=math.pi / 2, phi=0.0,
                           step=None, rotation=True, options=DEFAULT_QUADRATURE) -> float:
    """Inverse lifetime from one master-equation interval of length tau."""
    if not tau > 0:
        raise DomainError(f"the rate is defined for tau > 0, got {tau}")
    step = step or tau / STEPS_PER_INTERVAL
    times, s = survival_trajectory(J, omega0, delta, bath, tau, step, theta, phi, rotation, options)
    return _rate(s[-1], tau)


class DissipativeRateCurve:
    """Gamma(tau) on [0, tau_max] from a single trajectory.

    One integration gives s(t) at every grid time, which is exactly the
    single-interval survival for tau = t. Values between grid points come
    from a cubic spline of s.
    """

    def __init__(self, J, omega0, delta, bath, tau_max, step=None, theta=math.pi / 2, phi=0.0,
                 rotation=True, options=DEFAULT_QUADRATURE):
        step = step or tau_max / (2 * STEPS_PER_INTERVAL)
        self.times, self.survival = survival_trajectory(
            J, omega0, delta, bath, tau_max, step, theta, phi, rotation, options
        )
        self._spline = CubicSpline(self.times, self.survival)
        self.tau_max = tau_max

    def __call__(self, tau):
        if not 0 < tau <= self.tau_max * (1 + 1e-12):
            raise DomainError(f"tau={tau} outside (0, {self.tau_max}]")
        return _rate(float(self._spline(tau)), tau)

    def rates(self):
        """(times, Gamma) at the grid points, t = 0 excluded."""
        t, s = self.times[1:], self.survival[1:]
        return t, -np.log(s) / t
