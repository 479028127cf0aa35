"""Measurement-modified dephasing of a single two-level system.

A superposition cos(theta/2)|e> + e^{i phi} sin(theta/2)|g> is re-measured
every ``tau``. The system's own rotation is undone before each measurement,
so the frequency omega_0 never enters the dephasing rate. The population
decay rate of the rotating-wave model is kept alongside for comparison;
it does depend on omega_0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bath import DEFAULT_QUADRATURE, BathSpec, as_kernels, integrate_spectrum
from .errors import DomainError


@dataclass(frozen=True)
class PreparedState:
    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def contrast(self):
        """Half the squared sine of theta: the coherence that dephasing can destroy."""
        if self.theta in (0.0, math.pi):  # sin(pi) is 1.2e-16 in floating point
            return 0.0
        return 0.5 * math.sin(self.theta) ** 2


EQUAL_SUPERPOSITION = PreparedState()


def survival_one_interval(tau, state: PreparedState, kernels) -> float:
    """Probability of finding the prepared state again after one interval."""
    k = as_kernels(kernels)
    return 1.0 - state.contrast * -math.expm1(-k.gamma(tau))


def gamma_rate(tau, state: PreparedState, kernels) -> float:
    """Effective inverse lifetime under measurements spaced by ``tau``."""
    if not tau > 0:
        raise DomainError(f"the rate is defined for tau > 0, got {tau}")
    k = as_kernels(kernels)
    loss = state.contrast * -math.expm1(-k.gamma(tau))
    return -math.log1p(-loss) / tau


def gamma_rate_expansion(tau, kernels) -> float:
    """Small-tau cubic ``a tau + b tau^3`` for the equal superposition."""
    a, b = expansion_coefficients(kernels)
    return a * tau + b * tau**3


def expansion_coefficients(kernels):
    """(a, b) with a = y and b = -y^2/2 - z/12."""
    y, z = as_kernels(kernels).moments
    return y, -0.5 * y * y - z / 12.0


def expansion_peak(kernels) -> float:
    """Location of the maximum of the cubic expansion, sqrt(a / (-3 b))."""
    a, b = expansion_coefficients(kernels)
    return math.sqrt(a / (-3.0 * b))


def decay_rate_rwa(tau, omega0, bath: BathSpec, options=DEFAULT_QUADRATURE) -> float:
    """Zeno-modified population decay rate of the rotating-wave emission model.

    tau * sum_k |g_k|^2 sinc^2[(w_k - w0) tau / 2]; zero-temperature formula.
    """
    if not tau > 0:
        raise DomainError(f"the rate is defined for tau > 0, got {tau}")
    if not bath.zero_temperature:
        warnings.warn("decay_rate_rwa is a zero-temperature formula; beta is ignored", stacklevel=2)

    def f(w):
        return np.sinc((w - omega0) * tau / (2.0 * math.pi)) ** 2

    if bath.is_discrete:
        g2, w = bath.mode_arrays()
        return float(tau * (g2 @ f(w)))
    zero_t = BathSpec.ohmic(bath.G, bath.omega_c, math.inf, bath.s)
    return float(tau * integrate_spectrum(f, zero_t, tau, options))


def rwa_expansion_coefficients(omega0, bath: BathSpec, options=DEFAULT_QUADRATURE):
    """(a~, b~) of the RWA rate: sum |g|^2 and -sum |g|^2 (w - w0)^2 / 12."""

    def f(w):
        return np.stack([np.ones_like(w), (w - omega0) ** 2], axis=-1)

    if bath.is_discrete:
        g2, w = bath.mode_arrays()
        a, m2 = g2 @ f(w)
    else:
        zero_t = BathSpec.ohmic(bath.G, bath.omega_c, math.inf, bath.s)
        a, m2 = integrate_spectrum(f, zero_t, 0.0, options)
    return float(a), float(-m2 / 12.0)


def gamma_rate_curve(taus, state: PreparedState, kernels) -> np.ndarray:
    k = as_kernels(kernels)
    return np.array([gamma_rate(t, state, k) for t in np.asarray(taus, dtype=float)])
