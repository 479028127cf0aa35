"""Collective dephasing of 2J two-level systems sharing one bath.

The initial state is an SU(2) coherent state; its J_z populations are a
binomial distribution with success probability sin^2(theta/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .bath import as_kernels
from .errors import ConsistencyError, DomainError


@dataclass(frozen=True)
class CoherentWeights:
    J: float
    varsigma: complex
    m: np.ndarray  # -J .. J
    weights: np.ndarray  # |<J,m|varsigma,J>|^2

    @property
    def dimension(self):
        return len(self.m)


def check_spin(J) -> Fraction:
    """Return J as an exact half-integer, or raise DomainError."""
    two_j = Fraction(J).limit_denominator(1000) * 2
    if two_j.denominator != 1 or two_j < 0 or abs(float(two_j) - 2 * float(J)) > 1e-12:
        raise DomainError(f"J must be a non-negative half-integer, got {J}")
    return two_j / 2


def coherent_weights(J, theta=math.pi / 2, phi=0.0) -> CoherentWeights:
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    Jf = check_spin(J)
    n = int(2 * Jf)
    k = np.arange(n + 1)
    m = k - float(Jf)
    # |varsigma|^2 / (1 + |varsigma|^2) = sin^2(theta/2); theta = pi needs no pole
    p = math.sin(theta / 2) ** 2
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    logw = log_binom + xlogy(k, p) + xlog1py(n - k, -p)
    weights = np.exp(logw)
    weights /= weights.sum()
    varsigma = complex(math.inf) if theta == math.pi else np.exp(1j * phi) * math.tan(theta / 2)
    return CoherentWeights(float(Jf), varsigma, m, weights)


def coherent_state(J, theta=math.pi / 2, phi=0.0) -> np.ndarray:
    """Amplitudes <J,m|varsigma,J>, ordered m = -J .. J."""
    w = coherent_weights(J, theta, phi)
    k = np.arange(len(w.m))
    return np.sqrt(w.weights) * np.exp(1j * phi * k)


def _survival_terms(w: CoherentWeights, phase_scale, gamma):
    """w_m w_n e^{-i phase_scale (m^2 - n^2)} e^{-gamma (m-n)^2} - w_m w_n, as a matrix."""
    m = w.m
    phase = phase_scale * (m[:, None] ** 2 - m[None, :] ** 2)
    diff2 = (m[:, None] - m[None, :]) ** 2
    ww = w.weights[:, None] * w.weights[None, :]
    # e^{-g d} e^{-i p} - 1 written so small tau loses no digits
    damp = np.expm1(-gamma * diff2)
    minus_one = damp * np.cos(phase) - 2.0 * np.sin(0.5 * phase) ** 2 - 1j * (damp + 1.0) * np.sin(phase)
    return ww * minus_one


def survival_collective(tau, w: CoherentWeights, kernels) -> float:
    """Single-interval survival of the coherent state without back-action."""
    return 1.0 + _survival_deficit(tau, w, kernels)


def _survival_deficit(tau, w, kernels):
    k = as_kernels(kernels)
    terms = _survival_terms(w, k.delta(tau), k.gamma(tau))
    total = terms.sum()
    if abs(total.imag) > 1e-12:
        raise ConsistencyError(f"double sum is not real (imaginary part {total.imag:.3e})")
    return float(total.real)


def gamma_rate_collective(tau, w: CoherentWeights, kernels) -> float:
    """Inverse lifetime of the coherent state under repeated measurement."""
    if not tau > 0:
        raise DomainError(f"the rate is defined for tau > 0, got {tau}")
    deficit = _survival_deficit(tau, w, kernels)
    if not deficit > -1.0:
        raise ConsistencyError(f"survival {1 + deficit:.3e} is not positive; kernel evaluation failed")
    return -math.log1p(deficit) / tau


def survival_chi_interaction(tau, w: CoherentWeights, chi) -> float:
    """Survival under H = chi J_z^2 with no bath (qualitative model of the indirect interaction)."""
    if not tau >= 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    terms = _survival_terms(w, chi * tau, 0.0)
    return float(1.0 + terms.sum().real)


def survival_chi_modulus(tau, w: CoherentWeights, chi) -> float:
    """Same quantity as |sum_m w_m e^{-i chi tau m^2}|^2."""
    amp = np.sum(w.weights * np.exp(-1j * chi * tau * w.m**2))
    return float(abs(amp) ** 2)
