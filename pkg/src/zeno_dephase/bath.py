"""Bath description and the scalar kernels derived from it.

Every kernel is a weighted integral of the spectral density, e.g.

    gamma(tau) = 4 * int J(w)/w^2 [1 - cos(w tau)] coth(beta w / 2) dw

For a continuum bath the integral runs over [0, 50 * omega_c] on a mesh of
Gauss-Legendre panels whose count is doubled until two successive estimates
agree. A discrete bath replaces the integral by a sum over its modes with
weight |g_k|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AccuracyError, ConfigError, DomainError

OHMIC = "ohmic-continuum"
DISCRETE = "discrete"


@dataclass(frozen=True)
class QuadratureOptions:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    cutoffs: float = 50.0  # upper limit in units of omega_c
    order: int = 20  # Gauss-Legendre points per panel
    max_doublings: int = 10
    oscillation_threshold: float = 200.0  # tau * omega_c above which panels are capped
    floor: float = 1e-8  # frequencies below floor * omega_c use the small-w limit


DEFAULT_QUADRATURE = QuadratureOptions()


@dataclass(frozen=True)
class BathSpec:
    """Bosonic bath: an Ohmic-family continuum or an explicit list of modes.

    ``beta = math.inf`` is the zero-temperature sentinel; the thermal factor
    coth(beta w / 2) is then replaced by exactly 1.
    """

    kind: str
    G: float = 0.0
    omega_c: float = 1.0
    beta: float = math.inf
    modes: tuple = ()
    s: float = 1.0  # spectral exponent; 1 is Ohmic

    def __post_init__(self):
        if self.kind not in (OHMIC, DISCRETE):
            raise DomainError(f"unknown bath kind {self.kind!r}")
        if not (self.beta > 0):
            raise DomainError("beta must be positive (use math.inf for zero temperature)")
        if self.kind == OHMIC:
            if not (self.omega_c > 0):
                raise DomainError("omega_c must be positive")
            if not (self.G >= 0):
                raise DomainError("G must be non-negative")
        else:
            modes = tuple((complex(g), float(w)) for g, w in self.modes)
            if any(not (w > 0) for _, w in modes):
                raise DomainError("every mode frequency must be positive")
            object.__setattr__(self, "modes", modes)

    @classmethod
    def ohmic(cls, G, omega_c, beta=math.inf, s=1.0):
        return cls(OHMIC, G=float(G), omega_c=float(omega_c), beta=float(beta), s=float(s))

    @classmethod
    def discrete(cls, modes, beta=math.inf):
        return cls(DISCRETE, modes=tuple(modes), beta=float(beta))

    @property
    def is_discrete(self):
        return self.kind == DISCRETE

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    @property
    def frequency_scale(self):
        if self.is_discrete:
            return max((w for _, w in self.modes), default=1.0)
        return self.omega_c

    def spectral_density(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.is_discrete:
            raise DomainError("a discrete bath has no spectral density function")
        return self.G * omega**self.s * self.omega_c ** (1.0 - self.s) * np.exp(-omega / self.omega_c)

    def thermal_factor(self, omega):
        """coth(beta w / 2), or exactly 1 at zero temperature."""
        omega = np.asarray(omega, dtype=float)
        if self.zero_temperature:
            return np.ones_like(omega)
        return 1.0 / np.tanh(0.5 * self.beta * omega)

    def mode_arrays(self):
        """(|g_k|^2, omega_k) as arrays for a discrete bath."""
        g2 = np.array([abs(g) ** 2 for g, _ in self.modes], dtype=float)
        w = np.array([w for _, w in self.modes], dtype=float)
        return g2, w

    def discretize(self, K, omega_max=None, rule="trapezoid", order=20):
        """Replace a continuum bath by K discrete modes.

        ``rule="trapezoid"`` puts modes on a uniform grid; ``rule="gauss"``
        uses K/order Gauss-Legendre panels, which converges far faster for
        the same number of modes.
        """
        if self.is_discrete:
            return self
        omega_max = omega_max or 50.0 * self.omega_c
        if rule == "trapezoid":
            w = np.linspace(0.0, omega_max, K + 1)[1:]
            weights = np.full(K, w[1] - w[0])
            weights[-1] *= 0.5
        elif rule == "gauss":
            if K % order:
                raise DomainError(f"K must be a multiple of the panel order {order}")
            w, weights = _panel_nodes(omega_max, K // order, order)
        else:
            raise DomainError(f"unknown discretization rule {rule!r}")
        g2 = self.spectral_density(w) * weights
        return BathSpec.discrete(zip(np.sqrt(g2), w), beta=self.beta)

    def to_dict(self):
        beta = None if self.zero_temperature else self.beta
        if self.is_discrete:
            modes = []
            for g, w in self.modes:
                entry = {"g": g.real, "omega": w}
                if g.imag:
                    entry["g_imag"] = g.imag
                modes.append(entry)
            return {"kind": self.kind, "beta": beta, "modes": modes}
        d = {"kind": self.kind, "G": self.G, "omega_c": self.omega_c, "beta": beta}
        if self.s != 1.0:
            d["s"] = self.s
        return d

    @classmethod
    def from_dict(cls, d, prefix="bath"):
        """Build from a config mapping; ``beta`` of null/"inf" means zero temperature."""
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError(f"missing key: {prefix}.kind")
        kind = d["kind"]
        beta = _parse_beta(d.get("beta"), f"{prefix}.beta")
        try:
            if kind == OHMIC:
                for key in ("G", "omega_c"):
                    if key not in d:
                        raise ConfigError(f"missing key: {prefix}.{key}")
                return cls.ohmic(d["G"], d["omega_c"], beta, d.get("s", 1.0))
            if kind == DISCRETE:
                if "modes" not in d:
                    raise ConfigError(f"missing key: {prefix}.modes")
                modes = []
                for i, m in enumerate(d["modes"]):
                    if "omega" not in m or "g" not in m:
                        raise ConfigError(f"missing key: {prefix}.modes[{i}].g/omega")
                    modes.append((complex(m["g"], m.get("g_imag", 0.0)), m["omega"]))
                return cls.discrete(modes, beta)
        except DomainError as exc:
            raise ConfigError(f"invalid {prefix}: {exc}") from exc
        raise ConfigError(f"invalid value for {prefix}.kind: {kind!r}")


def _parse_beta(value, key):
    if value is None or value == "inf" or value == "Infinity":
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None


# ---------------------------------------------------------------------------
# quadrature


_RULES = {}


def _gauss_rule(order):
    if order not in _RULES:
        _RULES[order] = np.polynomial.legendre.leggauss(order)
    return _RULES[order]


def _panel_nodes(upper, n_panels, order):
    x, w = _gauss_rule(order)
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _initial_panels(bath, max_frequency, options):
    wc = bath.omega_c
    upper = options.cutoffs * wc
    width = wc / 4.0
    if not bath.zero_temperature:
        # keeps the coth poles at w = 2 pi i n / beta well outside each panel
        width = min(width, math.pi / bath.beta)
    if max_frequency > 0:
        period = 2.0 * math.pi / max_frequency
        if max_frequency * wc > options.oscillation_threshold:
            width = min(width, 0.5 * period)
        else:
            width = min(width, period)
    return upper, max(1, math.ceil(upper / width))


def _converge(bath, max_frequency, options, apply):
    """Run ``apply(nodes, weights * J(nodes))`` on successively doubled meshes."""
    upper, n_panels = _initial_panels(bath, max_frequency, options)
    floor = options.floor * bath.omega_c

    def estimate(n):
        nodes, weights = _panel_nodes(upper, n, options.order)
        nodes = np.maximum(nodes, floor)
        return apply(nodes, weights * bath.spectral_density(nodes))

    previous = estimate(n_panels)
    diff = math.inf
    for _ in range(options.max_doublings):
        n_panels *= 2
        current = estimate(n_panels)
        diff = np.max(np.abs(current - previous))
        scale = np.max(np.abs(current))
        if diff <= options.abs_tol or diff <= options.rel_tol * scale:
            return current
        previous = current
    raise AccuracyError(
        f"quadrature did not converge after {options.max_doublings} panel doublings "
        f"(last change {diff:.3e})",
        estimate=float(diff),
    )


def integrate_spectrum(
    integrand: Callable[[np.ndarray], np.ndarray],
    bath: BathSpec,
    max_frequency: float = 0.0,
    options: QuadratureOptions = DEFAULT_QUADRATURE,
):
    """Integrate ``integrand(w) * J(w)`` over [0, cutoffs * omega_c].

    ``integrand`` receives the node array and returns values of shape
    ``(n,)`` or ``(n, m)``. ``max_frequency`` is the largest time appearing
    in an oscillating factor cos(w t); it sets the initial panel width.
    """

    def apply(nodes, wj):
        vals = integrand(nodes)
        if vals.ndim == 1:
            return wj @ vals
        return wj @ vals.reshape(len(nodes), -1)

    return _converge(bath, max_frequency, options, apply)


def _two_sin2_half(x):
    """1 - cos(x), computed without cancellation."""
    return 2.0 * np.sin(0.5 * x) ** 2


def _sin_minus_x(x):
    x = np.asarray(x, dtype=float)
    out = np.sin(x) - x
    small = np.abs(x) < 1e-2
    xs = x[small]
    x2 = xs * xs
    out[small] = -xs * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    return out


def _check_time(t, name="tau"):
    t = float(t)
    if not t >= 0:
        raise DomainError(f"{name} must be non-negative, got {t}")
    return t


def _sum_or_integrate(bath, weight_fn, max_frequency, options):
    """Discrete: sum |g|^2 weight(w); continuum: integrate J(w) weight(w)."""
    if bath.is_discrete:
        g2, w = bath.mode_arrays()
        return g2 @ weight_fn(w)
    return integrate_spectrum(weight_fn, bath, max_frequency, options)


# ---------------------------------------------------------------------------
# the kernels


def gamma_kernel(tau, bath: BathSpec, options=DEFAULT_QUADRATURE) -> float:
    """Environment-induced dephasing exponent gamma(tau) >= 0."""
    tau = _check_time(tau)
    if tau == 0:
        return 0.0

    def f(w):
        return 4.0 * _two_sin2_half(w * tau) / w**2 * bath.thermal_factor(w)

    return float(max(_sum_or_integrate(bath, f, tau, options), 0.0))


def delta_kernel(tau, bath: BathSpec, options=DEFAULT_QUADRATURE) -> float:
    """Bath-mediated indirect interaction Delta(tau) <= 0 (temperature independent)."""
    tau = _check_time(tau)
    if tau == 0:
        return 0.0

    def f(w):
        return 4.0 * _sin_minus_x(w * tau) / w**2

    return float(min(_sum_or_integrate(bath, f, tau, options), 0.0))


def mu_kernel(tau, lag, bath: BathSpec, options=DEFAULT_QUADRATURE) -> float:
    """Commutator phase mu between displacement operators ``lag`` intervals apart."""
    tau = _check_time(tau)
    lag = int(lag)
    if tau == 0 or lag == 0:
        return 0.0
    if lag < 0:
        return -mu_kernel(tau, -lag, bath, options)

    def f(w):
        return 4.0 * _two_sin2_half(w * tau) / w**2 * np.sin(lag * w * tau)

    return float(_sum_or_integrate(bath, f, (lag + 1) * tau, options))


def gamma_cross_kernel(tau, lag, bath: BathSpec, options=DEFAULT_QUADRATURE) -> float:
    """Symmetrized displacement covariance; equals gamma_kernel at lag 0."""
    lag = abs(int(lag))
    if lag == 0:
        return gamma_kernel(tau, bath, options)
    tau = _check_time(tau)
    if tau == 0:
        return 0.0

    def f(w):
        return 4.0 * _two_sin2_half(w * tau) / w**2 * np.cos(lag * w * tau) * bath.thermal_factor(w)

    return float(_sum_or_integrate(bath, f, (lag + 1) * tau, options))


def moments(bath: BathSpec, options=DEFAULT_QUADRATURE):
    """(y, z): the zeroth and second thermal moments of the spectral density."""

    def f(w):
        c = bath.thermal_factor(w)
        return np.stack([c, w**2 * c], axis=-1)

    y, z = _sum_or_integrate(bath, f, 0.0, options)
    return float(y), float(z)


def bath_correlation(t, bath: BathSpec, options=DEFAULT_QUADRATURE):
    """C(t) = <B(t) B(0)> = int J(w) [coth(beta w/2) cos(w t) - i sin(w t)] dw.

    ``t`` may be a scalar or a 1-d array of non-negative times.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise DomainError("correlation times must be finite and non-negative")
    t_max = float(t_arr.max()) if t_arr.size else 0.0
    out = np.empty(t_arr.shape, dtype=complex)
    if bath.is_discrete:
        g2, w = bath.mode_arrays()
        vals = g2 @ _corr_block(w, t_arr, bath)
    else:
        # chunk times so node x time blocks stay small
        vals = np.empty(2 * t_arr.size)
        chunk = 256
        for start in range(0, t_arr.size, chunk):
            sl = t_arr[start:start + chunk]
            part = integrate_spectrum(
                lambda w, sl=sl: _corr_block(w, sl, bath), bath, t_max, options
            )
            n = sl.size
            vals[start:start + n] = part[:n]
            vals[t_arr.size + start:t_arr.size + start + n] = part[n:]
    out.real = vals[: t_arr.size]
    out.imag = vals[t_arr.size:]
    if np.ndim(t) == 0:
        return complex(out[0])
    return out


def correlation_on_grid(dt, n_points, bath: BathSpec, options=DEFAULT_QUADRATURE, block=64):
    """C(j dt) for j = 0 .. n_points-1.

    On a uniform grid e^{-i w j dt} factors into a coarse phase times a fine
    one, so every quadrature level is a single matrix product.
    """
    if not dt > 0 or n_points < 1:
        raise DomainError("need dt > 0 and at least one point")
    n_blocks = -(-n_points // block)
    coarse = dt * block * np.arange(n_blocks)
    fine = dt * np.arange(block)

    def phases(nodes, g):
        thermal = bath.thermal_factor(nodes)
        a = g * np.exp(-1j * np.outer(coarse, nodes))  # (blocks, nodes)
        b = np.exp(-1j * np.outer(nodes, fine))  # (nodes, block)
        # C = J [coth cos - i sin] = J [(coth - 1)/2 e^{+iwt} + (coth + 1)/2 e^{-iwt}]
        minus = (a * (0.5 * (thermal + 1.0))) @ b
        plus = (a.conj() * (0.5 * (thermal - 1.0))) @ b.conj()
        return (minus + plus).ravel()[:n_points]

    if bath.is_discrete:
        g2, w = bath.mode_arrays()
        return phases(w, g2)
    t_max = dt * (n_points - 1)

    def apply(nodes, wj):
        return phases(nodes, wj)

    return _converge(bath, t_max, options, apply)


def _corr_block(w, times, bath):
    phase = w[:, None] * times[None, :]
    c = bath.thermal_factor(w)[:, None]
    return np.concatenate([c * np.cos(phase), -np.sin(phase)], axis=1)


# ---------------------------------------------------------------------------


@dataclass
class KernelSet:
    """Memoized kernel evaluations for one bath.

    Values are pure functions of (tau, lag), so the cache only ever grows
    with identical answers and may be shared between threads.
    ``include_delta=False`` forces Delta to zero, which isolates the effect
    of the indirect interaction in the collective rate.
    """

    bath: BathSpec
    options: QuadratureOptions = DEFAULT_QUADRATURE
    include_delta: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _memo(self, key, fn):
        try:
            return self._cache[key]
        except KeyError:
            value = self._cache[key] = fn()
            return value

    def gamma(self, tau):
        tau = float(tau)
        return self._memo(("g", tau), lambda: gamma_kernel(tau, self.bath, self.options))

    def delta(self, tau):
        tau = float(tau)
        if not self.include_delta:
            _check_time(tau)
            return 0.0
        return self._memo(("d", tau), lambda: delta_kernel(tau, self.bath, self.options))

    def mu(self, tau, lag):
        tau, lag = float(tau), int(lag)
        if lag < 0:
            return -self.mu(tau, -lag)
        return self._memo(("mu", tau, lag), lambda: mu_kernel(tau, lag, self.bath, self.options))

    def gamma_cross(self, tau, lag):
        tau, lag = float(tau), abs(int(lag))
        if lag == 0:
            return self.gamma(tau)
        return self._memo(
            ("gc", tau, lag), lambda: gamma_cross_kernel(tau, lag, self.bath, self.options)
        )

    @property
    def moments(self):
        return self._memo(("moments",), lambda: moments(self.bath, self.options))

    @property
    def moment_y(self):
        return self.moments[0]

    @property
    def moment_z(self):
        return self.moments[1]

    def correlation(self, t):
        return bath_correlation(t, self.bath, self.options)

    def without_delta(self):
        return KernelSet(self.bath, self.options, include_delta=False)


def as_kernels(kernels) -> KernelSet:
    """Accept either a KernelSet or a bare BathSpec."""
    if isinstance(kernels, KernelSet):
        return kernels
    if isinstance(kernels, BathSpec):
        return KernelSet(kernels)
    raise TypeError(f"expected KernelSet or BathSpec, got {type(kernels).__name__}")
