"""Survival under repeated measurement when the bath remembers every projection.

The system is re-prepared in |psi> after each successful measurement but
the environment carries its measurement-conditioned state forward. The
survival after N intervals is a sum over 2N spin labels (l_1..l_N and
l'_1..l'_N), each term a product of

* the indirect-interaction phase  exp(-i Delta sum_j (l_j^2 - l'_j^2)),
* the populations                 prod_j w_{l_j} w_{l'_j},
* diagonal damping                prod_j exp(-(l_j - l'_j)^2 gamma),
* pair damping                    prod_{j>k} exp(-2 (l_k - l'_k)(l_j - l'_j) gamma_cross(j - k)),
* pair phase                      prod_{j>k} exp(2i mu(j - k) (l_k l_j + l'_k l_j - l_k l'_j - l'_k l'_j)).

Each (l_j, l'_j) pair is folded into one composite index ``a`` so the sum
becomes a fully connected pairwise model over N composite indices.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bath import as_kernels
from .collective import CoherentWeights
from .errors import ConsistencyError, DomainError, ResourceError

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
INNER_BLOCK = 2**20  # largest broadcast block held in memory


@dataclass(frozen=True)
class KernelSlice:
    """Kernel values needed for one (tau, N) evaluation."""

    tau: float
    gamma: float
    delta: float
    gamma_cross: tuple  # index d -> gamma_cross(tau, d), d = 0..N-1
    mu: tuple  # index d -> mu(tau, d)

    @classmethod
    def build(cls, tau, N, kernels):
        k = as_kernels(kernels)
        gc = tuple(k.gamma_cross(tau, d) for d in range(N))
        mu = tuple(k.mu(tau, d) for d in range(N))
        return cls(float(tau), k.gamma(tau), k.delta(tau), gc, mu)


@dataclass(frozen=True)
class ProtocolResult:
    survival: float
    rate: float
    term_count: int
    elapsed: float
    imag_residue: float = 0.0
    N: int = 1
    tau: float = 0.0


class _Composite:
    """Composite label a = (l, l') restricted to labels with non-zero weight."""

    def __init__(self, w: CoherentWeights, ks: KernelSlice):
        keep = w.weights > 0
        labels = w.m[keep]
        weights = w.weights[keep]
        li, lpi = np.meshgrid(np.arange(len(labels)), np.arange(len(labels)), indexing="ij")
        self.i = li.ravel()
        self.ip = lpi.ravel()
        self.l = labels[self.i]
        self.lp = labels[self.ip]
        self.c = self.l - self.lp
        self.size = len(self.l)
        self.single = (
            np.log(weights[self.i] * weights[self.ip])
            - 1j * ks.delta * (self.l**2 - self.lp**2)
            - ks.gamma * self.c**2
        )
        self._pair = {}
        self._ks = ks

    def pair(self, d):
        """Log pair factor for indices d apart: matrix [a_k, a_j] with j = k + d."""
        if d not in self._pair:
            l, lp, c = self.l, self.lp, self.c
            lk, lj = l[:, None], l[None, :]
            lpk, lpj = lp[:, None], lp[None, :]
            self._pair[d] = (
                -2.0 * c[:, None] * c[None, :] * self._ks.gamma_cross[d]
                + 2j * self._ks.mu[d] * (lk * lj + lpk * lj - lk * lpj - lpk * lpj)
            )
        return self._pair[d]

    def conjugate_index(self):
        """Index of (l', l) for every a = (l, l')."""
        n = int(round(math.sqrt(self.size)))
        return self.ip * n + self.i


def term_count(J, N):
    return int(round(2 * J + 1)) ** (2 * N)


def _inner_log_tensor(comp, inner):
    """Log of the factors involving only the inner positions, shape (D,)*len(inner)."""
    D = comp.size
    n_in = len(inner)
    t = np.zeros((D,) * n_in, dtype=complex)
    for axis in range(n_in):
        shape = [1] * n_in
        shape[axis] = D
        t = t + comp.single.reshape(shape)
    for x, y in itertools.combinations(range(n_in), 2):
        shape = [1] * n_in
        shape[x] = D
        shape[y] = D
        t = t + comp.pair(inner[y] - inner[x]).reshape(shape)
    return t


def _fold(comp, N, outer_tuples, n_outer, inner_log):
    """Sum the terms whose leading ``n_outer`` composite indices are in ``outer_tuples``."""
    D = comp.size
    inner = list(range(n_outer, N))
    n_in = len(inner)
    total = 0j
    report = max(1, len(outer_tuples) // 10)
    for count, tup in enumerate(outer_tuples, 1):
        if len(outer_tuples) >= 10 and count % report == 0:
            log.debug("folded %d of %d leading index tuples", count, len(outer_tuples))
        log_out = sum(comp.single[a] for a in tup)
        for x, y in itertools.combinations(range(n_outer), 2):
            log_out += comp.pair(y - x)[tup[x], tup[y]]
        block = inner_log + log_out
        for k, a_k in enumerate(tup):
            for axis, j in enumerate(inner):
                shape = [1] * n_in
                shape[axis] = D
                block = block + comp.pair(j - k)[a_k].reshape(shape)
        total += np.exp(block).sum()
    return total


def survival_with_backaction(tau, N, w: CoherentWeights, kernels, budget=DEFAULT_BUDGET,
                             symmetric=False, jobs=1) -> ProtocolResult:
    """Exact survival after N measurements with the bath state carried forward.

    ``symmetric=True`` uses the conjugation symmetry l <-> l' to fold only
    half of the leading indices; the imaginary residue is then not
    observable and is reported as 0.
    """
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    count = term_count(w.J, N)
    if count > budget:
        raise ResourceError(f"{count} terms exceed the budget of {budget}", size=count)
    start = time.perf_counter()
    ks = kernels if isinstance(kernels, KernelSlice) else KernelSlice.build(tau, N, kernels)
    comp = _Composite(w, ks)
    D = comp.size

    n_outer = 1
    while D ** (N - n_outer) > INNER_BLOCK:
        n_outer += 1
    inner_log = _inner_log_tensor(comp, list(range(n_outer, N)))

    leading = range(D)
    scale = {}
    if symmetric:
        conj = comp.conjugate_index()
        leading = [a for a in range(D) if comp.i[a] <= comp.ip[a]]
        scale = {a: (1.0 if conj[a] == a else 2.0) for a in leading}
    tuples = [
        (a,) + rest
        for a in leading
        for rest in itertools.product(range(D), repeat=n_outer - 1)
    ]

    def work(chunk):
        if not symmetric:
            return _fold(comp, N, chunk, n_outer, inner_log)
        return sum(scale[t[0]] * _fold(comp, N, [t], n_outer, inner_log).real for t in chunk)

    if jobs > 1 and len(tuples) > 1:
        chunks = [tuples[i::jobs] for i in range(jobs)]
        with ThreadPoolExecutor(jobs) as pool:
            total = sum(pool.map(work, chunks))
    else:
        total = work(tuples)

    total = complex(total)
    if abs(total.imag) > 1e-6:
        raise ConsistencyError(f"survival has imaginary part {total.imag:.3e}")
    survival = total.real
    if not survival > 0:
        raise ConsistencyError(f"survival {survival:.3e} is not positive")
    rate = -math.log(survival) / (N * tau)
    return ProtocolResult(survival, rate, count, time.perf_counter() - start,
                          abs(total.imag), N, float(tau))


def gamma_rate_n(tau, N, w: CoherentWeights, kernels, **kwargs) -> float:
    """N-dependent inverse lifetime -ln S(N tau) / (N tau)."""
    return survival_with_backaction(tau, N, w, kernels, **kwargs).rate


# hand-transcribed N = 2 and N = 3 sums, kept as a cross-check on the general fold


def survival_n2(tau, w: CoherentWeights, kernels) -> complex:
    ks = KernelSlice.build(tau, 2, kernels)
    m, p = w.m, w.weights
    ax = np.ix_(range(len(m)), range(len(m)), range(len(m)), range(len(m)))
    l1, l2, l1p, l2p = (m[i] for i in ax)
    w1, w2, w1p, w2p = (p[i] for i in ax)
    g, dl, g21, mu21 = ks.gamma, ks.delta, ks.gamma_cross[1], ks.mu[1]
    terms = (
        np.exp(-1j * dl * (l1**2 + l2**2 - l1p**2 - l2p**2))
        * w1 * w2 * w1p * w2p
        * np.exp(-((l1 - l1p) ** 2) * g) * np.exp(-((l2 - l2p) ** 2) * g)
        * np.exp(-2 * (l1 - l1p) * (l2 - l2p) * g21)
        * np.exp(2j * mu21 * (l1 * l2 + l1p * l2 - l1 * l2p - l1p * l2p))
    )
    return complex(terms.sum())


def survival_n3(tau, w: CoherentWeights, kernels) -> complex:
    ks = KernelSlice.build(tau, 3, kernels)
    m, p = w.m, w.weights
    r = range(len(m))
    ax = np.ix_(r, r, r, r, r, r)
    l1, l2, l3, l1p, l2p, l3p = (m[i] for i in ax)
    w1, w2, w3, w1p, w2p, w3p = (p[i] for i in ax)
    g, dl = ks.gamma, ks.delta
    g21, g31, g32 = ks.gamma_cross[1], ks.gamma_cross[2], ks.gamma_cross[1]
    mu21, mu31, mu32 = ks.mu[1], ks.mu[2], ks.mu[1]
    terms = (
        np.exp(-1j * dl * (l1**2 + l2**2 + l3**2 - l1p**2 - l2p**2 - l3p**2))
        * w1 * w2 * w3 * w1p * w2p * w3p
        * np.exp(-((l1 - l1p) ** 2) * g) * np.exp(-((l2 - l2p) ** 2) * g) * np.exp(-((l3 - l3p) ** 2) * g)
        * np.exp(-2 * (l1 - l1p) * (l2 - l2p) * g21)
        * np.exp(-2 * (l1 - l1p) * (l3 - l3p) * g31)
        * np.exp(-2 * (l2 - l2p) * (l3 - l3p) * g32)
        * np.exp(2j * mu21 * (l1 * l2 + l1p * l2 - l1 * l2p - l1p * l2p))
        * np.exp(2j * mu31 * (l1 * l3 + l1p * l3 - l1 * l3p - l1p * l3p))
        * np.exp(2j * mu32 * (l2 * l3 + l2p * l3 - l2 * l3p - l2p * l3p))
    )
    return complex(terms.sum())
