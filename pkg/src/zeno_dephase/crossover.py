"""Zeno / anti-Zeno crossovers: local extrema of a rate curve Gamma(tau).

The curve is sampled on a grid, extrema are bracketed by sign changes of
the discrete slope and then polished by golden-section search. No
derivative of the curve is ever needed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ZenoError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
PLATEAU_TOL = 1e-13


@dataclass(frozen=True)
class Extremum:
    tau: float
    rate: float
    kind: str  # "max" or "min"


@dataclass
class CrossoverReport:
    extrema: list
    grid: np.ndarray
    rates: np.ndarray
    refined: bool = True

    @property
    def maxima(self):
        return [e for e in self.extrema if e.kind == "max"]

    @property
    def minima(self):
        return [e for e in self.extrema if e.kind == "min"]


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int
    kind: str = "geometric"  # or "linear"

    def __post_init__(self):
        if self.kind not in ("geometric", "linear"):
            raise DomainError(f"grid kind must be 'geometric' or 'linear', got {self.kind!r}")
        if self.points < 1:
            raise DomainError("a grid needs at least one point")
        if self.kind == "geometric" and not (0 < self.start <= self.stop):
            raise DomainError("a geometric grid needs 0 < start <= stop")

    def values(self):
        if self.points == 1:
            return np.array([float(self.start)])
        if self.kind == "geometric":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    @classmethod
    def per_decade(cls, start, stop, points_per_decade):
        decades = math.log10(stop / start)
        return cls(start, stop, max(2, int(math.ceil(decades * points_per_decade)) + 1))


class CurveEvaluationError(ZenoError):
    def __init__(self, tau, cause):
        super().__init__(f"rate curve failed at tau={tau!r}: {cause}")
        self.tau = tau
        self.exit_code = getattr(cause, "exit_code", 2)


def default_jobs():
    try:
        return max(1, int(os.environ.get("ZENO_DEPHASE_JOBS", "1")))
    except ValueError:
        return 1


def _evaluate(rate_curve, taus, jobs=None):
    jobs = default_jobs() if jobs is None else jobs

    def one(t):
        try:
            return float(rate_curve(float(t)))
        except ZenoError as exc:
            raise CurveEvaluationError(float(t), exc) from exc

    if jobs > 1 and len(taus) > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return np.array(list(pool.map(one, taus)))
    return np.array([one(t) for t in taus])


def sweep(rate_curve, grid, jobs=None):
    """Tabulate ``rate_curve`` on ``grid``; failures are recorded per row.

    Returns a list of dicts with keys ``tau``, ``rate`` (nan on failure) and
    ``error`` (None or the message). Rows are ordered by tau.
    """
    taus = grid.values() if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    jobs = default_jobs() if jobs is None else jobs

    def row(t):
        try:
            return {"tau": float(t), "rate": float(rate_curve(float(t))), "error": None}
        except Exception as exc:  # noqa: BLE001 - a sweep records every failure
            return {"tau": float(t), "rate": math.nan, "error": f"{type(exc).__name__}: {exc}"}

    if jobs > 1 and len(taus) > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(row, taus))
    return [row(t) for t in taus]


def golden_section(f, a, b, maximize=True, rel_tol=1e-4, max_iter=200):
    """Golden-section search for an extremum of ``f`` inside [a, b].

    Returns (x, f(x), converged). The answer never leaves [a, b].
    """
    sign = -1.0 if maximize else 1.0

    def g(x):
        return sign * f(x)

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    converged = False
    for _ in range(max_iter):
        if (b - a) <= rel_tol * max(abs(a), abs(b)):
            converged = True
            break
        if gc <= gd:  # ties keep the left part
            b, d, gd = d, c, gc
            c = b - INV_PHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INV_PHI * (b - a)
            gd = g(d)
    x, gx = (c, gc) if gc <= gd else (d, gd)
    return x, sign * gx, converged


def _collapse_plateaus(taus, rates):
    keep = [0]
    for i in range(1, len(rates)):
        if abs(rates[i] - rates[keep[-1]]) > PLATEAU_TOL:
            keep.append(i)
    return np.array(keep)


def discrete_extrema(taus, rates):
    """Indices and kinds of interior local extrema of a sampled curve."""
    idx = _collapse_plateaus(taus, rates)
    r = rates[idx]
    found = []
    for j in range(1, len(idx) - 1):
        if r[j] > r[j - 1] and r[j] > r[j + 1]:
            found.append((idx[j - 1], idx[j], idx[j + 1], "max"))
        elif r[j] < r[j - 1] and r[j] < r[j + 1]:
            found.append((idx[j - 1], idx[j], idx[j + 1], "min"))
    return found


def find_crossovers(rate_curve, tau_min, tau_max, samples=256, grid="geometric",
                    rel_tol=1e-4, refine=True, jobs=None) -> CrossoverReport:
    """Locate every interior local extremum of ``rate_curve`` on [tau_min, tau_max]."""
    if not 0 < tau_min < tau_max:
        raise DomainError("need 0 < tau_min < tau_max")
    if samples < 16:
        raise DomainError("need at least 16 samples")
    taus = GridSpec(tau_min, tau_max, samples, grid).values()
    rates = _evaluate(rate_curve, taus, jobs)
    extrema = []
    all_converged = True
    for lo, mid, hi, kind in discrete_extrema(taus, rates):
        if refine:
            x, fx, ok = golden_section(rate_curve, taus[lo], taus[hi], kind == "max", rel_tol)
            # refinement may only improve on the sampled point
            better = fx > rates[mid] if kind == "max" else fx < rates[mid]
            if not better:
                x, fx = taus[mid], rates[mid]
            all_converged &= ok
        else:
            x, fx = taus[mid], rates[mid]
        extrema.append(Extremum(float(x), float(fx), kind))
    return CrossoverReport(extrema, taus, rates, refined=refine and all_converged)


def argmax_rate(rate_curve, tau_min, tau_max, points_per_decade=512, rel_tol=1e-6, jobs=None):
    """Global argmax on a geometric grid, refined by golden section.

    Ties on the grid resolve to the smaller tau. Returns (tau, rate).
    """
    grid = GridSpec.per_decade(tau_min, tau_max, points_per_decade)
    taus = grid.values()
    rates = _evaluate(rate_curve, taus, jobs)
    i = int(np.argmax(rates))  # first occurrence
    lo, hi = taus[max(i - 1, 0)], taus[min(i + 1, len(taus) - 1)]
    if lo == hi:
        return float(taus[i]), float(rates[i])
    x, fx, _ = golden_section(rate_curve, lo, hi, True, rel_tol)
    if fx < rates[i]:
        return float(taus[i]), float(rates[i])
    return float(x), float(fx)
