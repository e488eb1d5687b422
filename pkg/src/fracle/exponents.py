"""Admissibility calculators for the exponent pair (p, q).

The dimension n here is an analysis parameter, independent of any grid:
region figures typically use n = 5 while 1D solves use n = 1.

Conditions (named as in the user-facing validation messages):

* (pq0):  1 - 2s/n < 1/p + 1/q < 1
* (pq1):  vacuous when n <= 4s, otherwise 1/p > (n-4s)/(2n) and likewise for q
* (condpq): a theta in (0, 2) with p < 2n/(n - 2 s theta) and
  q < 2n/(n - 2 s (2 - theta)), where a bound with nonpositive
  denominator is dropped (the critical exponent is infinite there)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExponentParams",
    "ThetaWindow",
    "RegionSample",
    "critical_exponent",
    "check_pq0",
    "check_pq1",
    "theta_window",
    "corollary_region",
    "sample_region",
]


@dataclass(frozen=True)
class ExponentParams:
    n: int
    s: float
    p: float
    q: float

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not (self.p > 1.0 and self.q > 1.0):
            raise ValueError(f"p, q must exceed 1, got p={self.p}, q={self.q}")

    def swapped(self) -> "ExponentParams":
        return ExponentParams(self.n, self.s, self.q, self.p)


@dataclass(frozen=True)
class ThetaWindow:
    """Open interval of admissible theta; empty when (pq0) and (pq1) fail."""

    lo: float
    hi: float
    empty: bool

    def midpoint(self) -> float:
        if self.empty:
            raise ValueError("theta window is empty")
        return 0.5 * (self.lo + self.hi)

    def contains(self, theta: float) -> bool:
        return (not self.empty) and self.lo < theta < self.hi


def critical_exponent(n: int, t: float) -> float:
    """Sobolev embedding threshold 2n/(n - 2t); math.inf when n <= 2t."""
    if t <= 0:
        raise ValueError(f"order t must be positive, got {t}")
    if n <= 2 * t:
        return math.inf
    return 2.0 * n / (n - 2.0 * t)


def check_pq0(params: ExponentParams) -> bool:
    total = 1.0 / params.p + 1.0 / params.q
    return 1.0 - 2.0 * params.s / params.n < total < 1.0


def check_pq1(params: ExponentParams) -> bool:
    if params.n <= 4.0 * params.s:
        return True
    bound = (params.n - 4.0 * params.s) / (2.0 * params.n)
    return 1.0 / params.p > bound and 1.0 / params.q > bound


def theta_window(params: ExponentParams) -> ThetaWindow:
    """Window of theta values satisfying (condpq).

    The bounds come from inverting the two critical-exponent inequalities;
    the window is reported empty unless the full admissibility (pq0) and
    (pq1) holds, which matches the equivalence the window realizes.
    """
    half = params.n / (2.0 * params.s)
    lo = max(0.0, half * (1.0 - 2.0 / params.p))
    hi = min(2.0, 2.0 - half * (1.0 - 2.0 / params.q))
    admissible = check_pq0(params) and check_pq1(params)
    return ThetaWindow(lo=lo, hi=hi, empty=not (admissible and lo < hi))


def corollary_region(params: ExponentParams) -> bool:
    """Exponent region in which solutions gain integrability and regularity.

    Requires (pq0), (pq1) and the side-dependent inequality
    (p+q)/(p(q-1)) >= 2(n-2s)/(n+2s) when p <= q (q-role swapped otherwise).
    """
    if not (check_pq0(params) and check_pq1(params)):
        return False
    rhs = 2.0 * (params.n - 2.0 * params.s) / (params.n + 2.0 * params.s)
    p, q = params.p, params.q
    ok = False
    if p <= q:
        ok = ok or (p + q) / (p * (q - 1.0)) >= rhs
    if p >= q:
        ok = ok or (p + q) / (q * (p - 1.0)) >= rhs
    return ok


@dataclass(frozen=True, eq=False)
class RegionSample:
    """Cell-centered membership grid over a (p, q) rectangle."""

    n: int
    s: float
    p_values: np.ndarray
    q_values: np.ndarray
    pq0: np.ndarray
    pq1: np.ndarray
    corollary: np.ndarray
    window_nonempty: np.ndarray

    def rows(self):
        """Iterate cells in fixed (p-major) order for delimited output."""
        for i, p in enumerate(self.p_values):
            for j, q in enumerate(self.q_values):
                yield (
                    float(p),
                    float(q),
                    bool(self.pq0[i, j]),
                    bool(self.pq1[i, j]),
                    bool(self.corollary[i, j]),
                    bool(self.window_nonempty[i, j]),
                )


def sample_region(
    n: int,
    s: float,
    p_range: tuple[float, float],
    q_range: tuple[float, float],
    resolution: int,
    max_workers: int = 1,
) -> RegionSample:
    """Evaluate the admissibility flags on a cell-centered lattice.

    Output is independent of ``max_workers``; the work is only chunked
    over rows of cells.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    for name, (lo, hi) in (("p", p_range), ("q", q_range)):
        if not (1.0 <= lo < hi):
            raise ValueError(f"{name}-range must satisfy 1 <= lo < hi, got ({lo}, {hi})")
    dp = (p_range[1] - p_range[0]) / resolution
    dq = (q_range[1] - q_range[0]) / resolution
    p_values = p_range[0] + dp * (np.arange(resolution) + 0.5)
    q_values = q_range[0] + dq * (np.arange(resolution) + 0.5)

    flags = {
        name: np.zeros((resolution, resolution), dtype=bool)
        for name in ("pq0", "pq1", "corollary", "window_nonempty")
    }

    def fill_row(i: int) -> None:
        p = float(p_values[i])
        for j, q in enumerate(q_values):
            params = ExponentParams(n, s, p, float(q))
            flags["pq0"][i, j] = check_pq0(params)
            flags["pq1"][i, j] = check_pq1(params)
            flags["corollary"][i, j] = corollary_region(params)
            flags["window_nonempty"][i, j] = not theta_window(params).empty

    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(fill_row, range(resolution)))
    else:
        for i in range(resolution):
            fill_row(i)

    return RegionSample(
        n=n,
        s=s,
        p_values=p_values,
        q_values=q_values,
        pq0=flags["pq0"],
        pq1=flags["pq1"],
        corollary=flags["corollary"],
        window_nonempty=flags["window_nonempty"],
    )
