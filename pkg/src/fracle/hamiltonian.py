"""Hamiltonian evaluators and a sampling auditor for their growth structure.

A Hamiltonian is given by vectorized callables H(x, u, v), H_u(x, u, v),
H_v(x, u, v). The stored exponents (p, q) are the growth exponents of the
structure conditions

* (H1)  H_u u / p + H_v v / q >= H > 0 whenever |(u, v)| >= r,
* (H2)  H <= c1 (|u|^p + |v|^q) whenever |(u, v)| <= r,
* (H3)  |H_u| <= c1 (|u|^{p-1} + |v|^{(p-1)q/p} + 1) and symmetrically
        |H_v| <= c1 (|u|^{(q-1)p/q} + |v|^{q-1} + 1).

The auditor samples; it can refute a condition but never certify it, so
its verdict reads "no violation found" rather than "verified".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "HamiltonianSpec",
    "GrowthAudit",
    "prototype_power",
    "prototype_lane_emden",
    "scale_hamiltonian",
    "hamiltonian_from_name",
    "audit_growth",
]

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """C^1 Hamiltonian with its growth exponents and constants."""

    h: Evaluator
    h_u: Evaluator
    h_v: Evaluator
    p: float
    q: float
    c1: float
    r: float
    name: str = "custom"

    def __post_init__(self):
        if not (self.p > 1.0 and self.q > 1.0):
            raise ValueError("growth exponents p, q must exceed 1")
        if self.c1 <= 0 or self.r <= 0:
            raise ValueError("constants c1 and r must be positive")


def _signed_power(x: np.ndarray, e: float) -> np.ndarray:
    # sign(x) |x|^e with the correct limit 0 at x = 0 for e > 0
    return np.sign(x) * np.abs(x) ** e


def prototype_power(p: float, q: float) -> HamiltonianSpec:
    """H = |u|^p + |v|^q with gradient (p |u|^{p-2} u, q |v|^{q-2} v)."""
    if p <= 1.0 or q <= 1.0:
        raise ValueError(f"prototype exponents must exceed 1, got p={p}, q={q}")
    return HamiltonianSpec(
        h=lambda x, u, v: np.abs(u) ** p + np.abs(v) ** q,
        h_u=lambda x, u, v: p * _signed_power(u, p - 1.0),
        h_v=lambda x, u, v: q * _signed_power(v, q - 1.0),
        p=p,
        q=q,
        c1=max(p, q),
        r=1.0,
        name=f"power({p:g},{q:g})",
    )


def prototype_lane_emden(p: float, q: float) -> HamiltonianSpec:
    """H = |v|^p / p + |u|^q / q, so the system right-hand sides are
    H_v = |v|^{p-2} v and H_u = |u|^{q-2} u (v^{p-1} and u^{q-1} on positives).

    Note the growth roles: this H grows like |u|^q in u and |v|^p in v, so
    the stored structure exponents are (q, p), swapped from the arguments.
    """
    if p <= 1.0 or q <= 1.0:
        raise ValueError(f"prototype exponents must exceed 1, got p={p}, q={q}")
    return HamiltonianSpec(
        h=lambda x, u, v: np.abs(v) ** p / p + np.abs(u) ** q / q,
        h_u=lambda x, u, v: _signed_power(u, q - 1.0),
        h_v=lambda x, u, v: _signed_power(v, p - 1.0),
        p=q,
        q=p,
        c1=1.0,
        r=1.0,
        name=f"lane_emden({p:g},{q:g})",
    )


def scale_hamiltonian(spec: HamiltonianSpec, c: float) -> HamiltonianSpec:
    """Multiply H (and its gradient) by a positive constant."""
    if c <= 0:
        raise ValueError("scaling constant must be positive")
    return HamiltonianSpec(
        h=lambda x, u, v: c * spec.h(x, u, v),
        h_u=lambda x, u, v: c * spec.h_u(x, u, v),
        h_v=lambda x, u, v: c * spec.h_v(x, u, v),
        p=spec.p,
        q=spec.q,
        c1=c * spec.c1 if c > 1 else spec.c1,
        r=spec.r,
        name=f"{c:g}*{spec.name}",
    )


_NAME_RE = re.compile(r"^\s*(power|lane_emden)\s*\(\s*([0-9.eE+-]+)\s*,\s*([0-9.eE+-]+)\s*\)\s*$")


def hamiltonian_from_name(name: str) -> HamiltonianSpec:
    """Parse "power(p,q)" or "lane_emden(p,q)"."""
    m = _NAME_RE.match(name)
    if not m:
        raise ValueError(
            f"unknown hamiltonian {name!r}; expected power(p,q) or lane_emden(p,q)"
        )
    kind, p, q = m.group(1), float(m.group(2)), float(m.group(3))
    return prototype_power(p, q) if kind == "power" else prototype_lane_emden(p, q)


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    checked: int
    violations: int
    worst_margin: float
    worst_point: tuple[float, float] | None
    no_violation_found: bool

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "checked": self.checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "worst_point": list(self.worst_point) if self.worst_point else None,
            "no_violation_found": self.no_violation_found,
        }


@dataclass(frozen=True)
class GrowthAudit:
    conditions: tuple[ConditionReport, ...]
    c1_gradient_consistency: ConditionReport
    young_bound: ConditionReport
    seed: int
    samples: int
    box: tuple[float, float]

    @property
    def all_clear(self) -> bool:
        reports = (*self.conditions, self.c1_gradient_consistency, self.young_bound)
        return all(r.no_violation_found for r in reports)

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "box": list(self.box),
            "conditions": [c.to_dict() for c in self.conditions],
            "c1_gradient_consistency": self.c1_gradient_consistency.to_dict(),
            "young_bound": self.young_bound.to_dict(),
            "verdict": "no violation found" if self.all_clear else "violations found",
        }


def _condition_report(name, margins, us, vs, checked, scale=None) -> ConditionReport:
    """Count violations below a roundoff-relative slack: prototype identities
    hold with equality, so raw margins sit at the rounding level."""
    if margins.size == 0:
        return ConditionReport(name, 0, 0, float("inf"), None, True)
    if scale is None:
        scale = np.ones_like(margins)
    worst = int(np.argmin(margins / np.maximum(scale, 1e-300)))
    violations = int(np.count_nonzero(margins < -1e-9 * scale))
    return ConditionReport(
        condition=name,
        checked=checked,
        violations=violations,
        worst_margin=float(margins[worst]),
        worst_point=(float(us[worst]), float(vs[worst])),
        no_violation_found=violations == 0,
    )


def audit_growth(
    spec: HamiltonianSpec,
    box: tuple[float, float] = (-10.0, 10.0),
    samples: int = 10_000,
    seed: int = 0,
    x_value: float = 0.0,
) -> GrowthAudit:
    """Sample (u, v) uniformly in box^2 and check (H1)-(H3), the gradient
    consistency against central differences of H, and the derived Young-type
    bound |H_u|, |H_v| <= 3 c1 (|u|^p + |v|^q + 1)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lo, hi = float(box[0]), float(box[1])
    if not lo < hi:
        raise ValueError("sampling box must be nondegenerate")
    rng = np.random.default_rng(seed)
    us = rng.uniform(lo, hi, samples)
    vs = rng.uniform(lo, hi, samples)
    xs = np.full(samples, x_value)
    p, q, c1, r = spec.p, spec.q, spec.c1, spec.r

    hvals = np.asarray(spec.h(xs, us, vs), dtype=float)
    huv = np.asarray(spec.h_u(xs, us, vs), dtype=float)
    hvv = np.asarray(spec.h_v(xs, us, vs), dtype=float)
    radius = np.hypot(us, vs)

    outer = radius >= r
    h1_combo = huv[outer] * us[outer] / p + hvv[outer] * vs[outer] / q
    h1_margin = np.minimum(h1_combo - hvals[outer], hvals[outer])
    h1_scale = np.abs(h1_combo) + np.abs(hvals[outer]) + 1.0
    h1 = _condition_report("H1", h1_margin, us[outer], vs[outer], int(outer.sum()), h1_scale)

    inner = radius <= r
    h2_bound = c1 * (np.abs(us[inner]) ** p + np.abs(vs[inner]) ** q)
    h2_margin = h2_bound - hvals[inner]
    h2 = _condition_report(
        "H2", h2_margin, us[inner], vs[inner], int(inner.sum()), h2_bound + np.abs(hvals[inner]) + 1.0
    )

    bound_u = c1 * (np.abs(us) ** (p - 1) + np.abs(vs) ** ((p - 1) * q / p) + 1.0)
    bound_v = c1 * (np.abs(us) ** ((q - 1) * p / q) + np.abs(vs) ** (q - 1) + 1.0)
    h3_margin = np.minimum(bound_u - np.abs(huv), bound_v - np.abs(hvv))
    h3 = _condition_report(
        "H3", h3_margin, us, vs, samples, bound_u + bound_v + np.abs(huv) + np.abs(hvv)
    )

    # C^1 consistency: central differences of H against the provided gradient
    eps_u = 1e-6 * np.maximum(1.0, np.abs(us))
    eps_v = 1e-6 * np.maximum(1.0, np.abs(vs))
    fd_u = (spec.h(xs, us + eps_u, vs) - spec.h(xs, us - eps_u, vs)) / (2 * eps_u)
    fd_v = (spec.h(xs, us, vs + eps_v) - spec.h(xs, us, vs - eps_v)) / (2 * eps_v)
    scale = np.maximum(1.0, np.abs(huv) + np.abs(hvv))
    rel = np.maximum(np.abs(fd_u - huv), np.abs(fd_v - hvv)) / scale
    grad_margin = 1e-3 - rel
    grad = _condition_report("C1_gradient", grad_margin, us, vs, samples)

    young_c = 3.0 * c1
    young_bound = young_c * (np.abs(us) ** p + np.abs(vs) ** q + 1.0)
    young_margin = np.minimum(young_bound - np.abs(huv), young_bound - np.abs(hvv))
    young = _condition_report(
        "young_bound", young_margin, us, vs, samples, young_bound + np.abs(huv) + np.abs(hvv)
    )

    return GrowthAudit(
        conditions=(h1, h2, h3),
        c1_gradient_consistency=grad,
        young_bound=young,
        seed=seed,
        samples=samples,
        box=(lo, hi),
    )
