"""Critical-point solvers for the discrete coupled system and diagnostics.

Three methods:

newton_coupled
    Damped Newton with backtracking on the coupled algebraic system
    ``K u = M H_v(u, v)``, ``K v = M H_u(u, v)``. Second derivatives of the
    Hamiltonian are approximated by central differences of its gradient,
    so only C^1 data is required.

reduction
    For the two-power prototype only: eliminate v through the first
    equation (a pointwise fractional power of the operator applied to u)
    and run Newton on the remaining scalar equation in u.

indefinite_flow
    Sign-split gradient flow z <- z - damping * (P+ grad J - P- grad J),
    descending on E+ and ascending on E-. At a superlinear critical point
    the radial direction of this map is linearly unstable, so the flow is
    steered by a dichotomy: bisection on the amplitude along the initial
    ray separates the basin that collapses to zero from the one that
    escapes to negative energy, and the flow rides the separatrix toward
    the saddle. A final Newton polish on the gradient system finishes to
    the requested tolerance.

Convergence is always measured by the product-metric gradient norm, and a
converged report carries residuals for every solution notion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scipy.linalg import lu_factor, lu_solve

from .grid import GridFunction
from .spectral import ProductElement, e_norm
from .variational import (
    EnergyFunctional,
    ResidualReport,
    energy,
    residual_report,
    theta_weak_residual,
)

__all__ = [
    "InitSpec",
    "SolverConfig",
    "SolveReport",
    "TraceEntry",
    "PSDiagnostic",
    "solve",
    "solve_newton_coupled",
    "solve_reduction",
    "solve_indefinite_flow",
    "palais_smale_trace",
]

_FD_EPS = 1e-6


def _refined_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # iterative refinement with extended-precision residuals drives the
    # forward error of the Newton step to working precision, so structural
    # symmetries of the iteration survive in floating point
    factor = lu_factor(mat)
    x = lu_solve(factor, rhs)
    mat_l = mat.astype(np.longdouble)
    rhs_l = rhs.astype(np.longdouble)
    for _ in range(2):
        residual = np.asarray(rhs_l - mat_l @ x.astype(np.longdouble), dtype=float)
        x = x + lu_solve(factor, residual)
    return x


@dataclass(frozen=True)
class InitSpec:
    """Initial iterate: the balanced positive mode, a stored solution file,
    or an explicitly scaled eigenmode (1-based index)."""

    kind: str = "positive_mode"
    mode: int = 1
    amplitude: float = 1.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("positive_mode", "scaled_mode", "file"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.kind == "scaled_mode" and self.mode < 1:
            raise ValueError("mode index is 1-based")
        if self.kind == "file" and not self.path:
            raise ValueError("file init requires a path")


@dataclass(frozen=True)
class SolverConfig:
    method: str = "newton_coupled"
    tol: float = 1e-8
    max_iter: int = 100
    damping: float = 1.0
    init: InitSpec = field(default_factory=InitSpec)
    keep_iterates: bool = False

    def __post_init__(self):
        if self.method not in ("newton_coupled", "reduction", "indefinite_flow"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class TraceEntry:
    energy: float
    grad_norm: float
    z_norm: float


@dataclass(frozen=True)
class SolveReport:
    z: ProductElement
    residuals: ResidualReport
    energy: float
    iterations: int
    ps_trace: tuple[TraceEntry, ...]
    converged: bool
    nontrivial: bool
    status: str
    message: str = ""
    iterates: tuple[ProductElement, ...] = ()

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "message": self.message,
            "converged": self.converged,
            "nontrivial": self.nontrivial,
            "energy": self.energy,
            "iterations": self.iterations,
            "residuals": self.residuals.to_dict(),
            "ps_trace": [
                {"energy": t.energy, "grad_norm": t.grad_norm, "z_norm": t.z_norm}
                for t in self.ps_trace
            ],
            "u": [float(x) for x in self.z.u.values],
            "v": [float(x) for x in self.z.v.values],
        }


def solve(F: EnergyFunctional, cfg: SolverConfig) -> SolveReport:
    if cfg.method == "newton_coupled":
        return solve_newton_coupled(F, cfg)
    if cfg.method == "reduction":
        return solve_reduction(F, cfg)
    return solve_indefinite_flow(F, cfg)


# ----------------------------------------------------------------------------
# initial iterates
# ----------------------------------------------------------------------------

def _balanced_amplitude(F: EnergyFunctional) -> float:
    """Amplitude c for which u = v = c phi_1 balances the first mode of the
    system: c lam_1 = mean of the two projected right-hand sides. Root-found
    by bracketed bisection; falls back to 1 when no positive root exists
    (e.g. a vanishing Hamiltonian)."""
    E = F.eigensystem
    lam1 = E.eigenvalues[0]
    phi1 = E.eigenvectors[:, 0]
    w = F.quadrature.weights
    xs = F.coords()

    def imbalance(c: float) -> float:
        u = c * phi1
        hu = np.asarray(F.hamiltonian.h_u(xs, u, u), dtype=float)
        hv = np.asarray(F.hamiltonian.h_v(xs, u, u), dtype=float)
        return c * lam1 - 0.5 * float(np.dot(w, (hu + hv) * phi1))

    lo = None
    hi = None
    c = 1e-3
    for _ in range(60):
        val = imbalance(c)
        if val > 0:
            lo = c
        elif val < 0:
            hi = c
            break
        c *= 2.0
    if lo is None or hi is None:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if imbalance(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * hi:
            break
    return 0.5 * (lo + hi)


def _initial_iterate(F: EnergyFunctional, cfg: SolverConfig) -> ProductElement:
    E = F.eigensystem
    spec = cfg.init
    if spec.kind == "positive_mode":
        c = _balanced_amplitude(F)
        vals = c * E.eigenvectors[:, 0]
        return ProductElement(
            GridFunction(F.grid, vals.copy()), GridFunction(F.grid, vals.copy())
        )
    if spec.kind == "scaled_mode":
        k = spec.mode - 1
        if k >= E.n:
            raise ValueError(f"mode {spec.mode} exceeds the number of modes {E.n}")
        vals = spec.amplitude * E.eigenvectors[:, k]
        return ProductElement(
            GridFunction(F.grid, vals.copy()), GridFunction(F.grid, vals.copy())
        )
    from .io import read_solution_csv

    grid, u, v = read_solution_csv(spec.path)
    if grid is not None and grid != F.grid:
        raise ValueError("solution file grid does not match the functional's grid")
    return ProductElement(GridFunction(F.grid, u), GridFunction(F.grid, v))


# ----------------------------------------------------------------------------
# shared report assembly
# ----------------------------------------------------------------------------

def _finish(
    F: EnergyFunctional,
    cfg: SolverConfig,
    z: ProductElement,
    iterations: int,
    trace: list[TraceEntry],
    status: str,
    message: str = "",
    iterates: list[ProductElement] | None = None,
) -> SolveReport:
    res = residual_report(F, z)
    nontrivial = e_norm(F.eigensystem, F.theta, z) > 100.0 * cfg.tol
    converged = status in ("converged", "converged_trivial")
    if converged and res.theta_weak > cfg.tol:
        converged = False
        status = "stagnation"
        message = message or (
            f"gradient norm {res.theta_weak:.3e} exceeds tol {cfg.tol:.3e}"
        )
    if converged:
        status = "converged" if nontrivial else "converged_trivial"
    return SolveReport(
        z=z,
        residuals=res,
        energy=res.energy_value,
        iterations=iterations,
        ps_trace=tuple(trace),
        converged=converged,
        nontrivial=nontrivial,
        status=status,
        message=message,
        iterates=tuple(iterates or ()),
    )


def _trace_entry(F: EnergyFunctional, z: ProductElement) -> TraceEntry:
    return TraceEntry(
        energy=energy(F, z),
        grad_norm=theta_weak_residual(F, z),
        z_norm=e_norm(F.eigensystem, F.theta, z),
    )


# ----------------------------------------------------------------------------
# coupled Newton
# ----------------------------------------------------------------------------

def _hamiltonian_jacobian_blocks(F: EnergyFunctional, u, v):
    """Central-difference derivatives of (H_u, H_v) with respect to (u, v)."""
    xs = F.coords()
    eu = _FD_EPS * np.maximum(1.0, np.abs(u))
    ev = _FD_EPS * np.maximum(1.0, np.abs(v))
    h_u, h_v = F.hamiltonian.h_u, F.hamiltonian.h_v
    d_hu_du = (h_u(xs, u + eu, v) - h_u(xs, u - eu, v)) / (2 * eu)
    d_hu_dv = (h_u(xs, u, v + ev) - h_u(xs, u, v - ev)) / (2 * ev)
    d_hv_du = (h_v(xs, u + eu, v) - h_v(xs, u - eu, v)) / (2 * eu)
    d_hv_dv = (h_v(xs, u, v + ev) - h_v(xs, u, v - ev)) / (2 * ev)
    return d_hu_du, d_hu_dv, d_hv_du, d_hv_dv


def solve_newton_coupled(F: EnergyFunctional, cfg: SolverConfig) -> SolveReport:
    """Damped Newton with backtracking on the coupled discrete system."""
    E = F.eigensystem
    k = F.operator.entries
    w = F.quadrature.weights
    n = E.n
    xs = F.coords()
    z = _initial_iterate(F, cfg)
    u, v = z.u.values.copy(), z.v.values.copy()
    trace: list[TraceEntry] = []
    iterates: list[ProductElement] = []

    def loads(uu, vv):
        hu = np.asarray(F.hamiltonian.h_u(xs, uu, vv), dtype=float)
        hv = np.asarray(F.hamiltonian.h_v(xs, uu, vv), dtype=float)
        return k @ uu - w * hv, k @ vv - w * hu

    r_u, r_v = loads(u, v)
    for it in range(cfg.max_iter):
        z = ProductElement(GridFunction(F.grid, u.copy()), GridFunction(F.grid, v.copy()))
        if cfg.keep_iterates:
            iterates.append(z)
        trace.append(_trace_entry(F, z))
        if trace[-1].grad_norm <= cfg.tol:
            return _finish(F, cfg, z, it, trace, "converged", iterates=iterates)
        d_hu_du, d_hu_dv, d_hv_du, d_hv_dv = _hamiltonian_jacobian_blocks(F, u, v)
        jac = np.block(
            [
                [k - np.diag(w * d_hv_du), -np.diag(w * d_hv_dv)],
                [-np.diag(w * d_hu_du), k - np.diag(w * d_hu_dv)],
            ]
        )
        try:
            step = _refined_solve(jac, -np.concatenate([r_u, r_v]))
        except np.linalg.LinAlgError:
            return _finish(
                F, cfg, z, it, trace, "singular_jacobian",
                message="Newton matrix is singular at the reported iterate",
                iterates=iterates,
            )
        base = np.linalg.norm(np.concatenate([r_u, r_v]))
        alpha = cfg.damping
        for _ in range(25):
            u_t, v_t = u + alpha * step[:n], v + alpha * step[n:]
            r_u_t, r_v_t = loads(u_t, v_t)
            if np.linalg.norm(np.concatenate([r_u_t, r_v_t])) < base or base == 0.0:
                break
            alpha *= 0.5
        u, v, r_u, r_v = u_t, v_t, r_u_t, r_v_t
    z = ProductElement(GridFunction(F.grid, u), GridFunction(F.grid, v))
    trace.append(_trace_entry(F, z))
    if trace[-1].grad_norm <= cfg.tol:
        return _finish(F, cfg, z, cfg.max_iter, trace, "converged", iterates=iterates)
    return _finish(
        F, cfg, z, cfg.max_iter, trace, "max_iter_exceeded",
        message=f"gradient norm {trace[-1].grad_norm:.3e} after {cfg.max_iter} iterations",
        iterates=iterates,
    )


# ----------------------------------------------------------------------------
# scalar reduction for the two-power prototype
# ----------------------------------------------------------------------------

def solve_reduction(F: EnergyFunctional, cfg: SolverConfig) -> SolveReport:
    """Eliminate v via the first equation and Newton-iterate on u alone.

    Valid for the two-power prototype, whose first right-hand side is an
    invertible power of v. With matching exponents the pointwise power is
    taken in the odd (sign-preserving) sense; otherwise any nonpositive
    value of the operator image aborts with a negative-phase report.
    """
    name = F.hamiltonian.name
    if not name.startswith("lane_emden("):
        raise ValueError("reduction requires the lane_emden prototype Hamiltonian")
    # stored growth exponents are swapped relative to the system powers
    p_sys = F.hamiltonian.q
    q_sys = F.hamiltonian.p
    symmetric = p_sys == q_sys
    inv_exp = 1.0 / (p_sys - 1.0)

    E = F.eigensystem
    k = F.operator.entries
    w = F.quadrature.weights
    z0 = _initial_iterate(F, cfg)
    u = z0.u.values.copy()
    trace: list[TraceEntry] = []
    iterates: list[ProductElement] = []

    def reconstruct(uu):
        wv = (k @ uu) / w
        if not symmetric and np.any(wv <= 0):
            return wv, None
        vv = np.sign(wv) * np.abs(wv) ** inv_exp
        return wv, vv

    def residual(uu, vv):
        return k @ vv - w * np.sign(uu) * np.abs(uu) ** (q_sys - 1.0)

    wv, v = reconstruct(u)
    if v is None:
        return _negative_phase_report(F, cfg, u, wv, trace)
    g = residual(u, v)
    for it in range(cfg.max_iter):
        z = ProductElement(GridFunction(F.grid, u.copy()), GridFunction(F.grid, v.copy()))
        if cfg.keep_iterates:
            iterates.append(z)
        trace.append(_trace_entry(F, z))
        if trace[-1].grad_norm <= cfg.tol:
            return _finish(F, cfg, z, it, trace, "converged", iterates=iterates)
        floor = 1e-14 * np.abs(wv).max()
        dv = inv_exp * np.maximum(np.abs(wv), floor) ** (inv_exp - 1.0)
        jac = k @ ((dv / w)[:, None] * k) - np.diag(
            w * (q_sys - 1.0) * np.abs(u) ** (q_sys - 2.0)
        )
        try:
            step = _refined_solve(jac, -g)
        except np.linalg.LinAlgError:
            z = ProductElement(GridFunction(F.grid, u), GridFunction(F.grid, v))
            return _finish(
                F, cfg, z, it, trace, "singular_jacobian",
                message="reduced Newton matrix is singular at the reported iterate",
                iterates=iterates,
            )
        base = np.linalg.norm(g)
        alpha = cfg.damping
        for _ in range(25):
            u_t = u + alpha * step
            wv_t, v_t = reconstruct(u_t)
            if v_t is None:
                alpha *= 0.5
                continue
            g_t = residual(u_t, v_t)
            if np.linalg.norm(g_t) < base or base == 0.0:
                break
            alpha *= 0.5
        else:
            if v_t is None:
                return _negative_phase_report(F, cfg, u_t, wv_t, trace)
        u, wv, v, g = u_t, wv_t, v_t, g_t
    z = ProductElement(GridFunction(F.grid, u), GridFunction(F.grid, v))
    trace.append(_trace_entry(F, z))
    if trace[-1].grad_norm <= cfg.tol:
        return _finish(F, cfg, z, cfg.max_iter, trace, "converged", iterates=iterates)
    return _finish(
        F, cfg, z, cfg.max_iter, trace, "max_iter_exceeded",
        message=f"gradient norm {trace[-1].grad_norm:.3e} after {cfg.max_iter} iterations",
        iterates=iterates,
    )


def _negative_phase_report(F, cfg, u, wv, trace) -> SolveReport:
    bad = np.flatnonzero(wv <= 0)
    coords = F.grid.coords()
    locs = coords[bad[:5]] if F.grid.dim == 1 else coords[bad[:5], :]
    z = ProductElement(
        GridFunction(F.grid, u),
        GridFunction(F.grid, np.zeros_like(u)),
    )
    return _finish(
        F, cfg, z, len(trace), trace, "negative_phase",
        message=(
            f"operator image of u is nonpositive at {bad.size} nodes "
            f"(first locations {np.asarray(locs).tolist()}); the fractional power "
            "is undefined there for asymmetric exponents"
        ),
    )


# ----------------------------------------------------------------------------
# sign-split gradient flow with dichotomy and polish
# ----------------------------------------------------------------------------

def _flow_machinery(F: EnergyFunctional):
    E = F.eigensystem
    lam = E.eigenvalues
    theta = F.theta
    xs = F.coords()
    phi = E.eigenvectors
    to_c = lambda vals: E.to_coefficients(vals)

    def grad_c(a, b):
        u = phi @ a
        v = phi @ b
        hu = np.asarray(F.hamiltonian.h_u(xs, u, v), dtype=float)
        hv = np.asarray(F.hamiltonian.h_v(xs, u, v), dtype=float)
        ga = lam ** (1.0 - theta) * b - lam ** (-theta) * to_c(hu)
        gb = lam ** (theta - 1.0) * a - lam ** (theta - 2.0) * to_c(hv)
        return ga, gb

    def gnorm(ga, gb):
        return float(np.sqrt(np.sum(lam**theta * ga**2) + np.sum(lam ** (2 - theta) * gb**2)))

    def znorm(a, b):
        return float(np.sqrt(np.sum(lam**theta * a**2) + np.sum(lam ** (2 - theta) * b**2)))

    def energy_c(a, b):
        u = phi @ a
        v = phi @ b
        hvals = np.asarray(F.hamiltonian.h(xs, u, v), dtype=float)
        return float(np.sum(lam * a * b) - np.dot(F.quadrature.weights, hvals))

    return lam, theta, phi, grad_c, gnorm, znorm, energy_c


def solve_indefinite_flow(F: EnergyFunctional, cfg: SolverConfig) -> SolveReport:
    """Sign-split flow steered by a dichotomy on the initial ray amplitude.

    Each probe runs the plain flow (descent on E+, ascent on E-, step
    halving on gradient-norm plateaus) and is classified by outcome:
    collapse toward zero or escape to strongly negative energy. Bisection
    between the two basins pushes iterates along the separatrix toward the
    saddle; the best iterate seen is polished by Newton on the gradient.
    """
    lam, theta, phi, grad_c, gnorm, znorm, energy_c = _flow_machinery(F)
    E = F.eigensystem
    z0 = _initial_iterate(F, cfg)
    a0 = E.to_coefficients(z0.u.values)
    b0 = E.to_coefficients(z0.v.values)
    n0 = znorm(a0, b0)
    if n0 == 0.0:
        a0 = np.zeros(E.n)
        a0[0] = 1.0
        b0 = lam ** (theta - 1.0) * a0
        n0 = znorm(a0, b0)
    dir_a, dir_b = a0 / n0, b0 / n0
    j_floor = -10.0 * (1.0 + abs(energy_c(a0, b0)))

    probe_steps = max(200, min(cfg.max_iter, 4000))

    def probe(t: float):
        a, b = t * dir_a, t * dir_b
        ref = znorm(a, b)
        best = np.inf
        best_ab = (a.copy(), b.copy())
        rec: list[TraceEntry] = []
        d = cfg.damping
        since_best = 0
        for i in range(probe_steps):
            ga, gb = grad_c(a, b)
            gn = gnorm(ga, gb)
            rec.append(TraceEntry(energy=energy_c(a, b), grad_norm=gn, z_norm=znorm(a, b)))
            if gn < best:
                best, best_ab, since_best = gn, (a.copy(), b.copy()), 0
            else:
                since_best += 1
                if since_best >= 25:
                    d = max(d * 0.5, cfg.damping / 64.0)
                    since_best = 0
            if gn <= cfg.tol:
                return "hit", best, best_ab, rec
            if rec[-1].energy < j_floor or rec[-1].z_norm > 1e6 * max(1.0, ref):
                return "diverge", best, best_ab, rec
            if rec[-1].z_norm < 1e-3 * ref:
                return "trivial", best, best_ab, rec
            # descent on E+, ascent on E-: subtract L grad in coefficients
            a = a - d * lam ** (1.0 - theta) * gb
            b = b - d * lam ** (theta - 1.0) * ga
        return "maxed", best, best_ab, rec

    outcome, best, best_ab, best_rec = probe(n0)
    total_steps = len(best_rec)
    if outcome != "hit":
        t_lo = t_hi = None
        if outcome == "trivial":
            t_lo = n0
        elif outcome == "diverge":
            t_hi = n0
        t = n0
        for _ in range(40):
            if t_lo is not None and t_hi is not None:
                break
            t = t * 2.0 if t_hi is None else t * 0.5
            out_i, b_i, ab_i, rec_i = probe(t)
            total_steps += len(rec_i)
            if b_i < best:
                best, best_ab, best_rec = b_i, ab_i, rec_i
            if out_i == "hit":
                outcome = "hit"
                break
            if out_i == "trivial":
                t_lo = t
            elif out_i == "diverge":
                t_hi = t
            else:
                break
        if outcome != "hit" and t_lo is not None and t_hi is not None:
            for _ in range(80):
                tm = 0.5 * (t_lo + t_hi)
                out_i, b_i, ab_i, rec_i = probe(tm)
                total_steps += len(rec_i)
                if b_i < best:
                    best, best_ab, best_rec = b_i, ab_i, rec_i
                if out_i == "hit":
                    outcome = "hit"
                    break
                if out_i == "trivial":
                    t_lo = tm
                elif out_i == "diverge":
                    t_hi = tm
                else:
                    break
                if best <= 10.0 * cfg.tol or (t_hi - t_lo) < 1e-14 * t_hi:
                    break

    # Newton polish on the gradient system from the best iterate
    a, b = best_ab
    trace = list(best_rec)
    xs = F.coords()
    polish_status = "stagnation"
    for _ in range(30):
        ga, gb = grad_c(a, b)
        gn = gnorm(ga, gb)
        if gn <= cfg.tol:
            polish_status = "converged"
            break
        u = phi @ a
        v = phi @ b
        d_hu_du, d_hu_dv, d_hv_du, d_hv_dv = _hamiltonian_jacobian_blocks(F, u, v)
        t_mat = phi.T * F.quadrature.weights[None, :]
        blk_aa = -(lam ** (-theta))[:, None] * (t_mat @ (d_hu_du[:, None] * phi))
        blk_ab = np.diag(lam ** (1.0 - theta)) - (lam ** (-theta))[:, None] * (
            t_mat @ (d_hu_dv[:, None] * phi)
        )
        blk_ba = np.diag(lam ** (theta - 1.0)) - (lam ** (theta - 2.0))[:, None] * (
            t_mat @ (d_hv_du[:, None] * phi)
        )
        blk_bb = -(lam ** (theta - 2.0))[:, None] * (t_mat @ (d_hv_dv[:, None] * phi))
        jac = np.block([[blk_aa, blk_ab], [blk_ba, blk_bb]])
        try:
            step = _refined_solve(jac, -np.concatenate([ga, gb]))
        except np.linalg.LinAlgError:
            break
        alpha = 1.0
        for _ in range(25):
            a_t = a + alpha * step[: E.n]
            b_t = b + alpha * step[E.n :]
            if gnorm(*grad_c(a_t, b_t)) < gn:
                break
            alpha *= 0.5
        a, b = a_t, b_t
        trace.append(
            TraceEntry(energy=energy_c(a, b), grad_norm=gnorm(*grad_c(a, b)), z_norm=znorm(a, b))
        )
        total_steps += 1

    z = ProductElement(
        GridFunction(F.grid, phi @ a), GridFunction(F.grid, phi @ b)
    )
    final_gn = gnorm(*grad_c(a, b))
    if final_gn <= cfg.tol:
        return _finish(F, cfg, z, total_steps, trace, "converged")
    return _finish(
        F, cfg, z, total_steps, trace, "stagnation",
        message=f"best gradient norm {final_gn:.3e} above tol {cfg.tol:.3e}",
    )


# ----------------------------------------------------------------------------
# trace diagnostics
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PSDiagnostic:
    n_entries: int
    final_grad_norm: float
    decreasing_fraction: float
    max_z_norm: float
    final_z_norm: float
    growth_detected: bool

    def to_dict(self) -> dict:
        return {
            "n_entries": self.n_entries,
            "final_grad_norm": self.final_grad_norm,
            "decreasing_fraction": self.decreasing_fraction,
            "max_z_norm": self.max_z_norm,
            "final_z_norm": self.final_z_norm,
            "growth_detected": self.growth_detected,
        }


def palais_smale_trace(report: SolveReport) -> PSDiagnostic:
    """Monotonicity of the gradient norms and boundedness of the iterates."""
    trace = report.ps_trace
    if len(trace) < 2:
        raise ValueError("trace diagnostics need at least two entries")
    grads = np.array([t.grad_norm for t in trace])
    norms = np.array([t.z_norm for t in trace])
    decreasing = np.count_nonzero(np.diff(grads) < 0) / (len(grads) - 1)
    growth = bool(
        norms[-1] > 10.0 * max(norms[0], 1e-12) and norms[-1] >= 0.99 * norms.max()
    )
    return PSDiagnostic(
        n_entries=len(trace),
        final_grad_norm=float(grads[-1]),
        decreasing_fraction=float(decreasing),
        max_z_norm=float(norms.max()),
        final_z_norm=float(norms[-1]),
        growth_detected=growth,
    )
