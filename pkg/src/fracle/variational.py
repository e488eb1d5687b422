"""Strongly indefinite energy functional, residual notions, and linking geometry.

The energy of a pair z = (u, v) is the indefinite quadratic pairing of the
spectral calculus minus the Hamiltonian integral:

    J(z) = sum_k lam_k u_k v_k - ∫ H(x, u, v) dx.

Its Riesz gradient in the product metric E^theta x E^{2-theta} has
coefficients

    grad_u,k = lam^{1-theta} v_k - lam^{-theta}     (H_u)_k
    grad_v,k = lam^{theta-1} u_k - lam^{theta-2}    (H_v)_k,

so a vanishing gradient is exactly the discrete critical-point equation.
Residuals for the weaker solution notions (weak, distributional, finite
energy) are max-normalized pairings against the hat-function test set.

The linking machinery provides the scalings B1, B2, deterministic samplers
for the sphere S and the box boundary dQ, the sampled extrema check for
the geometric separation conditions (I4)/(I5), and the invertibility check
(I3) of P_X B1^{-1} exp(w L) B2 on X = E-.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DomainGrid, GridFunction, Quadrature
from .hamiltonian import HamiltonianSpec
from .operators import OperatorMatrix
from .spectral import (
    EigenSystem,
    ProductElement,
    apply_L,
    e_inner,
    e_norm,
    project_pm,
)

__all__ = [
    "EnergyFunctional",
    "ResidualReport",
    "LinkingGeometry",
    "I3Report",
    "I45Report",
    "energy",
    "gradient",
    "theta_weak_residual",
    "weak_residual",
    "distributional_residual",
    "residual_report",
    "duality_bound_check",
    "pick_munu",
    "make_z_plus",
    "make_z_minus",
    "linking_sets",
    "verify_I4_I5",
    "verify_I3",
    "nemytskii_tail_fraction",
]


@dataclass(frozen=True, eq=False)
class EnergyFunctional:
    """Energy J_theta assembled from an eigensystem, a Hamiltonian, and quadrature."""

    eigensystem: EigenSystem
    theta: float
    hamiltonian: HamiltonianSpec
    quadrature: Quadrature
    operator: OperatorMatrix
    grid: DomainGrid

    def __post_init__(self):
        if not 0.0 < self.theta < 2.0:
            raise ValueError(f"theta must lie in (0, 2), got {self.theta}")

    def coords(self) -> np.ndarray:
        return self.grid.coords()

    def hamiltonian_values(self, z: ProductElement):
        xs = self.coords()
        return (
            np.asarray(self.hamiltonian.h(xs, z.u.values, z.v.values), dtype=float),
            np.asarray(self.hamiltonian.h_u(xs, z.u.values, z.v.values), dtype=float),
            np.asarray(self.hamiltonian.h_v(xs, z.u.values, z.v.values), dtype=float),
        )


def energy(F: EnergyFunctional, z: ProductElement) -> float:
    """J(z) = Q(z) - ∫ H(x, u, v) dx."""
    E = F.eigensystem
    a = E.to_coefficients(z.u.values)
    b = E.to_coefficients(z.v.values)
    xs = F.coords()
    hvals = np.asarray(F.hamiltonian.h(xs, z.u.values, z.v.values), dtype=float)
    if not np.all(np.isfinite(hvals)):
        raise OverflowError("Hamiltonian evaluation overflowed")
    return float(np.sum(E.eigenvalues * a * b) - np.dot(F.quadrature.weights, hvals))


def _gradient_coefficients(F: EnergyFunctional, z: ProductElement):
    E = F.eigensystem
    lam = E.eigenvalues
    a = E.to_coefficients(z.u.values)
    b = E.to_coefficients(z.v.values)
    _, hu, hv = F.hamiltonian_values(z)
    hu_k = E.to_coefficients(hu)
    hv_k = E.to_coefficients(hv)
    ga = lam ** (1.0 - F.theta) * b - lam ** (-F.theta) * hu_k
    gb = lam ** (F.theta - 1.0) * a - lam ** (F.theta - 2.0) * hv_k
    return ga, gb


def gradient(F: EnergyFunctional, z: ProductElement) -> ProductElement:
    """Riesz representative of the derivative of J in the product metric."""
    E = F.eigensystem
    ga, gb = _gradient_coefficients(F, z)
    return ProductElement(
        GridFunction(F.grid, E.from_coefficients(ga)),
        GridFunction(F.grid, E.from_coefficients(gb)),
    )


def theta_weak_residual(F: EnergyFunctional, z: ProductElement) -> float:
    """Product-metric norm of the gradient; zero exactly at critical points."""
    lam = F.eigensystem.eigenvalues
    ga, gb = _gradient_coefficients(F, z)
    return float(
        np.sqrt(
            np.sum(lam**F.theta * ga**2) + np.sum(lam ** (2.0 - F.theta) * gb**2)
        )
    )


def _hat_test_norms(F: EnergyFunctional, order: float) -> np.ndarray:
    # coefficients of all hat tests at once: column i of Phi^T M
    E = F.eigensystem
    coeffs = E.eigenvectors.T * E.mass[None, :]
    return np.sqrt(np.sum(E.eigenvalues[:, None] ** order * coeffs**2, axis=0))


def _residual_loads(F: EnergyFunctional, z: ProductElement):
    _, hu, hv = F.hamiltonian_values(z)
    k = F.operator.entries
    w = F.quadrature.weights
    r_u = k @ z.u.values - w * hv
    r_v = k @ z.v.values - w * hu
    return r_u, r_v


def weak_residual(
    F: EnergyFunctional, z: ProductElement, test_indices=None
) -> float:
    """Largest normalized defect of the two equations against hat tests.

    Tests for the u-equation are measured in the E^{2-theta} norm and
    tests for the v-equation in the E^theta norm, matching the duality of
    the pairing.
    """
    r_u, r_v = _residual_loads(F, z)
    nrm_u_tests = _hat_test_norms(F, 2.0 - F.theta)
    nrm_v_tests = _hat_test_norms(F, F.theta)
    if test_indices is not None:
        sel = np.asarray(test_indices, dtype=int)
        r_u, r_v = r_u[sel], r_v[sel]
        nrm_u_tests, nrm_v_tests = nrm_u_tests[sel], nrm_v_tests[sel]
    return float(
        max(np.max(np.abs(r_u) / nrm_u_tests), np.max(np.abs(r_v) / nrm_v_tests))
    )


def distributional_residual(
    F: EnergyFunctional, z: ProductElement, test_indices=None
) -> float:
    """Defect with the operator moved onto the test function.

    The operator matrix applied to a hat and divided by the mass gives the
    nodal values of the transformed test; pairing those against u in the
    quadrature inner product is the distributional evaluation path.
    """
    _, hu, hv = F.hamiltonian_values(z)
    k = F.operator.entries
    w = F.quadrature.weights
    transformed = k / w[:, None]  # column i: nodal values of the operator on hat i
    pair_u = (w * z.u.values) @ transformed - w * hv
    pair_v = (w * z.v.values) @ transformed - w * hu
    nrm_u_tests = _hat_test_norms(F, 2.0 - F.theta)
    nrm_v_tests = _hat_test_norms(F, F.theta)
    if test_indices is not None:
        sel = np.asarray(test_indices, dtype=int)
        pair_u, pair_v = pair_u[sel], pair_v[sel]
        nrm_u_tests, nrm_v_tests = nrm_u_tests[sel], nrm_v_tests[sel]
    return float(
        max(np.max(np.abs(pair_u) / nrm_u_tests), np.max(np.abs(pair_v) / nrm_v_tests))
    )


def _finite_energy_residual(F: EnergyFunctional, z: ProductElement) -> float | None:
    # defined when the solution space embeds into the energy space (theta >= 1)
    if F.theta < 1.0:
        return None
    lam = F.eigensystem.eigenvalues
    r_u, r_v = _residual_loads(F, z)
    a = F.eigensystem.eigenvectors.T @ r_u
    b = F.eigensystem.eigenvectors.T @ r_v
    return float(np.sqrt(np.sum(a**2 / lam) + np.sum(b**2 / lam)))


@dataclass(frozen=True)
class ResidualReport:
    theta_weak: float
    weak: float
    distributional: float
    finite_energy: float | None
    energy_value: float

    def to_dict(self) -> dict:
        return {
            "theta_weak": self.theta_weak,
            "weak": self.weak,
            "distributional": self.distributional,
            "finite_energy": self.finite_energy,
            "energy_value": self.energy_value,
        }

    def max_residual(self) -> float:
        vals = [self.theta_weak, self.weak, self.distributional]
        if self.finite_energy is not None:
            vals.append(self.finite_energy)
        return max(vals)


def residual_report(F: EnergyFunctional, z: ProductElement) -> ResidualReport:
    return ResidualReport(
        theta_weak=theta_weak_residual(F, z),
        weak=weak_residual(F, z),
        distributional=distributional_residual(F, z),
        finite_energy=_finite_energy_residual(F, z),
        energy_value=energy(F, z),
    )


def duality_bound_check(
    E: EigenSystem, theta: float, u: GridFunction, phi: GridFunction
) -> tuple[float, float]:
    """Return (|pairing|, |u|_{E^theta} |phi|_{E^{2-theta}}); lhs <= rhs holds
    with constant one by the Cauchy-Schwarz inequality in spectral coordinates."""
    if not 0.0 < theta < 2.0:
        raise ValueError(f"theta must lie in (0, 2), got {theta}")
    lam = E.eigenvalues
    a = E.to_coefficients(u.values)
    c = E.to_coefficients(phi.values)
    lhs = abs(float(np.sum(lam * a * c)))
    rhs = float(
        np.sqrt(np.sum(lam**theta * a**2)) * np.sqrt(np.sum(lam ** (2 - theta) * c**2))
    )
    return lhs, rhs


def pick_munu(p: float, q: float) -> tuple[float, float]:
    """Deterministic scaling exponents mu, nu > 1 with 1/p < mu/(mu+nu) and
    1/q < nu/(mu+nu): the ratio is fixed by the midpoint of the feasible
    interval and the smaller of the two is pinned to 2."""
    if 1.0 / p + 1.0 / q >= 1.0:
        raise ValueError(
            f"no feasible (mu, nu): requires 1/p + 1/q < 1, got {1/p + 1/q:.6f}"
        )
    t = 0.5 * (1.0 / p + 1.0 - 1.0 / q)
    if t <= 0.5:
        mu = 2.0
        nu = mu * (1.0 - t) / t
    else:
        nu = 2.0
        mu = nu * t / (1.0 - t)
    return mu, nu


def make_z_plus(E: EigenSystem, theta: float, k: int = 0, norm: float = 1.0) -> ProductElement:
    """Element of E+ whose u-component is the k-th eigenfunction, scaled to
    the requested product-space norm."""
    lam = E.eigenvalues
    coeff = np.zeros(E.n)
    coeff[k] = 1.0
    u = E.from_coefficients(coeff)
    v = E.from_coefficients(lam ** (theta - 1.0) * coeff)
    raw_norm = np.sqrt(2.0 * lam[k] ** theta)
    scale = norm / raw_norm
    return ProductElement(
        GridFunction(E.grid, scale * u), GridFunction(E.grid, scale * v)
    )


def make_z_minus(E: EigenSystem, theta: float, u_coeffs: np.ndarray) -> ProductElement:
    lam = E.eigenvalues
    u = E.from_coefficients(u_coeffs)
    v = E.from_coefficients(-(lam ** (theta - 1.0)) * u_coeffs)
    return ProductElement(GridFunction(E.grid, u), GridFunction(E.grid, v))


@dataclass(frozen=True, eq=False)
class LinkingGeometry:
    """Parameters of the linking pair: sphere radius rho in Y = E+, box size
    (sigma, M) in the affine slab over X = E-, scalings from (mu, nu), and
    the separation level delta."""

    mu: float
    nu: float
    rho: float
    sigma: float
    big_m: float
    z_plus: ProductElement
    delta: float

    def __post_init__(self):
        if self.mu <= 1.0 or self.nu <= 1.0:
            raise ValueError("mu and nu must exceed 1")
        if self.rho <= 0 or self.delta <= 0:
            raise ValueError("rho and delta must be positive")
        if self.big_m <= self.rho:
            raise ValueError("M must exceed rho")

    def b1(self, z: ProductElement) -> ProductElement:
        return _component_scale(z, self.rho ** (self.mu - 1), self.rho ** (self.nu - 1))

    def b1_inv(self, z: ProductElement) -> ProductElement:
        return _component_scale(z, self.rho ** (1 - self.mu), self.rho ** (1 - self.nu))

    def b2(self, z: ProductElement) -> ProductElement:
        return _component_scale(z, self.sigma ** (self.mu - 1), self.sigma ** (self.nu - 1))

    def sigma_lower_bound(self, E: EigenSystem, theta: float) -> float:
        ratio = self.sigma / self.rho
        mapped = _component_scale(
            self.z_plus, ratio ** (self.mu - 1), ratio ** (self.nu - 1)
        )
        return self.rho / e_norm(E, theta, mapped)

    def validate_with(self, E: EigenSystem, theta: float, munu_check: tuple[float, float] | None = None):
        if munu_check is not None:
            p, q = munu_check
            frac = self.mu / (self.mu + self.nu)
            if not (1.0 / p < frac and 1.0 / q < 1.0 - frac):
                raise ValueError("(mu, nu) do not satisfy the exponent constraints")
        lb = self.sigma_lower_bound(E, theta)
        if self.sigma <= lb:
            raise ValueError(
                f"sigma = {self.sigma:.6g} is below its lower bound {lb:.6g}"
            )


def _component_scale(z: ProductElement, cu: float, cv: float) -> ProductElement:
    return ProductElement(
        GridFunction(z.grid, cu * z.u.values),
        GridFunction(z.grid, cv * z.v.values),
    )


def _random_plus_element(E: EigenSystem, theta: float, rng, n_modes: int) -> ProductElement:
    lam = E.eigenvalues
    m = min(n_modes, E.n)
    c = np.zeros(E.n)
    c[:m] = rng.standard_normal(m) / (1.0 + np.arange(m))
    u = E.from_coefficients(c)
    v = E.from_coefficients(lam ** (theta - 1.0) * c)
    return ProductElement(GridFunction(E.grid, u), GridFunction(E.grid, v))


def linking_sets(
    geom: LinkingGeometry,
    E: EigenSystem,
    theta: float,
    seed: int = 0,
    n_modes: int = 12,
):
    """Deterministic samplers for S = B1{|z| = rho, z in E+} and for the three
    faces of the relative boundary of Q = B2{t z+ + z : 0 <= t <= sigma,
    |z| <= M, z in E-}."""
    geom.validate_with(E, theta)

    def sample_s(n: int) -> list[ProductElement]:
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(n):
            z = _random_plus_element(E, theta, rng, n_modes)
            nrm = e_norm(E, theta, z)
            out.append(geom.b1(_component_scale(z, geom.rho / nrm, geom.rho / nrm)))
        return out

    def sample_dq(n: int) -> list[ProductElement]:
        rng = np.random.default_rng(seed + 1)
        out = []
        for i in range(n):
            face = i % 3
            m = min(n_modes, E.n)
            c = np.zeros(E.n)
            c[:m] = rng.standard_normal(m) / (1.0 + np.arange(m))
            zm = make_z_minus(E, theta, c)
            nrm = e_norm(E, theta, zm)
            if face == 0:
                t = 0.0
                radius = geom.big_m * rng.uniform(0.0, 1.0)
            elif face == 1:
                t = geom.sigma
                radius = geom.big_m * rng.uniform(0.0, 1.0)
            else:
                t = geom.sigma * rng.uniform(0.0, 1.0)
                radius = geom.big_m
            zm = _component_scale(zm, radius / nrm, radius / nrm)
            zp = _component_scale(geom.z_plus, t, t)
            combined = ProductElement(
                GridFunction(E.grid, zp.u.values + zm.u.values),
                GridFunction(E.grid, zp.v.values + zm.v.values),
            )
            out.append(geom.b2(combined))
        return out

    return sample_s, sample_dq


@dataclass(frozen=True)
class I45Report:
    min_J_on_S: float
    max_J_on_dQ: float
    n_samples: int
    delta: float
    i4_holds: bool
    i5_holds: bool

    def to_dict(self) -> dict:
        return {
            "min_J_on_S": self.min_J_on_S,
            "max_J_on_dQ": self.max_J_on_dQ,
            "n_samples": self.n_samples,
            "delta": self.delta,
            "i4_holds": self.i4_holds,
            "i5_holds": self.i5_holds,
        }


def verify_I4_I5(
    F: EnergyFunctional,
    geom: LinkingGeometry,
    n_samples: int = 64,
    seed: int = 0,
) -> I45Report:
    """Sampled extrema of J on S and on the boundary of Q.

    Sampling can refute the separation (I4)/(I5) but not certify it; the
    returned extrema let the caller place delta below the sampled minimum.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sample_s, sample_dq = linking_sets(geom, F.eigensystem, F.theta, seed=seed)
    j_s = [energy(F, z) for z in sample_s(n_samples)]
    j_dq = [energy(F, z) for z in sample_dq(n_samples)]
    min_s = float(np.min(j_s))
    max_dq = float(np.max(j_dq))
    return I45Report(
        min_J_on_S=min_s,
        max_J_on_dQ=max_dq,
        n_samples=n_samples,
        delta=geom.delta,
        i4_holds=min_s >= geom.delta,
        i5_holds=max_dq <= 0.0,
    )


@dataclass(frozen=True)
class I3Report:
    omega: float
    smallest_singular_value: float
    n_modes: int
    involution_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "smallest_singular_value": self.smallest_singular_value,
            "n_modes": self.n_modes,
            "involution_error": self.involution_error,
            "passed": self.passed,
        }


def verify_I3(
    E: EigenSystem,
    theta: float,
    geom: LinkingGeometry,
    omega: float,
    n_modes: int | None = None,
) -> I3Report:
    """Invertibility of P_X B1^{-1} exp(omega L) B2 restricted to X = E-.

    The exponential is evaluated exactly as cosh(omega) I + sinh(omega) L,
    which is valid because L is an involution; the involution identity is
    re-verified numerically and its error reported.
    """
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    m = min(n_modes or 16, E.n)
    rng = np.random.default_rng(12345)
    c = rng.standard_normal(E.n) / (1.0 + np.arange(E.n))
    z = make_z_minus(E, theta, c)
    z = ProductElement(
        GridFunction(E.grid, z.u.values + rng.standard_normal(E.n) * 0.1),
        z.v,
    )
    ll = apply_L(E, theta, apply_L(E, theta, z))
    denom = max(e_norm(E, theta, z), 1e-30)
    involution_error = (
        e_norm(
            E,
            theta,
            ProductElement(
                GridFunction(E.grid, ll.u.values - z.u.values),
                GridFunction(E.grid, ll.v.values - z.v.values),
            ),
        )
        / denom
    )

    ch, sh = np.cosh(omega), np.sinh(omega)
    basis = []
    for k in range(m):
        coeff = np.zeros(E.n)
        coeff[k] = 1.0 / np.sqrt(2.0 * E.eigenvalues[k] ** theta)
        basis.append(make_z_minus(E, theta, coeff))

    mat = np.zeros((m, m))
    for col, xi in enumerate(basis):
        w = geom.b2(xi)
        lw = apply_L(E, theta, w)
        w = ProductElement(
            GridFunction(E.grid, ch * w.u.values + sh * lw.u.values),
            GridFunction(E.grid, ch * w.v.values + sh * lw.v.values),
        )
        w = geom.b1_inv(w)
        _, w_minus = project_pm(E, theta, w)
        for row, eta in enumerate(basis):
            mat[row, col] = e_inner(E, theta, w_minus, eta)
    smin = float(np.linalg.svd(mat, compute_uv=False)[-1])
    return I3Report(
        omega=omega,
        smallest_singular_value=smin,
        n_modes=m,
        involution_error=float(involution_error),
        passed=smin > 1e-10,
    )


def nemytskii_tail_fraction(
    F: EnergyFunctional, z: ProductElement, top_fraction: float = 0.1
) -> float:
    """Fraction of the Hamiltonian gradient's product-metric norm carried by
    the highest modes; decays under refinement for smooth data (a discrete
    signature of the compactness of that term)."""
    E = F.eigensystem
    lam = E.eigenvalues
    _, hu, hv = F.hamiltonian_values(z)
    ga = lam ** (-F.theta) * E.to_coefficients(hu)
    gb = lam ** (F.theta - 2.0) * E.to_coefficients(hv)
    weights_u = lam**F.theta * ga**2
    weights_v = lam ** (2.0 - F.theta) * gb**2
    cut = int(np.ceil((1.0 - top_fraction) * E.n))
    top = np.sum(weights_u[cut:]) + np.sum(weights_v[cut:])
    total = np.sum(weights_u) + np.sum(weights_v)
    return float(np.sqrt(top / total)) if total > 0 else 0.0
