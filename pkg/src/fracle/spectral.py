"""Eigendecomposition and the fractional-power calculus built on it.

Given a symmetric positive definite operator matrix K with diagonal mass
M, the generalized eigenpairs ``K phi = lam M phi`` give an M-orthonormal
basis. Writing ``u_k`` for the coefficients of u in that basis, the
calculus provides

* the fractional power ``A^theta u = sum lam_k^{theta/2} u_k phi_k``,
* the interpolation norms ``|u|_{E^theta}^2 = sum lam_k^theta u_k^2``,
* the saddle operator ``L(u, v) = (A^{-theta} A^{2-theta} v,
  A^{-(2-theta)} A^theta u)`` with eigenspaces E+ and E-,
* the orthogonal projections P+ / P- onto those eigenspaces, and
* the indefinite quadratic form ``Q(u, v) = sum lam_k u_k v_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .grid import DomainGrid, GridFunction
from .operators import OperatorMatrix

__all__ = [
    "EigenSystem",
    "ProductElement",
    "eig_decompose",
    "apply_power",
    "apply_inverse_power",
    "etheta_norm",
    "apply_L",
    "project_pm",
    "quadratic_form",
    "e_inner",
    "e_norm",
]


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending positive eigenvalues with M-orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    grid: DomainGrid | None = None

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def to_coefficients(self, values: np.ndarray) -> np.ndarray:
        """Coefficients u_k = (u, phi_k) in the quadrature inner product."""
        return self.eigenvectors.T @ (self.mass * values)

    def from_coefficients(self, coeffs: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ coeffs

    def function(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.grid, values)

    def mode(self, k: int) -> GridFunction:
        """k-th eigenfunction (0-based) as a grid function."""
        return GridFunction(self.grid, self.eigenvectors[:, k].copy())


def eig_decompose(op: OperatorMatrix) -> EigenSystem:
    """Full generalized eigendecomposition of (K, M) with deterministic signs.

    The diagonal mass is folded in by the symmetric scaling M^{-1/2} K
    M^{-1/2}; eigenvectors are M-orthonormal and sign-fixed so that the
    first component exceeding 1e-12 of the max amplitude is positive.
    """
    sw = np.sqrt(op.mass)
    reduced = op.entries / sw[:, None] / sw[None, :]
    lam, vecs = eigh(reduced)
    if not np.all(np.isfinite(lam)):
        raise RuntimeError("eigendecomposition did not converge")
    if lam[0] <= 0:
        raise ValueError(
            f"operator has non-positive eigenvalue {lam[0]:.6e}; "
            "spectral calculus requires a positive definite operator"
        )
    phi = vecs / sw[:, None]
    for k in range(phi.shape[1]):
        col = phi[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        if col[nz[0]] < 0:
            phi[:, k] = -col
    return EigenSystem(
        eigenvalues=lam, eigenvectors=phi, mass=op.mass.copy(), grid=op.grid
    )


@dataclass(frozen=True, eq=False)
class ProductElement:
    """Pair z = (u, v) of grid functions on a common grid."""

    u: GridFunction
    v: GridFunction

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("both components must live on the same grid")

    @property
    def grid(self) -> DomainGrid:
        return self.u.grid

    @staticmethod
    def zeros(grid: DomainGrid) -> "ProductElement":
        return ProductElement(GridFunction.zeros(grid), GridFunction.zeros(grid))


def _check_theta(theta: float, lo: float, hi: float, closed_lo=True, closed_hi=True):
    ok_lo = theta >= lo if closed_lo else theta > lo
    ok_hi = theta <= hi if closed_hi else theta < hi
    if not (ok_lo and ok_hi):
        lb = "[" if closed_lo else "("
        rb = "]" if closed_hi else ")"
        raise ValueError(f"theta must lie in {lb}{lo}, {hi}{rb}, got {theta}")


def apply_power(E: EigenSystem, theta: float, u: GridFunction) -> GridFunction:
    """Spectral multiplier lam_k^{theta/2}, theta in [0, 2]."""
    _check_theta(theta, 0.0, 2.0)
    c = E.to_coefficients(u.values)
    return GridFunction(u.grid, E.from_coefficients(E.eigenvalues ** (theta / 2.0) * c))


def apply_inverse_power(E: EigenSystem, theta: float, w: GridFunction) -> GridFunction:
    """Spectral multiplier lam_k^{-theta/2}, theta in (0, 2]; inverse of apply_power."""
    _check_theta(theta, 0.0, 2.0, closed_lo=False)
    c = E.to_coefficients(w.values)
    return GridFunction(w.grid, E.from_coefficients(E.eigenvalues ** (-theta / 2.0) * c))


def etheta_norm(E: EigenSystem, theta: float, u: GridFunction) -> float:
    """Interpolation-space norm ``sqrt(sum lam_k^theta u_k^2)``."""
    _check_theta(theta, 0.0, 2.0)
    c = E.to_coefficients(u.values)
    return float(np.sqrt(np.sum(E.eigenvalues**theta * c**2)))


def apply_L(E: EigenSystem, theta: float, z: ProductElement) -> ProductElement:
    """Saddle operator: an involution whose eigenspaces split the product space."""
    _check_theta(theta, 0.0, 2.0, closed_lo=False, closed_hi=False)
    lam = E.eigenvalues
    a = E.to_coefficients(z.u.values)
    b = E.to_coefficients(z.v.values)
    new_u = E.from_coefficients(lam ** (1.0 - theta) * b)
    new_v = E.from_coefficients(lam ** (theta - 1.0) * a)
    return ProductElement(GridFunction(z.grid, new_u), GridFunction(z.grid, new_v))


def project_pm(
    E: EigenSystem, theta: float, z: ProductElement
) -> tuple[ProductElement, ProductElement]:
    """Orthogonal projections (P+ z, P- z); their sum reproduces z exactly."""
    _check_theta(theta, 0.0, 2.0, closed_lo=False, closed_hi=False)
    lam = E.eigenvalues
    a = E.to_coefficients(z.u.values)
    b = E.to_coefficients(z.v.values)
    plus_u = 0.5 * (z.u.values + E.from_coefficients(lam ** (1.0 - theta) * b))
    plus_v = 0.5 * (z.v.values + E.from_coefficients(lam ** (theta - 1.0) * a))
    z_plus = ProductElement(GridFunction(z.grid, plus_u), GridFunction(z.grid, plus_v))
    z_minus = ProductElement(
        GridFunction(z.grid, z.u.values - plus_u),
        GridFunction(z.grid, z.v.values - plus_v),
    )
    return z_plus, z_minus


def quadratic_form(E: EigenSystem, theta: float, z: ProductElement) -> float:
    """Indefinite pairing ``Q(z) = sum lam_k u_k v_k`` (theta-independent mode sum)."""
    _check_theta(theta, 0.0, 2.0, closed_lo=False, closed_hi=False)
    a = E.to_coefficients(z.u.values)
    b = E.to_coefficients(z.v.values)
    return float(np.sum(E.eigenvalues * a * b))


def e_inner(E: EigenSystem, theta: float, z1: ProductElement, z2: ProductElement) -> float:
    """Product-space inner product: E^theta on u-components, E^{2-theta} on v."""
    lam = E.eigenvalues
    a1 = E.to_coefficients(z1.u.values)
    b1 = E.to_coefficients(z1.v.values)
    a2 = E.to_coefficients(z2.u.values)
    b2 = E.to_coefficients(z2.v.values)
    return float(np.sum(lam**theta * a1 * a2) + np.sum(lam ** (2.0 - theta) * b1 * b2))


def e_norm(E: EigenSystem, theta: float, z: ProductElement) -> float:
    return float(np.sqrt(max(e_inner(E, theta, z, z), 0.0)))
