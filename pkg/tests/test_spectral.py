import numpy as np
import pytest

from fracle.grid import GridFunction, make_grid
from fracle.operators import OperatorMatrix, assemble_integral_fraclap, assemble_local
from fracle.spectral import (
    ProductElement,
    apply_L,
    apply_inverse_power,
    apply_power,
    e_inner,
    e_norm,
    eig_decompose,
    etheta_norm,
    project_pm,
    quadratic_form,
)

from conftest import random_pair


def _rand_fn(grid, rng, scale=1.0):
    return GridFunction(grid, scale * rng.standard_normal(grid.n_total))


def test_scalar_operator():
    op = OperatorMatrix(entries=np.array([[3.0]]), mass=np.array([0.5]), kind="local", s=None)
    eig = eig_decompose(op)
    assert eig.eigenvalues[0] == pytest.approx(6.0, rel=1e-14)


def test_indefinite_operator_rejected():
    op = OperatorMatrix(
        entries=np.array([[1.0, 0.0], [0.0, -2.0]]),
        mass=np.ones(2),
        kind="local",
        s=None,
    )
    with pytest.raises(ValueError):
        eig_decompose(op)


def test_asymmetric_entries_rejected():
    with pytest.raises(ValueError):
        OperatorMatrix(
            entries=np.array([[1.0, 0.5], [0.0, 1.0]]),
            mass=np.ones(2),
            kind="local",
            s=None,
        )


def test_local_laplacian_eigenvalues(local_eig_511):
    k = np.arange(1, 11)
    rel = np.abs(local_eig_511.eigenvalues[:10] - (k * np.pi) ** 2) / (k * np.pi) ** 2
    assert rel.max() < 1e-3


def test_eigen_residual_per_mode(local_op_511, local_eig_511):
    k_mat, m = local_op_511.entries, local_op_511.mass
    lam, phi = local_eig_511.eigenvalues, local_eig_511.eigenvectors
    res = k_mat @ phi - (m[:, None] * phi) * lam[None, :]
    per_mode = np.linalg.norm(res, axis=0)
    assert np.all(per_mode <= 1e-9 * lam)


def test_orthonormality_and_parseval(calc_eig, calc_grid):
    gram = (calc_eig.eigenvectors.T * calc_eig.mass[None, :]) @ calc_eig.eigenvectors
    assert np.abs(gram - np.eye(calc_eig.n)).max() < 1e-10
    rng = np.random.default_rng(0)
    u = _rand_fn(calc_grid, rng)
    coeffs = calc_eig.to_coefficients(u.values)
    l2 = calc_grid.quadrature().lp_norm(u, 2.0)
    assert np.sum(coeffs**2) == pytest.approx(l2**2, rel=1e-10)


def test_sign_convention(local_eig_511):
    phi = local_eig_511.eigenvectors
    for k in range(20):
        col = phi[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        assert col[nz[0]] > 0


def test_apply_power_identity_at_zero(calc_eig, calc_grid):
    rng = np.random.default_rng(1)
    u = _rand_fn(calc_grid, rng)
    out = apply_power(calc_eig, 0.0, u)
    assert np.abs(out.values - u.values).max() < 1e-12 * max(1.0, np.abs(u.values).max())


def test_apply_power_single_mode(calc_eig):
    u = calc_eig.mode(2)
    out = apply_power(calc_eig, 1.3, u)
    lam3 = calc_eig.eigenvalues[2]
    assert np.allclose(out.values, lam3 ** (1.3 / 2) * u.values, rtol=1e-12, atol=1e-12)


def test_apply_power_semigroup(calc_eig, calc_grid):
    rng = np.random.default_rng(2)
    u = _rand_fn(calc_grid, rng)
    a = apply_power(calc_eig, 0.7, apply_power(calc_eig, 0.9, u))
    b = apply_power(calc_eig, 1.6, u)
    assert np.abs(a.values - b.values).max() < 1e-10 * max(1.0, np.abs(b.values).max())


def test_apply_power_domain():
    g = make_grid(1, (0, 1), 4)
    eig = eig_decompose(assemble_local(g))
    u = GridFunction.zeros(g)
    with pytest.raises(ValueError):
        apply_power(eig, -0.1, u)
    with pytest.raises(ValueError):
        apply_power(eig, 2.1, u)
    with pytest.raises(ValueError):
        apply_inverse_power(eig, 0.0, u)


def test_inverse_power_roundtrip(calc_eig, calc_grid):
    rng = np.random.default_rng(3)
    u = _rand_fn(calc_grid, rng)
    for theta in (0.4, 1.0, 2.0):
        back = apply_inverse_power(calc_eig, theta, apply_power(calc_eig, theta, u))
        assert np.abs(back.values - u.values).max() < 1e-10


def test_inverse_power_single_mode(calc_eig):
    w = calc_eig.mode(0)
    out = apply_inverse_power(calc_eig, 0.8, w)
    lam1 = calc_eig.eigenvalues[0]
    assert np.allclose(out.values, lam1 ** (-0.4) * w.values, rtol=1e-12)


def test_inverse_power_adjoint_identity(calc_eig, calc_grid):
    # (A^{-theta} w, y)_{E^theta} = (w, A^theta y)_{L2}, evaluated along
    # two independent code paths
    rng = np.random.default_rng(4)
    q = calc_grid.quadrature()
    for theta in (0.5, 1.2):
        w = _rand_fn(calc_grid, rng)
        y = _rand_fn(calc_grid, rng)
        lhs_fn = apply_inverse_power(calc_eig, theta, w)
        lam = calc_eig.eigenvalues
        cw = calc_eig.to_coefficients(lhs_fn.values)
        cy = calc_eig.to_coefficients(y.values)
        lhs = float(np.sum(lam**theta * cw * cy))
        rhs = q.inner(w, apply_power(calc_eig, theta, y))
        assert lhs == pytest.approx(rhs, abs=1e-10 * max(1.0, abs(rhs)))


def test_etheta_norm_zero_is_l2(calc_eig, calc_grid):
    rng = np.random.default_rng(5)
    u = _rand_fn(calc_grid, rng)
    assert etheta_norm(calc_eig, 0.0, u) == pytest.approx(
        calc_grid.quadrature().lp_norm(u, 2.0), abs=1e-12
    )


def test_etheta_norm_single_mode(calc_eig):
    u = calc_eig.mode(4)
    lam5 = calc_eig.eigenvalues[4]
    assert etheta_norm(calc_eig, 1.4, u) == pytest.approx(lam5**0.7, rel=1e-12)


def test_etheta_norm_cross_path(calc_eig, calc_grid):
    rng = np.random.default_rng(6)
    u = _rand_fn(calc_grid, rng)
    q = calc_grid.quadrature()
    for theta in (0.6, 1.7):
        direct = etheta_norm(calc_eig, theta, u)
        other = q.lp_norm(apply_power(calc_eig, theta, u), 2.0)
        assert direct == pytest.approx(other, abs=1e-10)


def test_L_eigenspaces(calc_eig, calc_grid):
    theta = 0.8
    lam = calc_eig.eigenvalues
    rng = np.random.default_rng(7)
    c = rng.standard_normal(calc_eig.n)
    u = calc_eig.from_coefficients(c)
    v_plus = calc_eig.from_coefficients(lam ** (theta - 1.0) * c)
    z_plus = ProductElement(GridFunction(calc_grid, u), GridFunction(calc_grid, v_plus))
    out = apply_L(calc_eig, theta, z_plus)
    assert np.abs(out.u.values - z_plus.u.values).max() < 1e-10
    assert np.abs(out.v.values - z_plus.v.values).max() < 1e-10
    z_minus = ProductElement(GridFunction(calc_grid, u), GridFunction(calc_grid, -v_plus))
    out_m = apply_L(calc_eig, theta, z_minus)
    assert np.abs(out_m.u.values + z_minus.u.values).max() < 1e-10
    assert np.abs(out_m.v.values + z_minus.v.values).max() < 1e-10


def test_L_involution(calc_eig, calc_grid):
    rng = np.random.default_rng(8)
    for theta in (0.5, 1.0, 1.5):
        z = random_pair(calc_grid, rng)
        zz = apply_L(calc_eig, theta, apply_L(calc_eig, theta, z))
        assert np.abs(zz.u.values - z.u.values).max() < 1e-10
        assert np.abs(zz.v.values - z.v.values).max() < 1e-10


def test_projections_sum_exact(calc_eig, calc_grid):
    rng = np.random.default_rng(9)
    z = random_pair(calc_grid, rng)
    zp, zm = project_pm(calc_eig, 0.7, z)
    scale = np.abs(z.u.values).max() + np.abs(z.v.values).max()
    assert np.abs(zp.u.values + zm.u.values - z.u.values).max() <= 1e-14 * scale
    assert np.abs(zp.v.values + zm.v.values - z.v.values).max() <= 1e-14 * scale


def test_projections_idempotent_orthogonal(calc_eig, calc_grid):
    rng = np.random.default_rng(10)
    theta = 1.3
    z = random_pair(calc_grid, rng)
    zp, zm = project_pm(calc_eig, theta, z)
    zpp, zpm = project_pm(calc_eig, theta, zp)
    assert np.abs(zpp.u.values - zp.u.values).max() < 1e-10
    assert np.abs(zpm.u.values).max() < 1e-10
    assert abs(e_inner(calc_eig, theta, zp, zm)) < 1e-9 * max(1.0, e_norm(calc_eig, theta, z) ** 2)


def test_projection_eigenspace_member(calc_eig, calc_grid):
    theta = 0.9
    lam = calc_eig.eigenvalues
    c = np.zeros(calc_eig.n)
    c[3] = 2.0
    u = calc_eig.from_coefficients(c)
    v = calc_eig.from_coefficients(lam ** (theta - 1.0) * c)
    z = ProductElement(GridFunction(calc_grid, u), GridFunction(calc_grid, v))
    zp, zm = project_pm(calc_eig, theta, z)
    assert np.abs(zp.u.values - z.u.values).max() < 1e-10
    assert np.abs(zm.u.values).max() < 1e-10
    assert np.abs(zm.v.values).max() < 1e-10


def test_projection_of_pure_u_component(calc_eig, calc_grid):
    theta = 0.7
    rng = np.random.default_rng(11)
    u = _rand_fn(calc_grid, rng)
    z = ProductElement(u, GridFunction.zeros(calc_grid))
    zp, _ = project_pm(calc_eig, theta, z)
    lam = calc_eig.eigenvalues
    expected_v = 0.5 * calc_eig.from_coefficients(
        lam ** (theta - 1.0) * calc_eig.to_coefficients(u.values)
    )
    assert np.abs(zp.u.values - 0.5 * u.values).max() < 1e-12
    assert np.abs(zp.v.values - expected_v).max() < 1e-10


def test_L_equals_projection_difference(calc_eig, calc_grid):
    rng = np.random.default_rng(12)
    theta = 1.1
    z = random_pair(calc_grid, rng)
    lz = apply_L(calc_eig, theta, z)
    zp, zm = project_pm(calc_eig, theta, z)
    assert np.abs(lz.u.values - (zp.u.values - zm.u.values)).max() < 1e-10
    assert np.abs(lz.v.values - (zp.v.values - zm.v.values)).max() < 1e-10


def test_quadratic_form_modes(calc_eig, calc_grid):
    phi1 = calc_eig.mode(0)
    phi2 = calc_eig.mode(1)
    z11 = ProductElement(phi1, phi1)
    z12 = ProductElement(phi1, phi2)
    assert quadratic_form(calc_eig, 1.0, z11) == pytest.approx(
        calc_eig.eigenvalues[0], rel=1e-12
    )
    assert abs(quadratic_form(calc_eig, 1.0, z12)) < 1e-12 * calc_eig.eigenvalues[1]


def test_quadratic_form_splits(calc_eig, calc_grid):
    rng = np.random.default_rng(13)
    theta = 0.6
    z = random_pair(calc_grid, rng)
    zp, zm = project_pm(calc_eig, theta, z)
    q_total = quadratic_form(calc_eig, theta, z)
    q_plus = quadratic_form(calc_eig, theta, zp)
    q_minus = quadratic_form(calc_eig, theta, zm)
    scale = max(1.0, abs(q_plus), abs(q_minus))
    assert q_total == pytest.approx(q_plus + q_minus, abs=1e-9 * scale)
    assert q_plus >= -1e-12 * scale
    assert q_minus <= 1e-12 * scale


def test_norm_identity_half_norm_squared(calc_eig, calc_grid):
    rng = np.random.default_rng(14)
    for theta in (0.5, 1.0, 1.4):
        z = random_pair(calc_grid, rng)
        zp, zm = project_pm(calc_eig, theta, z)
        lhs = 0.5 * e_norm(calc_eig, theta, z) ** 2
        rhs = quadratic_form(calc_eig, theta, zp) - quadratic_form(calc_eig, theta, zm)
        assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, lhs))


def test_embedding_constant_stable_under_refinement():
    # discrete embedding L^p <- E^theta: the best constant is monitored
    # across refinements rather than pinned
    ratios = []
    p, theta, s = 3.0, 1.0, 0.4
    for n in (32, 64, 128):
        grid = make_grid(1, (0.0, 1.0), n)
        eig = eig_decompose(assemble_integral_fraclap(grid, s))
        q = grid.quadrature()
        rng = np.random.default_rng(15)
        worst = 0.0
        for _ in range(20):
            u = _rand_fn(grid, rng)
            worst = max(worst, q.lp_norm(u, p) / etheta_norm(eig, theta, u))
        ratios.append(worst)
    assert max(ratios) <= 2.0 * min(ratios)
