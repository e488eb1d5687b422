import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import eigh
from scipy.special import gamma

from fracle.grid import make_grid
from fracle.operators import (
    OperatorSpec,
    PositivityViolatedError,
    assemble_generalized,
    assemble_integral_fraclap,
    assemble_local,
    assemble_spectral_fraclap,
    fourier_constant,
)
from fracle.spectral import eig_decompose


def gagliardo_pairing_oracle(grid, s, u_vals, phi_vals):
    """Direct numerical evaluation of the singular double integral.

    Reduces the plane integral to the difference variable: the inner
    correlation integral is evaluated on a fine 1D grid from piecewise
    linear interpolants with zero extension, the outer integral by
    adaptive quadrature plus the exact constant tail once the supports
    separate.
    """
    a, b = grid.extent[0]
    nodes = grid.coords()
    knots = np.concatenate([[a], nodes, [b]])
    u_knots = np.concatenate([[0.0], u_vals, [0.0]])
    p_knots = np.concatenate([[0.0], phi_vals, [0.0]])
    span = b - a
    xf = np.linspace(a - 1.5 * span, b + 1.5 * span, 60_001)

    def interp(vals, x):
        return np.interp(x, knots, vals, left=0.0, right=0.0)

    u_f = interp(u_knots, xf)
    p_f = interp(p_knots, xf)

    def rho(z):
        du = u_f - interp(u_knots, xf - z)
        dp = p_f - interp(p_knots, xf - z)
        return np.trapezoid(du * dp, xf)

    cut = 1.25 * span
    val, _ = quad(
        lambda z: rho(z) * z ** (-1 - 2 * s),
        0.0,
        cut,
        points=list(grid.spacing[0] * np.arange(1, 6)),
        limit=300,
    )
    rho_inf = 2.0 * np.trapezoid(u_f * p_f, xf)
    tail = rho_inf * cut ** (-2 * s) / (2 * s)
    return val + tail


def test_two_node_matrix_symmetric_positive():
    g = make_grid(1, (0.0, 1.0), 2)
    for s in (0.2, 0.5, 0.8):
        op = assemble_integral_fraclap(g, s)
        assert op.entries.shape == (2, 2)
        assert op.entries[0, 0] > 0 and op.entries[1, 1] > 0
        assert op.entries[0, 1] == pytest.approx(op.entries[1, 0], abs=0)


def test_integral_backend_rejects_bad_input():
    g1 = make_grid(1, (0.0, 1.0), 4)
    with pytest.raises(ValueError):
        assemble_integral_fraclap(g1, 1.0)
    g2 = make_grid(2, ((0.0, 1.0), (0.0, 1.0)), (3, 3))
    with pytest.raises(ValueError):
        assemble_integral_fraclap(g2, 0.5)


def test_diagonal_half_order_value():
    # semi-analytic value: at s = 1/2 the lattice self-pairing is 4 ln 2,
    # and the 1 - 2s spacing power drops out
    for n in (8, 31):
        g = make_grid(1, (-1.0, 1.0), n)
        op = assemble_integral_fraclap(g, 0.5)
        assert np.allclose(np.diag(op.entries), 4.0 * np.log(2.0), rtol=1e-12)


def test_entries_continuous_in_s():
    g = make_grid(1, (-1.0, 1.0), 16)
    prev = None
    for s in (0.25, 0.5, 0.75):
        op = assemble_integral_fraclap(g, s)
        assert np.all(np.isfinite(op.entries))
        lam = eig_decompose(op).eigenvalues
        assert lam[0] > 0
        if prev is not None:
            # entries change smoothly; no wild jumps between nearby orders
            assert np.abs(op.entries - prev).max() < 10 * np.abs(prev).max()
        prev = op.entries


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_gagliardo_form_matches_double_integral_oracle():
    g = make_grid(1, (0.0, 1.0), 8)
    rng = np.random.default_rng(5)
    u = rng.standard_normal(8)
    phi = rng.standard_normal(8)
    for s in (0.3, 0.5, 0.7):
        op = assemble_integral_fraclap(g, s)
        matrix_val = float(u @ op.entries @ phi)
        oracle = gagliardo_pairing_oracle(g, s, u, phi)
        assert matrix_val == pytest.approx(oracle, rel=1e-2)


def test_fourier_identity_for_gaussian():
    # constant-free seminorm of a discretized Gaussian against the
    # multiplier form with the separately computed constant
    g = make_grid(1, (-12.0, 12.0), 1023)
    x = g.coords()
    u = np.exp(-0.5 * x**2)
    for s in (0.35, 0.5):
        op = assemble_integral_fraclap(g, s)
        lhs = float(u @ op.entries @ u)
        # |F u|^2 integrates in closed form for the Gaussian
        spectral = gamma(s + 0.5) * (4.0 * np.pi**2) ** (-s)
        rhs = 0.5 * fourier_constant(1, s) * spectral
        assert lhs == pytest.approx(rhs, rel=2e-2)


def test_spectral_power_one_is_local(unit_grid_511, local_op_511):
    sp = assemble_spectral_fraclap(unit_grid_511, 1.0)
    scale = np.abs(local_op_511.entries).max()
    assert np.abs(sp.entries - local_op_511.entries).max() < 1e-9 * scale


def test_spectral_half_eigenvalues(unit_grid_511):
    sp = assemble_spectral_fraclap(unit_grid_511, 0.5)
    lam = eig_decompose(sp).eigenvalues
    k = np.arange(1, 11)
    assert np.max(np.abs(lam[:10] - k * np.pi) / (k * np.pi)) < 1e-3


def test_spectral_preserves_eigenvectors(unit_grid_511, local_eig_511):
    sp = assemble_spectral_fraclap(unit_grid_511, 0.3)
    eig_s = eig_decompose(sp)
    assert np.abs(eig_s.eigenvectors[:, :20] - local_eig_511.eigenvectors[:, :20]).max() < 1e-7
    assert np.allclose(eig_s.eigenvalues, local_eig_511.eigenvalues**0.3, rtol=1e-10)


def test_spectral_2d_rectangle_eigenvalues():
    # separable oracle: lambda_{jk} ~ (j pi / Lx)^2 + (k pi / Ly)^2
    g = make_grid(2, ((0.0, 1.0), (0.0, 2.0)), (31, 63))
    lam = eig_decompose(assemble_local(g)).eigenvalues
    exact = sorted(
        (j * np.pi) ** 2 + (k * np.pi / 2.0) ** 2
        for j in range(1, 6)
        for k in range(1, 10)
    )[:8]
    assert np.allclose(lam[:8], exact, rtol=1e-2)
    lam_half = eig_decompose(assemble_spectral_fraclap(g, 0.5)).eigenvalues
    assert np.allclose(lam_half, np.sqrt(lam), rtol=1e-10)


def test_generalized_sum_of_local_is_local():
    g = make_grid(1, (0.0, 1.0), 24)
    plain = assemble_local(g)
    summed = assemble_generalized(g, OperatorSpec(kind="sum", parts=(OperatorSpec(kind="local"),)))
    assert np.array_equal(summed.entries, plain.entries)


def _triangle_bump(radius):
    def j(z):
        return np.clip(1.0 - np.abs(z) / radius, 0.0, None) / radius

    return j


def test_local_plus_convolution_positive_definite():
    g = make_grid(1, (0.0, 1.0), 24)
    spec = OperatorSpec(
        kind="sum",
        parts=(
            OperatorSpec(kind="local"),
            OperatorSpec(kind="convolution", j_func=_triangle_bump(0.3), j_support=0.3),
        ),
    )
    op = assemble_generalized(g, spec)
    assert np.abs(op.entries - op.entries.T).max() < 1e-12 * np.abs(op.entries).max()
    sw = np.sqrt(op.mass)
    lam = eigh(op.entries / sw[:, None] / sw[None, :], eigvals_only=True)
    assert lam[0] > 0
    # the perturbation is negative semidefinite: it can only lower the spectrum
    lam_local = eig_decompose(assemble_local(g)).eigenvalues
    assert lam[0] <= lam_local[0] + 1e-9


def test_generalized_potential_below_lambda1_rejected():
    g = make_grid(1, (0.0, 1.0), 24)
    lam1 = eig_decompose(assemble_local(g)).eigenvalues[0]
    spec = OperatorSpec(
        kind="sum",
        parts=(OperatorSpec(kind="local"),),
        potential=lambda x: np.full_like(x, -(lam1 + 1.0)),
    )
    with pytest.raises(PositivityViolatedError) as err:
        assemble_generalized(g, spec)
    assert err.value.lambda_min <= 0

    # a mild potential keeps positivity
    ok = assemble_generalized(
        g,
        OperatorSpec(
            kind="sum",
            parts=(OperatorSpec(kind="local"),),
            potential=lambda x: -0.5 * lam1 * np.ones_like(x),
        ),
    )
    assert eig_decompose(ok).eigenvalues[0] > 0


def test_kernel_backend_consistent_with_toeplitz_route():
    g = make_grid(1, (0.0, 1.0), 10)
    s = 0.4
    kernel = lambda x, y: np.abs(x - y) ** (-(1 + 2 * s))
    op_k = assemble_generalized(g, OperatorSpec(kind="kernel", kernel=kernel, s=s))
    op_t = assemble_integral_fraclap(g, s)
    # kernel assembly includes the same 1/2-weighted form; agreement is limited
    # by its per-element quadrature
    rel = np.abs(op_k.entries - op_t.entries).max() / np.abs(op_t.entries).max()
    assert rel < 5e-2
    sw = np.sqrt(op_k.mass)
    lam = eigh(op_k.entries / sw[:, None] / sw[None, :], eigvals_only=True)
    assert lam[0] > 0


def test_convolution_profile_validation():
    with pytest.raises(ValueError):
        OperatorSpec(
            kind="convolution", j_func=lambda z: np.abs(z), j_support=0.3
        ).validate()


def test_fourier_constant_half():
    assert fourier_constant(1, 0.5) == pytest.approx(4.0 * np.pi**2, rel=5e-3)


def test_fourier_constant_positive():
    for n in (1, 2, 3, 5):
        for s in (0.1, 0.25, 0.5, 0.75, 0.9):
            assert fourier_constant(n, s) > 0.0


def test_fourier_constant_gamma_oracle():
    # independent closed form: 4 (2 pi)^{2s} Gamma(1 - 2s) cos(pi s) / (2s)
    for s in (0.25, 0.75):
        exact = 4.0 * (2 * np.pi) ** (2 * s) * gamma(1 - 2 * s) * np.cos(np.pi * s) / (2 * s)
        assert fourier_constant(1, s) == pytest.approx(exact, rel=5e-3)


def test_fourier_constant_rejects_bad_arguments():
    with pytest.raises(ValueError):
        fourier_constant(0, 0.5)
    with pytest.raises(ValueError):
        fourier_constant(1, 1.0)


def test_assembled_matrices_symmetric_and_positive():
    g = make_grid(1, (-1.0, 1.0), 32)
    for op in (
        assemble_integral_fraclap(g, 0.5),
        assemble_spectral_fraclap(g, 0.5),
        assemble_local(g),
    ):
        scale = np.abs(op.entries).max()
        assert np.abs(op.entries - op.entries.T).max() <= 1e-12 * scale
        assert eig_decompose(op).eigenvalues[0] > 0
