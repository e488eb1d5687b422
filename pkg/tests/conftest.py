"""Shared fixtures: the expensive assemblies are session-scoped."""

import pytest

from fracle.grid import make_grid
from fracle.hamiltonian import prototype_lane_emden
from fracle.operators import assemble_integral_fraclap, assemble_local
from fracle.spectral import eig_decompose
from fracle.variational import EnergyFunctional


@pytest.fixture(scope="session")
def unit_grid_511():
    return make_grid(1, (0.0, 1.0), 511)


@pytest.fixture(scope="session")
def local_op_511(unit_grid_511):
    return assemble_local(unit_grid_511)


@pytest.fixture(scope="session")
def local_eig_511(local_op_511):
    return eig_decompose(local_op_511)


@pytest.fixture(scope="session")
def calc_grid():
    # moderate size for the operator-algebra property tests
    return make_grid(1, (0.0, 1.0), 127)


@pytest.fixture(scope="session")
def calc_eig(calc_grid):
    return eig_decompose(assemble_integral_fraclap(calc_grid, 0.6))


@pytest.fixture(scope="session")
def lane_emden_setup():
    """Grid (-1, 1) with 255 nodes, integral fractional s = 1/4, two-power
    Hamiltonian with matching cubic exponents, theta = 1."""
    grid = make_grid(1, (-1.0, 1.0), 255)
    op = assemble_integral_fraclap(grid, 0.25)
    eig = eig_decompose(op)
    functional = EnergyFunctional(
        eigensystem=eig,
        theta=1.0,
        hamiltonian=prototype_lane_emden(3.0, 3.0),
        quadrature=grid.quadrature(),
        operator=op,
        grid=grid,
    )
    return functional


def random_grid_function(grid, rng, scale=1.0):
    from fracle.grid import GridFunction

    return GridFunction(grid, scale * rng.standard_normal(grid.n_total))


def random_pair(grid, rng, scale=1.0):
    from fracle.spectral import ProductElement

    return ProductElement(
        random_grid_function(grid, rng, scale), random_grid_function(grid, rng, scale)
    )
