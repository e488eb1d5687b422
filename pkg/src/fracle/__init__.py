"""Numerical toolkit for fractional Lane-Emden Hamiltonian systems."""

from .exponents import (
    ExponentParams,
    ThetaWindow,
    check_pq0,
    check_pq1,
    corollary_region,
    critical_exponent,
    sample_region,
    theta_window,
)
from .grid import DomainGrid, GridFunction, Quadrature, make_grid
from .hamiltonian import (
    HamiltonianSpec,
    audit_growth,
    hamiltonian_from_name,
    prototype_lane_emden,
    prototype_power,
)
from .operators import (
    OperatorMatrix,
    OperatorSpec,
    PositivityViolatedError,
    assemble_generalized,
    assemble_integral_fraclap,
    assemble_local,
    assemble_spectral_fraclap,
    fourier_constant,
)
from .solver import (
    InitSpec,
    SolverConfig,
    SolveReport,
    palais_smale_trace,
    solve,
    solve_indefinite_flow,
    solve_newton_coupled,
    solve_reduction,
)
from .spectral import (
    EigenSystem,
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
from .variational import (
    EnergyFunctional,
    LinkingGeometry,
    ResidualReport,
    distributional_residual,
    duality_bound_check,
    energy,
    gradient,
    linking_sets,
    make_z_plus,
    pick_munu,
    residual_report,
    theta_weak_residual,
    verify_I3,
    verify_I4_I5,
    weak_residual,
)

__version__ = "0.1.0"
