"""Exact dynamical invariants for two coupled time-dependent oscillators.

Scenario construction under the invariant-existence constraints, auxiliary
(Ermakov-Pinney) integration, invariance verification in classical,
coefficient-ODE and Fock-matrix form, symplectic decoupling onto two
independent fixed-frequency oscillators, eigenvalue lattices and
eigenfunctions.
"""

from ._kernels import backend_name
from .errors import (
    DomainError,
    GridTooCoarseError,
    IntegrationError,
    NonPositiveRhoError,
    NotPositiveDefiniteError,
    OscInvError,
    ScheduleParseError,
)
from .model import (
    Constants,
    ErmakovSolution,
    Scenario,
    ValidationReport,
    build_forward_scenario,
    build_inverse_scenario,
    coupling_schedule,
    equilibrium_rho,
    g_function,
    inverse_ermakov_omega_sq,
    modified_frequency_sq,
    solve_ermakov,
    validate_scenario,
)
from .invariant import (
    InvariantCoefficients,
    PhaseState,
    Trajectory,
    classical_rhs,
    coefficient_ode_residuals,
    coefficients_at,
    conserved_coupling,
    integrate_classical,
    invariant_along_trajectory,
    invariant_value,
)
from .transforms import (
    DecoupledSpectrumData,
    QuadraticForm,
    SymplecticMap,
    decouple,
    decoupling_maps,
    dilation_map,
    rotation_angle,
    rotation_map,
    shear_map,
    to_quadratic_form,
    transform,
)
from .fock import (
    FockBasisSpec,
    FockOperator,
    basis_for_scenario,
    hamiltonian_matrix,
    invariant_matrix,
    ladder_matrices,
    lvn_matrix_residual,
    mode_operators,
    spectrum_check,
)
from .eigenfun import (
    FockLabel,
    GridSpec,
    eigen_residual,
    eigenfunction,
    gram_matrix,
    grid_for_scenario,
    rotated_coordinates,
    sho_eigenfunction,
)
from .schedules import ExprSchedule, SampledSchedule
from .scenario_io import load_scenario, save_scenario, scenario_from_dict, scenario_to_dict

__version__ = "0.1.0"
