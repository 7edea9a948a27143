"""Admissible Dirac-Fock ground states in finite bases.

A state is admissible when it is invariant under projection onto the positive
spectral subspace of its own mean-field operator.  The retraction
:func:`theta` maps density matrices onto such states, and
:func:`solve_ground_state` minimizes the energy over them.
"""

__version__ = "0.1.0"

from .dfcore import constants, energy, energy_shifted, hardy_checks, mean_field
from .estimators import GroundStateSolver, Retraction
from .exceptions import DiracFockError
from .fixedpoint import FixConfig, error_bound, iterate_to_fix
from .groundstate import SolveConfig, SolveReport, binding_curve, euler_lagrange_residual, solve_ground_state
from .model import ModelSpace, build_radial_hydrogenic, build_synthetic, load_model, save_model
from .retraction import RetractionConfig, dtheta_fd, dtheta_propagated, theta

__all__ = [
    "__version__",
    "DiracFockError",
    "FixConfig",
    "GroundStateSolver",
    "ModelSpace",
    "Retraction",
    "RetractionConfig",
    "SolveConfig",
    "SolveReport",
    "binding_curve",
    "build_radial_hydrogenic",
    "build_synthetic",
    "constants",
    "dtheta_fd",
    "dtheta_propagated",
    "energy",
    "energy_shifted",
    "error_bound",
    "euler_lagrange_residual",
    "hardy_checks",
    "iterate_to_fix",
    "load_model",
    "mean_field",
    "save_model",
    "solve_ground_state",
    "theta",
]
