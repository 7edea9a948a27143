"""Energy, mean field, norms, explicit constants and estimate checks."""

from .constants import (
    KAPPA_MODES,
    ConstantsReport,
    FeasibilityRow,
    constants,
    constants_from_parameters,
    feasibility_row,
    potential_ratio,
)
from .density import random_density, random_hermitian, random_unitary
from .energy import energy, energy_gradient, energy_shifted, quadratic_part, t_map, t_map_with_field
from .estimates import (
    BoundCheck,
    HardyReport,
    HardyRow,
    d_gamma_d_bound_check,
    hardy_checks,
    kato_herbst_check,
    main_estimate_terms,
    sublevel_bound,
)
from .meanfield import MeanField, interaction_potential, mean_field, mean_field_operator
from .norms import half_weighted_trace_norm, op_norm, trace_norm, x_norm, y_norm

__all__ = [
    "KAPPA_MODES",
    "BoundCheck",
    "ConstantsReport",
    "FeasibilityRow",
    "HardyReport",
    "HardyRow",
    "MeanField",
    "constants",
    "constants_from_parameters",
    "d_gamma_d_bound_check",
    "energy",
    "energy_gradient",
    "energy_shifted",
    "feasibility_row",
    "half_weighted_trace_norm",
    "hardy_checks",
    "interaction_potential",
    "kato_herbst_check",
    "main_estimate_terms",
    "mean_field",
    "mean_field_operator",
    "op_norm",
    "potential_ratio",
    "quadratic_part",
    "random_density",
    "random_hermitian",
    "random_unitary",
    "sublevel_bound",
    "t_map",
    "t_map_with_field",
    "trace_norm",
    "x_norm",
    "y_norm",
]
