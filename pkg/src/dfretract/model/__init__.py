"""Discretized Dirac-Fock model spaces: builders, interaction, persistence."""

from .interaction import contract_direct, contract_exchange, factor_traces, repulsion_tensor
from .io import load_model, model_digest, save_model
from .radial import build_radial_hydrogenic, dirac_coulomb_ground_energy, kato_herbst_matrices
from .space import DEFAULT_ALPHA, ModelSpace
from .synthetic import build_synthetic

__all__ = [
    "DEFAULT_ALPHA",
    "ModelSpace",
    "build_radial_hydrogenic",
    "build_synthetic",
    "contract_direct",
    "contract_exchange",
    "dirac_coulomb_ground_energy",
    "factor_traces",
    "kato_herbst_matrices",
    "load_model",
    "model_digest",
    "repulsion_tensor",
    "save_model",
]
