"""Dirac-Fock energy and the projection map ``gamma -> P+ gamma P+``."""

from __future__ import annotations

import numpy as np

from .._validation import as_square, check_density, hermitize
from ..model.interaction import contract_direct, contract_exchange
from ..model.space import ModelSpace
from .meanfield import mean_field, mean_field_operator

__all__ = ["energy", "energy_shifted", "energy_gradient", "t_map", "t_map_with_field", "quadratic_part"]


def _real_trace(a: np.ndarray, b: np.ndarray) -> float:
    """``Re tr(a b)`` without forming the product."""
    return float(np.real(np.sum(a * b.T)))


def quadratic_part(m: ModelSpace, gamma) -> float:
    """``(1/2) tr(W_gamma gamma)`` without the coupling constant."""
    g = as_square(gamma, m.dim, "gamma")
    if m.rank == 0:
        return 0.0
    return 0.5 * (_real_trace(contract_direct(m, g), g) - _real_trace(contract_exchange(m, g), g))


def energy(m: ModelSpace, gamma) -> float:
    """``tr((D + V) gamma) + (alpha/2) tr(W_gamma gamma)``."""
    g = as_square(gamma, m.dim, "gamma")
    return _real_trace(m.D + m.V, g) + m.alpha * quadratic_part(m, g)


def energy_shifted(m: ModelSpace, gamma) -> float:
    """Energy minus particle number."""
    g = as_square(gamma, m.dim, "gamma")
    return energy(m, g) - float(np.trace(g).real)


def energy_gradient(m: ModelSpace, gamma) -> np.ndarray:
    """Matrix ``G`` with ``dE(gamma) h = tr(G h)``; this is the mean-field operator."""
    return mean_field_operator(m, gamma)


def t_map_with_field(m: ModelSpace, gamma, check: bool = False, q: float | None = None):
    """``(P+ gamma P+, mean field at gamma)``."""
    g = check_density(gamma, m.dim, m.q if q is None else q) if check else as_square(gamma, m.dim, "gamma")
    mf = mean_field(m, g)
    P = mf.pplus
    return hermitize(P @ g @ P), mf


def t_map(m: ModelSpace, gamma, check: bool = True) -> np.ndarray:
    """``T(gamma) = P+_gamma gamma P+_gamma`` with ``P+`` the positive projector of the mean field."""
    return t_map_with_field(m, gamma, check=check)[0]
