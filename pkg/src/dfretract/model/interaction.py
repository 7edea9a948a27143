"""Direct and exchange contractions of the factored repulsion tensor."""

from __future__ import annotations

import numpy as np

from ..exceptions import DimensionMismatch
from .space import ModelSpace

__all__ = ["contract_direct", "contract_exchange", "repulsion_tensor", "factor_traces"]


def _check(m: ModelSpace, gamma) -> np.ndarray:
    g = np.asarray(gamma)
    if g.shape != (m.dim, m.dim):
        raise DimensionMismatch(f"density of shape {g.shape} does not match model dimension {m.dim}")
    return g


def factor_traces(m: ModelSpace, gamma) -> np.ndarray:
    """``tr(L_a gamma)`` for every factor."""
    g = _check(m, gamma)
    return np.einsum("aij,ji->a", m.factors, g)


def contract_direct(m: ModelSpace, gamma) -> np.ndarray:
    """Hartree term ``J(gamma) = sum_a L_a tr(L_a gamma)``."""
    g = _check(m, gamma)
    if m.rank == 0:
        return np.zeros_like(g, dtype=np.result_type(g, m.D))
    t = factor_traces(m, g)
    if not m.is_complex and not np.iscomplexobj(g):
        t = t.real
    J = np.tensordot(t, m.factors, axes=1)
    return 0.5 * (J + J.conj().T)


def contract_exchange(m: ModelSpace, gamma) -> np.ndarray:
    """Exchange term ``K(gamma) = sum_a L_a gamma L_a``."""
    g = _check(m, gamma)
    if m.rank == 0:
        return np.zeros_like(g, dtype=np.result_type(g, m.D))
    L = m.factors
    r, n, _ = L.shape
    Lg = np.matmul(L, g)
    # sum over (a, j) as one BLAS product
    K = Lg.transpose(1, 0, 2).reshape(n, r * n) @ L.reshape(r * n, n)
    return 0.5 * (K + K.conj().T)


def repulsion_tensor(m: ModelSpace) -> np.ndarray:
    """Dense four-index tensor ``(ij|kl)``; only sensible for small models."""
    L = m.factors
    return np.einsum("aij,alk->ijkl", L, L.conj())
