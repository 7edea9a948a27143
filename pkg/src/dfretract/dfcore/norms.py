"""Weighted trace and operator norms on the discrete space."""

from __future__ import annotations

import numpy as np

from .._validation import as_square
from ..model.space import ModelSpace

__all__ = ["trace_norm", "x_norm", "y_norm", "half_weighted_trace_norm", "op_norm"]


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values; uses the eigenvalues when ``a`` is Hermitian."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if np.array_equal(a, a.conj().T):
        return float(np.abs(np.linalg.eigvalsh(a)).sum())
    return float(np.linalg.svd(a, compute_uv=False).sum())


def op_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def x_norm(m: ModelSpace, gamma) -> float:
    """``|| |D|^{1/2} gamma |D|^{1/2} ||_1``."""
    g = as_square(gamma, m.dim, "gamma")
    W = m.weight_half
    a = W @ g @ W
    if np.allclose(g, g.conj().T, rtol=0, atol=0):
        a = 0.5 * (a + a.conj().T)
    return trace_norm(a)


def y_norm(m: ModelSpace, Q) -> float:
    """Operator norm of ``|D|^{1/2} Q``."""
    Q = as_square(Q, m.dim, "Q")
    return op_norm(m.weight_half @ Q)


def half_weighted_trace_norm(m: ModelSpace, gamma) -> float:
    """``|| gamma |D|^{1/2} ||_1``, the first term of the invariant-set functional."""
    g = as_square(gamma, m.dim, "gamma")
    return float(np.linalg.svd(g @ m.weight_half, compute_uv=False).sum())
