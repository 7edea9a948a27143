"""Random density matrices for property checks and diagnostics."""

from __future__ import annotations

import numpy as np

from ..exceptions import DomainError
from ..model.space import ModelSpace

__all__ = ["random_unitary", "random_density", "random_hermitian", "occupation_density"]


def random_unitary(rng: np.random.Generator, n: int, complex_: bool = True) -> np.ndarray:
    A = rng.standard_normal((n, n))
    if complex_:
        A = A + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def occupation_density(U: np.ndarray, occ: np.ndarray) -> np.ndarray:
    """``U diag(occ) U^*`` restricted to the first ``len(occ)`` columns."""
    Uk = U[:, : occ.size]
    g = (Uk * occ) @ Uk.conj().T
    return 0.5 * (g + g.conj().T)


def random_density(
    m: ModelSpace,
    rng: np.random.Generator,
    trace: float | None = None,
    rank: int | None = None,
    basis: np.ndarray | None = None,
) -> np.ndarray:
    """Random ``gamma`` with ``0 <= gamma <= 1`` and ``tr gamma <= trace`` (default ``q``).

    Occupations are uniform on ``[0, 1]`` and rescaled when their sum exceeds
    the budget.  Eigenvectors come from ``basis`` (first ``rank`` columns) or
    from a Haar-random unitary.
    """
    n = m.dim
    budget = m.q if trace is None else float(trace)
    if budget < 0:
        raise DomainError("trace budget must be nonnegative")
    k = n if rank is None else int(rank)
    if not 0 <= k <= n:
        raise DomainError(f"rank must lie in [0, {n}]")
    U = random_unitary(rng, n, m.is_complex) if basis is None else np.asarray(basis)
    occ = rng.random(k)
    s = occ.sum()
    if s > budget and s > 0:
        occ *= budget / s
    g = occupation_density(U, occ)
    return g if m.is_complex else g.real


def random_hermitian(m: ModelSpace, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian direction normalized to unit Frobenius norm times ``scale``."""
    n = m.dim
    A = rng.standard_normal((n, n))
    if m.is_complex:
        A = A + 1j * rng.standard_normal((n, n))
    H = 0.5 * (A + A.conj().T)
    return scale * H / np.linalg.norm(H)
