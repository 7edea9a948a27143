"""Input checks shared by the public functions."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, DomainError, PreconditionViolated

HERMITIAN_TOL = 1e-12
DENSITY_TOL = 1e-10


def as_square(a, n: int | None = None, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be a square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise DimensionMismatch(f"{name} has dimension {a.shape[0]}, expected {n}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a


def check_hermitian(a, n: int | None = None, name: str = "matrix", tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``a`` after checking it is Hermitian up to ``tol`` relative to its size."""
    a = as_square(a, n, name)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.conj().T).max(initial=0.0) > tol * scale:
        raise DomainError(f"{name} is not Hermitian")
    return a


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def check_density(gamma, n: int, q: float | None = None, tol: float = DENSITY_TOL, name: str = "gamma") -> np.ndarray:
    """Check ``0 <= gamma <= 1`` and ``tr gamma <= q`` to tolerance ``tol``."""
    g = check_hermitian(gamma, n, name)
    w = np.linalg.eigvalsh(hermitize(g))
    if w.size and (w[0] < -tol or w[-1] > 1 + tol):
        raise PreconditionViolated(
            f"{name} has eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}], outside [0, 1]"
        )
    if q is not None and float(np.trace(g).real) > q + tol:
        raise PreconditionViolated(f"tr {name} = {np.trace(g).real:.12g} exceeds q = {q}")
    return g
