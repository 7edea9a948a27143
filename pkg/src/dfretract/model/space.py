"""Immutable container for a discretized Dirac-Fock problem."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from ..exceptions import DimensionMismatch, DomainError

__all__ = ["ModelSpace", "DEFAULT_ALPHA"]

DEFAULT_ALPHA = 1.0 / 137.0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """Finite-dimensional Dirac-Fock model in an orthonormal basis.

    Parameters
    ----------
    D : ndarray, shape (n, n)
        Hermitian matrix of the free Dirac operator (units hbar = m = c = 1).
    V : ndarray, shape (n, n)
        Hermitian matrix of the external potential (already multiplied by alpha).
    factors : ndarray, shape (rank, n, n)
        Hermitian factors ``L_a`` of the repulsion tensor,
        ``(ij|kl) = sum_a L_a[i, j] * conj(L_a[l, k])``.
    alpha : float
        Coupling constant.
    Z : float
        Total nuclear charge.
    q : float
        Particle-number budget.
    basis_meta : dict
        Free-form description of how the model was built.

    Notes
    -----
    Spectral functions of ``D`` (``|D|``, ``|D|^{1/2}``, ``D^{-1}``) are
    obtained by functional calculus on the matrix itself and cached.
    """

    D: np.ndarray
    V: np.ndarray
    factors: np.ndarray
    alpha: float = DEFAULT_ALPHA
    Z: float = 0.0
    q: float = 1.0
    basis_meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        D = np.asarray(self.D)
        V = np.asarray(self.V)
        L = np.asarray(self.factors)
        if L.ndim == 2:
            L = L[None]
        n = D.shape[0]
        if D.shape != (n, n) or V.shape != (n, n):
            raise DimensionMismatch(f"D {D.shape} and V {V.shape} must be square of equal size")
        if L.size == 0:
            L = np.zeros((0, n, n), dtype=D.dtype)
        if L.shape[1:] != (n, n):
            raise DimensionMismatch(f"factors of shape {L.shape} do not match dimension {n}")
        dtype = np.result_type(D, V, L, np.float64)
        for name, a in (("D", D), ("V", V)):
            if not np.allclose(a, a.conj().T, atol=1e-12, rtol=0):
                raise DomainError(f"{name} is not Hermitian")
        if L.shape[0] and not np.allclose(L, np.conj(np.swapaxes(L, 1, 2)), atol=1e-12, rtol=0):
            raise DomainError("interaction factors must be Hermitian")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.Z < 0:
            raise DomainError(f"Z must be nonnegative, got {self.Z}")
        if not self.q > 0:
            raise DomainError(f"q must be positive, got {self.q}")
        object.__setattr__(self, "D", _frozen(D.astype(dtype)))
        object.__setattr__(self, "V", _frozen(V.astype(dtype)))
        object.__setattr__(self, "factors", _frozen(L.astype(dtype)))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "Z", float(self.Z))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "basis_meta", dict(self.basis_meta))

    @property
    def dim(self) -> int:
        return self.D.shape[0]

    @property
    def rank(self) -> int:
        return self.factors.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.D)

    @cached_property
    def _d_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.D)

    def _d_function(self, f) -> np.ndarray:
        w, U = self._d_spectrum
        return _frozen((U * f(w)) @ U.conj().T)

    @cached_property
    def abs_D(self) -> np.ndarray:
        """``|D|``."""
        return self._d_function(np.abs)

    @cached_property
    def weight_half(self) -> np.ndarray:
        """``|D|^{1/2}``, the weight of the X-norm."""
        return self._d_function(lambda w: np.sqrt(np.abs(w)))

    @cached_property
    def weight_half_inv(self) -> np.ndarray:
        """``|D|^{-1/2}``."""
        return self._d_function(lambda w: np.abs(w) ** -0.5)

    @cached_property
    def D_inv(self) -> np.ndarray:
        return self._d_function(lambda w: 1.0 / w)

    @cached_property
    def free_projector(self) -> np.ndarray:
        """Spectral projector of ``D`` on ``(0, inf)``."""
        return self._d_function(lambda w: (w > 0).astype(float))

    def abs_D_power(self, s: float) -> np.ndarray:
        """``|D|^s`` for any real ``s``."""
        return self._d_function(lambda w: np.abs(w) ** s)

    @property
    def d_eigenvalues(self) -> np.ndarray:
        return self._d_spectrum[0]

    @cached_property
    def checksum(self) -> str:
        """Hex digest of the numerical content, used in run manifests."""
        from .io import model_digest

        return model_digest(self)

    def with_q(self, q: float) -> "ModelSpace":
        """Same discretization with another particle-number budget."""
        return dataclasses.replace(self, q=q)

    def check_matrix(self, a: np.ndarray, name: str = "matrix") -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"{name} has shape {a.shape}, model dimension is {self.dim}")
        return a
