"""Mean-field operator and its spectral projectors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .._validation import as_square, hermitize
from ..exceptions import EigensolverFailure, ZeroEigenvalue
from ..model.interaction import contract_direct, contract_exchange
from ..model.space import ModelSpace

__all__ = [
    "MeanField",
    "mean_field",
    "mean_field_operator",
    "interaction_potential",
    "ZERO_EIGENVALUE_TOL",
    "DEGENERACY_TOL",
]

ZERO_EIGENVALUE_TOL = 1e-12
DEGENERACY_TOL = 1e-10


def interaction_potential(m: ModelSpace, gamma) -> np.ndarray:
    """``W_gamma = J(gamma) - K(gamma)``."""
    return contract_direct(m, gamma) - contract_exchange(m, gamma)


def mean_field_operator(m: ModelSpace, gamma) -> np.ndarray:
    """``D + V + alpha W_gamma``."""
    g = as_square(gamma, m.dim, "gamma")
    H = m.D + m.V
    if m.rank:
        H = H + m.alpha * interaction_potential(m, g)
    return hermitize(H)


def _canonical_phases(U: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest component (first on ties) is real positive."""
    idx = np.argmax(np.round(np.abs(U), 12), axis=0)
    piv = U[idx, np.arange(U.shape[1])]
    return U * (np.abs(piv) / np.where(piv == 0, 1, piv))


def _canonical_clusters(w: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Replace the eigenbasis of every degenerate cluster by a deterministic one.

    The cluster projector is basis independent; the new basis is obtained by
    QR of its columns taken in pivoted order.
    """
    U = U.copy()
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            Uc = U[:, start:stop]
            Pc = Uc @ Uc.conj().T
            _, _, piv = scipy.linalg.qr(Pc, mode="economic", pivoting=True)
            Qc, _ = np.linalg.qr(Pc[:, np.sort(piv[: stop - start])])
            U[:, start:stop] = Qc
        start = stop
    return U


@dataclass(frozen=True, eq=False)
class MeanField:
    """Spectral data of a mean-field operator ``H``.

    Attributes
    ----------
    H : ndarray
        The Hermitian operator.
    evals : ndarray
        Ascending eigenvalues.
    evecs : ndarray
        Unitary matrix of eigenvectors (columns), canonicalized.
    """

    H: np.ndarray
    evals: np.ndarray
    evecs: np.ndarray

    @classmethod
    def from_operator(cls, H: np.ndarray, zero_tol: float = ZERO_EIGENVALUE_TOL) -> "MeanField":
        H = hermitize(np.asarray(H))
        try:
            w, U = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise EigensolverFailure(str(exc)) from exc
        if not np.all(np.isfinite(w)):
            raise EigensolverFailure("non-finite eigenvalues")
        if w.size and np.abs(w).min() < zero_tol:
            raise ZeroEigenvalue(
                f"mean-field eigenvalue {w[np.argmin(np.abs(w))]:.3e} within {zero_tol:g} of zero"
            )
        U = _canonical_phases(_canonical_clusters(w, U))
        return cls(H=H, evals=w, evecs=U)

    @property
    def dim(self) -> int:
        return self.evals.size

    @cached_property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.evals < 0))

    @cached_property
    def pplus(self) -> np.ndarray:
        """Spectral projector on ``(0, inf)``."""
        Up = self.evecs[:, self.n_negative :]
        return hermitize(Up @ Up.conj().T)

    @cached_property
    def pminus(self) -> np.ndarray:
        Um = self.evecs[:, : self.n_negative]
        return hermitize(Um @ Um.conj().T)

    def function(self, f) -> np.ndarray:
        """``f(H)`` by spectral calculus."""
        return hermitize((self.evecs * f(self.evals)) @ self.evecs.conj().T)

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Spectral projector on ``[lo, hi]``."""
        sel = (self.evals >= lo) & (self.evals <= hi)
        Us = self.evecs[:, sel]
        return hermitize(Us @ Us.conj().T)

    @property
    def gap(self) -> float:
        """``min |sigma(H)|``."""
        return float(np.abs(self.evals).min())


def mean_field(m: ModelSpace, gamma) -> MeanField:
    """Diagonalize ``D + V + alpha W_gamma``."""
    return MeanField.from_operator(mean_field_operator(m, gamma))
