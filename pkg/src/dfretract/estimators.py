"""Estimator-style wrappers around the functional core.

The "data" passed to ``fit`` is a :class:`~dfretract.model.ModelSpace`; the
wrappers only store hyperparameters and fitted results.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .dfcore.constants import constants
from .exceptions import DomainError
from .groundstate import SolveConfig, binding_curve, solve_ground_state
from .model.space import ModelSpace
from .retraction import RetractionConfig, theta

__all__ = ["Retraction", "GroundStateSolver"]


def _require_model(X) -> ModelSpace:
    if not isinstance(X, ModelSpace):
        raise DomainError(f"expected a ModelSpace, got {type(X).__name__}")
    return X


class Retraction(TransformerMixin, BaseEstimator):
    """Map density matrices onto admissible states of a fitted model.

    Parameters
    ----------
    tol_x : float
        X-norm increment at which the iteration stops.
    max_iter : int
        Iteration budget per matrix.
    enforce_k : bool
        Reject starts outside the invariant set and check every ratio against ``k``.
    R_fraction : float
        Radius of the invariant set as a fraction of its upper limit.
    kappa_mode : {"matrix_exact", "hardy_bound"}
        How the potential constant is evaluated.

    Attributes
    ----------
    model_ : ModelSpace
    constants_ : ConstantsReport or None
        Only computed when ``enforce_k`` is set.
    residuals_ : list of float
        Final increment of each matrix in the last :meth:`transform` call.
    iterations_ : list of int
    """

    def __init__(self, tol_x=1e-11, max_iter=500, enforce_k=False, R_fraction=0.9, kappa_mode="matrix_exact"):
        self.tol_x = tol_x
        self.max_iter = max_iter
        self.enforce_k = enforce_k
        self.R_fraction = R_fraction
        self.kappa_mode = kappa_mode

    def _config(self) -> RetractionConfig:
        return RetractionConfig(
            tol_x=self.tol_x,
            max_iter=self.max_iter,
            enforce_k=self.enforce_k,
            R_fraction=self.R_fraction,
            kappa_mode=self.kappa_mode,
        )

    def fit(self, X, y=None):
        self.model_ = _require_model(X)
        self._config()
        self.constants_ = (
            constants(self.model_, R_fraction=self.R_fraction, kappa_mode=self.kappa_mode) if self.enforce_k else None
        )
        return self

    def transform(self, X):
        """Retract one ``(n, n)`` matrix or a stack ``(k, n, n)``."""
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit with a model first")
        arr = np.asarray(X)
        single = arr.ndim == 2
        stack = arr[None] if single else arr
        cfg = self._config()
        out, self.residuals_, self.iterations_ = [], [], []
        for g in stack:
            st = theta(self.model_, g, cfg)
            out.append(st.gamma)
            self.residuals_.append(st.residual)
            self.iterations_.append(st.trace_path.iterations)
        res = np.stack(out)
        return res[0] if single else res

    def fit_transform(self, X, y=None, **fit_params):
        raise DomainError("fit takes a model and transform takes density matrices; call them separately")


class GroundStateSolver(BaseEstimator):
    """Admissible minimizer of ``E - tr`` for a given model.

    Parameters
    ----------
    tol_gap, tol_comm, tol_structure, max_outer : float, float, float, int
        Stopping rule, see :class:`~dfretract.groundstate.SolveConfig`.
    start : {"scaled_projector", "zero_seed"}
    kappa_mode : {"matrix_exact", "hardy_bound"}
    force : bool
        Solve models that fail the feasibility condition.
    retraction_tol : float
        Inner retraction tolerance.

    Attributes
    ----------
    gamma_star_ : ndarray
    energy_ : float
    mu_ : float
    occupations_ : list of (eigenvalue, occupation)
    converged_ : bool
    report_ : SolveReport
    """

    def __init__(
        self,
        tol_gap=1e-10,
        tol_comm=1e-9,
        tol_structure=5e-9,
        max_outer=200,
        start="scaled_projector",
        kappa_mode="matrix_exact",
        force=False,
        retraction_tol=1e-11,
    ):
        self.tol_gap = tol_gap
        self.tol_comm = tol_comm
        self.tol_structure = tol_structure
        self.max_outer = max_outer
        self.start = start
        self.kappa_mode = kappa_mode
        self.force = force
        self.retraction_tol = retraction_tol

    def _config(self) -> SolveConfig:
        return SolveConfig(
            tol_gap=self.tol_gap,
            tol_comm=self.tol_comm,
            tol_structure=self.tol_structure,
            max_outer=self.max_outer,
            start=self.start,
            kappa_mode=self.kappa_mode,
            force=self.force,
            retraction=RetractionConfig(tol_x=self.retraction_tol),
        )

    def fit(self, X, y=None):
        m = _require_model(X)
        rep = solve_ground_state(m, self._config())
        self.model_ = m
        self.report_ = rep
        self.gamma_star_ = rep.gamma_star
        self.energy_ = rep.energy_q
        self.mu_ = rep.mu
        self.occupations_ = rep.occupations
        self.converged_ = rep.converged
        return self

    def predict(self, X):
        """Ground-state energies of the fitted model for the ascending budgets ``X``."""
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit with a model first")
        qs = np.atleast_1d(np.asarray(X, dtype=float))
        return np.array([e for _, e in binding_curve(self.model_, qs, self._config())])

    def score(self, X, y=None):
        """Negative ground-state energy of ``X`` (larger is more bound)."""
        return -solve_ground_state(_require_model(X), self._config()).energy_q
