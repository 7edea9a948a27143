"""Retraction onto admissible density matrices by iterating ``gamma -> P+ gamma P+``.

``theta(gamma)`` is the limit of the iterates ``T^p(gamma)``.  Fixed points of
``T`` are exactly the admissible states (``P+_gamma gamma = gamma``), so
``theta`` fixes them and maps its domain onto them.  At such a fixed point the
differential satisfies ``P+ (dtheta h) P+ = P+ h P+`` and
``P- (dtheta h) P- = 0``; :func:`dtheta_fd` measures both.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_square, check_density, check_hermitian, hermitize
from .dfcore.constants import ConstantsReport, constants
from .dfcore.energy import t_map_with_field
from .dfcore.meanfield import MeanField, interaction_potential, mean_field
from .dfcore.norms import half_weighted_trace_norm, op_norm, x_norm
from .exceptions import DomainError, IterationError, KappaTooLarge, PreconditionViolated, StepTooLarge
from .fixedpoint import FixConfig, IterationTrace, iterate_to_fix, propagate_differential
from .model.space import ModelSpace

__all__ = [
    "RetractionConfig",
    "AdmissibleState",
    "BlockReport",
    "theta",
    "u_margin",
    "dt_map",
    "dtheta_fd",
    "dtheta_propagated",
    "projector_differential",
    "admissibility_defect",
]


@dataclass(frozen=True)
class RetractionConfig:
    """Controls for :func:`theta`.

    Parameters
    ----------
    tol_x : float
        Stop when ``||T(gamma) - gamma||_X <= tol_x``.
    max_iter : int
        Iteration budget.
    enforce_k : bool
        Require the start to lie in the invariant set and abort if any
        residual ratio exceeds the certified contraction factor ``k``.
    r, R_fraction, kappa_mode
        Passed to :func:`dfretract.dfcore.constants`.
    keep_path : bool
        Store the iterates (needed for differential propagation away from fixed points).
    """

    tol_x: float = 1e-11
    max_iter: int = 500
    enforce_k: bool = False
    r: float = 0.0
    R_fraction: float = 0.9
    kappa_mode: str = "matrix_exact"
    keep_path: bool = False

    def __post_init__(self):
        if not self.tol_x >= 0:
            raise DomainError(f"tol_x must be >= 0, got {self.tol_x}")
        if int(self.max_iter) < 1:
            raise DomainError("max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class AdmissibleState:
    """Output of :func:`theta`."""

    gamma: np.ndarray
    mean_field: MeanField
    residual: float
    trace_path: IterationTrace
    admissibility: float
    constants: ConstantsReport | None = None
    path: list | None = field(default=None, repr=False)

    @property
    def pplus(self) -> np.ndarray:
        return self.mean_field.pplus

    @property
    def pminus(self) -> np.ndarray:
        return self.mean_field.pminus


def admissibility_defect(mf: MeanField, gamma: np.ndarray) -> float:
    """``||P- gamma||`` (operator norm)."""
    return op_norm(mf.pminus @ gamma)


def u_margin(m: ModelSpace, gamma, c: ConstantsReport) -> float:
    """``R - (||gamma |D|^{1/2}||_1 + A ||T(gamma) - gamma||_X)``; positive inside the invariant set."""
    g = as_square(gamma, m.dim, "gamma")
    t, _ = t_map_with_field(m, g)
    return c.R_chosen - (half_weighted_trace_norm(m, g) + c.A * x_norm(m, t - g))


def theta(m: ModelSpace, gamma0, cfg: RetractionConfig | None = None, check: bool = True) -> AdmissibleState:
    """Limit of ``T^p(gamma0)``.

    Raises
    ------
    MaxIterExceeded, RatioAboveOne, ZeroEigenvalue
        From the iteration.
    PreconditionViolated
        With ``enforce_k`` when ``gamma0`` lies outside the invariant set.
    """
    cfg = cfg or RetractionConfig()
    g0 = check_density(gamma0, m.dim, m.q) if check else check_hermitian(gamma0, m.dim, "gamma0", tol=1e-9)
    g0 = hermitize(np.asarray(g0))
    c = None
    k_cap = None
    if cfg.enforce_k:
        c = constants(m, r=cfg.r, R_fraction=cfg.R_fraction, kappa_mode=cfg.kappa_mode)
        margin = u_margin(m, g0, c)
        if margin <= 0:
            raise PreconditionViolated(f"start lies outside the invariant set (margin {margin:.3e})")
        k_cap = c.k
    path = [] if cfg.keep_path else None
    last_field: dict = {}

    def step(g):
        t, mf = t_map_with_field(m, g)
        last_field["g"], last_field["mf"] = g, mf
        if path is not None:
            path.append(g)
        return t

    def dist(a, b):
        return x_norm(m, a - b)

    g, trace = iterate_to_fix(step, dist, g0, FixConfig(tol=cfg.tol_x, max_iter=cfg.max_iter, k_cap=k_cap))
    mf = last_field["mf"] if last_field.get("g") is g else mean_field(m, g)
    if path is not None:
        path.pop()  # the final call to step was on the limit itself
    return AdmissibleState(
        gamma=g,
        mean_field=mf,
        residual=trace.residuals[-1],
        trace_path=trace,
        admissibility=admissibility_defect(mf, g),
        constants=c,
        path=path,
    )


def projector_differential(m: ModelSpace, mf: MeanField, h: np.ndarray) -> np.ndarray:
    """Derivative of ``gamma -> P+_gamma`` in direction ``h`` (divided differences in the eigenbasis)."""
    if m.rank == 0:
        return np.zeros_like(mf.H)
    U = mf.evecs
    Wt = U.conj().T @ (m.alpha * interaction_potential(m, h)) @ U
    pos = mf.evals > 0
    lam = mf.evals
    mask = pos[:, None] != pos[None, :]
    denom = np.where(mask, lam[:, None] - lam[None, :], 1.0)
    sign = pos[:, None].astype(float) - pos[None, :].astype(float)
    G = np.where(mask, Wt * sign / denom, 0.0)
    return hermitize(U @ G @ U.conj().T)


def dt_map(m: ModelSpace, gamma, h, mf: MeanField | None = None) -> np.ndarray:
    """``dT(gamma) h = dP gamma P + P gamma dP + P h P``."""
    g = as_square(gamma, m.dim, "gamma")
    h = as_square(h, m.dim, "h")
    mf = mf or mean_field(m, g)
    P = mf.pplus
    dP = projector_differential(m, mf, h)
    A = dP @ g @ P
    return hermitize(A + A.conj().T + P @ h @ P)


@dataclass(frozen=True)
class BlockReport:
    """Block structure of ``dtheta h`` at an admissible state (operator norms relative to ``||h||``)."""

    plus_plus: float
    minus_minus: float
    richardson: float
    h_norm: float

    def ok(self, tol: float = 1e-4) -> bool:
        return self.plus_plus <= tol and self.minus_minus <= tol

    def to_dict(self) -> dict:
        return {
            "plus_plus": self.plus_plus,
            "minus_minus": self.minus_minus,
            "richardson": self.richardson,
            "h_norm": self.h_norm,
        }


def _block_report(state: AdmissibleState, S: np.ndarray, h: np.ndarray, richardson: float) -> BlockReport:
    P, Pm = state.pplus, state.pminus
    hn = op_norm(h)
    scale = hn if hn > 0 else 1.0
    return BlockReport(
        plus_plus=op_norm(P @ S @ P - P @ h @ P) / scale,
        minus_minus=op_norm(Pm @ S @ Pm) / scale,
        richardson=richardson / scale,
        h_norm=hn,
    )


def _theta_probe(m: ModelSpace, g: np.ndarray, cfg: RetractionConfig, c: ConstantsReport | None) -> np.ndarray:
    if c is not None and u_margin(m, g, c) <= 0:
        raise StepTooLarge("finite-difference probe left the invariant set")
    try:
        return theta(m, g, cfg, check=False).gamma
    except IterationError as exc:
        raise StepTooLarge(f"retraction failed at a probe point: {exc}") from exc


def dtheta_fd(
    m: ModelSpace,
    state: AdmissibleState,
    h,
    eps: float = 1e-6,
    cfg: RetractionConfig | None = None,
) -> tuple[np.ndarray, BlockReport]:
    """Central difference ``(theta(g + eps h) - theta(g - eps h)) / (2 eps)`` with a block report.

    A second difference at ``eps / 2`` gives a Richardson estimate of the
    truncation error; a warning is issued if it exceeds ten times ``eps ||h||``.
    """
    h = check_hermitian(h, m.dim, "h", tol=1e-10)
    h = hermitize(np.asarray(h))
    if not eps > 0:
        raise DomainError("eps must be positive")
    cfg = cfg or RetractionConfig(tol_x=1e-14, max_iter=200)
    g = state.gamma
    try:
        c = constants(m, r=cfg.r, R_fraction=cfg.R_fraction, kappa_mode=cfg.kappa_mode)
    except KappaTooLarge:
        c = None
    if not np.any(h):
        S = np.zeros_like(g, dtype=np.result_type(g, h))
        return S, _block_report(state, S, h, 0.0)

    def central(e):
        return (_theta_probe(m, g + e * h, cfg, c) - _theta_probe(m, g - e * h, cfg, c)) / (2 * e)

    S = central(eps)
    S_half = central(eps / 2)
    rich = op_norm(S - S_half)
    if rich > 10 * eps * max(op_norm(h), 1e-300) + 1e-8:
        warnings.warn(f"finite-difference derivative not converged in eps (Richardson gap {rich:.2e})", RuntimeWarning)
    S = hermitize((4 * S_half - S) / 3)
    return S, _block_report(state, S, h, rich)


def dtheta_propagated(
    m: ModelSpace,
    state: AdmissibleState,
    h,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> tuple[np.ndarray, BlockReport]:
    """``dtheta h = lim_p d(T^p) h`` at a fixed point, by repeated application of ``dT``."""
    h = hermitize(np.asarray(check_hermitian(h, m.dim, "h", tol=1e-10)))
    g, mf = state.gamma, state.mean_field

    def step_diff(y, v):
        return dt_map(m, y, v, mf=mf)

    v = h
    for _ in range(int(max_iter)):
        w = propagate_differential(step_diff, [g], v)
        if op_norm(w - v) <= tol * max(1.0, op_norm(v)):
            v = w
            break
        v = w
    return v, _block_report(state, v, h, 0.0)
