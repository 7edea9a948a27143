"""Minimization of ``E - tr`` over admissible density matrices.

Each outer step fills the positive mean-field levels below 1 (the aufbau
direction ``g``), moves along the segment ``(1 - s) gamma + s g`` and maps the
result back with the retraction.  The optimality gap
``tr((H - 1) gamma) - tr((H - 1) g)`` is the stopping certificate; it vanishes
exactly at states of the form ``1_(0, mu)(H) + delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._validation import as_square, check_density, hermitize
from .dfcore.constants import ConstantsReport, constants
from .dfcore.energy import energy_shifted
from .dfcore.meanfield import DEGENERACY_TOL, MeanField, mean_field
from .dfcore.norms import op_norm, x_norm
from .exceptions import (
    DomainError,
    IterationError,
    KappaTooLarge,
    LineSearchStalled,
    NotAdmissible,
    PreconditionViolated,
)
from .model.space import ModelSpace
from .retraction import AdmissibleState, RetractionConfig, admissibility_defect, theta

__all__ = [
    "SolveConfig",
    "SolveReport",
    "ELResidual",
    "aufbau_occupations",
    "aufbau_direction",
    "optimality_gap",
    "solve_ground_state",
    "euler_lagrange_residual",
    "binding_curve",
    "eigen_count_window",
    "energy_noise_floor",
]

ADMISSIBLE_TOL = 1e-8
OCCUPIED_TOL = 1e-6


def aufbau_occupations(evals: np.ndarray, q: float, cluster_tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Occupations minimizing ``sum (lambda_i - 1) occ_i`` with ``0 <= occ <= 1``, ``sum occ <= q``.

    Only eigenvalues in ``(0, 1)`` are filled, lowest first.  When the budget
    runs out inside a cluster of eigenvalues closer than ``cluster_tol``, the
    remainder is shared equally by the cluster.
    """
    evals = np.asarray(evals, dtype=float)
    occ = np.zeros(evals.size)
    if q < 0:
        raise DomainError("q must be nonnegative")
    idx = np.flatnonzero((evals > 0) & (evals < 1))
    idx = idx[np.argsort(evals[idx], kind="stable")]
    budget = float(q)
    i = 0
    while i < idx.size and budget > 0:
        j = i + 1
        while j < idx.size and evals[idx[j]] - evals[idx[j - 1]] < cluster_tol:
            j += 1
        size = j - i
        fill = min(1.0, budget / size)
        occ[idx[i:j]] = fill
        budget -= fill * size
        i = j
    return occ


def aufbau_direction(m: ModelSpace, gamma=None, mf: MeanField | None = None, q: float | None = None) -> np.ndarray:
    """Minimizer of ``tr((H - 1) g)`` over admissible competitors, ``H`` the mean field at ``gamma``."""
    if mf is None:
        mf = mean_field(m, np.zeros((m.dim, m.dim)) if gamma is None else as_square(gamma, m.dim, "gamma"))
    occ = aufbau_occupations(mf.evals, m.q if q is None else q)
    sel = occ > 0
    U = mf.evecs[:, sel]
    return hermitize((U * occ[sel]) @ U.conj().T)


def _shifted_linear(H: np.ndarray, g: np.ndarray) -> float:
    return float(np.real(np.sum((H - np.eye(H.shape[0])) * g.T)))


def _require_admissible(mf: MeanField, g: np.ndarray, tol: float = ADMISSIBLE_TOL) -> None:
    d = admissibility_defect(mf, g)
    if d > tol * max(1.0, op_norm(g)):
        raise NotAdmissible(f"||P- gamma|| = {d:.3e} exceeds {tol:g}")


def optimality_gap(m: ModelSpace, gamma, mf: MeanField | None = None, check: bool = True) -> float:
    """``tr((H - 1) gamma) - tr((H - 1) g)`` with ``g`` the aufbau direction at ``gamma``."""
    g = as_square(gamma, m.dim, "gamma")
    mf = mf or mean_field(m, g)
    if check:
        _require_admissible(mf, g)
    a = aufbau_direction(m, mf=mf)
    return _shifted_linear(mf.H, g) - _shifted_linear(mf.H, a)


@dataclass(frozen=True)
class SolveConfig:
    """Controls for :func:`solve_ground_state`.

    Parameters
    ----------
    tol_gap : float
        Stop once the optimality gap is below this value...
    tol_comm : float
        ...and ``||[H, gamma]|| <= tol_comm * ||H||``...
    tol_structure : float
        ...and ``gamma`` is within this operator-norm distance of
        ``1_(0, mu)(H) + delta``.  Near-threshold levels make the gap quadratic
        in this distance, so it is checked separately.
    max_outer : int
        Outer iteration budget.
    ls_halvings : int
        Backtracking tries ``s = 1, shrink, shrink^2, ...`` up to this many times.
    ls_shrink : float
        Backtracking factor.
    c1 : float
        Sufficient-decrease constant relative to the predicted decrease ``s * gap``.
    start : str or ndarray
        ``"scaled_projector"``, ``"zero_seed"`` or an explicit density matrix.
    retraction : RetractionConfig
        Settings of the inner retraction.
    kappa_mode : str
        Mode used for the feasibility report.
    force : bool
        Solve even when the model fails the feasibility condition.
    """

    tol_gap: float = 1e-10
    tol_comm: float = 1e-9
    tol_structure: float = 5e-9
    max_outer: int = 200
    ls_halvings: int = 20
    ls_shrink: float = 0.5
    c1: float = 1e-4
    start: Any = "scaled_projector"
    retraction: RetractionConfig = field(default_factory=RetractionConfig)
    kappa_mode: str = "matrix_exact"
    force: bool = False

    def __post_init__(self):
        if not self.tol_gap > 0:
            raise DomainError("tol_gap must be positive")
        if not self.tol_comm > 0:
            raise DomainError("tol_comm must be positive")
        if not self.tol_structure > 0:
            raise DomainError("tol_structure must be positive")
        if int(self.max_outer) < 1:
            raise DomainError("max_outer must be >= 1")
        if not 0 < self.ls_shrink < 1:
            raise DomainError("ls_shrink must lie in (0, 1)")
        if int(self.ls_halvings) < 0:
            raise DomainError("ls_halvings must be >= 0")
        if isinstance(self.start, str) and self.start not in ("scaled_projector", "zero_seed"):
            raise DomainError(f"unknown start {self.start!r}")


@dataclass(eq=False)
class SolveReport:
    """Result of :func:`solve_ground_state`."""

    gamma_star: np.ndarray
    energy_q: float
    mu: float
    occupations: list[tuple[float, float]]
    trace_gamma: float
    commutator_residual: float
    optimality_gap: float
    energy_history: list[float]
    gap_history: list[float]
    step_history: list[float]
    x_norm_history: list[float]
    feasibility: ConstantsReport | None
    converged: bool
    outer_iterations: int
    mean_field_norm: float
    warnings: list[str] = field(default_factory=list)
    state: AdmissibleState | None = field(default=None, repr=False)

    def to_dict(self, include_gamma: bool = True) -> dict:
        d = {
            "energy_q": self.energy_q,
            "mu": self.mu,
            "occupations": [[float(a), float(b)] for a, b in self.occupations],
            "trace_gamma": self.trace_gamma,
            "commutator_residual": self.commutator_residual,
            "mean_field_norm": self.mean_field_norm,
            "optimality_gap": self.optimality_gap,
            "energy_history": list(self.energy_history),
            "gap_history": list(self.gap_history),
            "step_history": list(self.step_history),
            "x_norm_history": list(self.x_norm_history),
            "feasibility": None if self.feasibility is None else self.feasibility.to_dict(),
            "converged": self.converged,
            "outer_iterations": self.outer_iterations,
            "warnings": list(self.warnings),
        }
        if include_gamma:
            g = self.gamma_star
            d["gamma_star"] = {"real": np.real(g).tolist(), "imag": np.imag(g).tolist()}
        return d


def _feasibility(m: ModelSpace, cfg: SolveConfig, notes: list[str]) -> ConstantsReport | None:
    try:
        c = constants(m, r=cfg.retraction.r, R_fraction=cfg.retraction.R_fraction, kappa_mode=cfg.kappa_mode)
    except KappaTooLarge as exc:
        c = None
        notes.append(f"constants undefined: {exc}")
    if c is None or not c.feasible:
        msg = "model fails the feasibility condition; results are not covered by the existence theory"
        if not cfg.force:
            raise PreconditionViolated(msg)
        notes.append(msg)
    elif cfg.kappa_mode == "matrix_exact":
        try:
            hb = constants(m, r=cfg.retraction.r, R_fraction=cfg.retraction.R_fraction, kappa_mode="hardy_bound")
            if not hb.feasible:
                notes.append("feasible only with the exact discrete kappa, not with the Hardy bound")
        except KappaTooLarge:
            notes.append("feasible only with the exact discrete kappa, not with the Hardy bound")
    if m.q > m.Z:
        notes.append("q > Z: full occupation tr(gamma*) = q is not guaranteed")
    return c


def _initial_state(m: ModelSpace, cfg: SolveConfig) -> AdmissibleState:
    if isinstance(cfg.start, str):
        if cfg.start == "zero_seed":
            g0 = np.zeros((m.dim, m.dim), dtype=m.D.dtype)
        else:
            eps = min(1.0, m.q)
            g0 = eps * aufbau_direction(m, mf=MeanField.from_operator(m.D + m.V))
    else:
        g0 = check_density(cfg.start, m.dim, m.q)
    return theta(m, g0, cfg.retraction)


def _el_structure(mf: MeanField, g: np.ndarray):
    U = mf.evecs
    gh = hermitize(U.conj().T @ g @ U)
    occ = np.real(np.diag(gh))
    lam = mf.evals
    occupied = np.flatnonzero(occ > OCCUPIED_TOL)
    if occupied.size == 0:
        return gh, occ, float("nan"), op_norm(gh)
    mu = float(lam[occupied].max())
    ctol = 1e-8 * max(1.0, abs(mu))
    at = np.abs(lam - mu) <= ctol
    below = (lam > 0) & (lam < mu) & ~at
    target = np.zeros_like(gh)
    target[np.ix_(below, below)] = np.eye(int(below.sum()))
    if at.any():
        B = gh[np.ix_(at, at)]
        w, V = np.linalg.eigh(B)
        target[np.ix_(at, at)] = (V * np.clip(w, 0.0, 1.0)) @ V.conj().T
    dev = op_norm(gh - target)
    if not 0 < mu <= 1:
        dev = max(dev, abs(mu - min(max(mu, 0.0), 1.0)))
    return gh, occ, mu, dev


def solve_ground_state(m: ModelSpace, cfg: SolveConfig | None = None) -> SolveReport:
    """Minimize ``E(gamma) - tr(gamma)`` over admissible ``gamma`` with ``tr gamma <= q``.

    Raises
    ------
    PreconditionViolated
        The model is infeasible and ``cfg.force`` is off.
    LineSearchStalled
        No step produced a sufficient decrease; ``exc.report`` holds the
        partial :class:`SolveReport`.
    """
    cfg = cfg or SolveConfig()
    notes: list[str] = []
    feas = _feasibility(m, cfg, notes)
    bound = m.q / feas.margin if feas is not None and feas.margin > 0 else None

    state = _initial_state(m, cfg)
    F = energy_shifted(m, state.gamma)
    energies, gaps, steps, xnorms = [F], [], [], [x_norm(m, state.gamma)]
    converged = False
    outer = 0
    polished = 0
    gap = float("inf")

    def report(st: AdmissibleState, gap_value: float, ok: bool) -> SolveReport:
        mf = st.mean_field
        g = st.gamma
        _, occ, mu, _ = _el_structure(mf, g)
        pairs = [(float(l), float(o)) for l, o in zip(mf.evals, occ) if o > OCCUPIED_TOL]
        if bound is not None:
            bad = [i for i, (e, x) in enumerate(zip(energies, xnorms)) if e <= 0 and x > bound * (1 + 1e-9)]
            if bad:
                notes.append(f"sublevel X-norm bound exceeded at iterates {bad}")
        return SolveReport(
            gamma_star=g,
            energy_q=energies[-1],
            mu=mu,
            occupations=pairs,
            trace_gamma=float(np.trace(g).real),
            commutator_residual=op_norm(mf.H @ g - g @ mf.H),
            optimality_gap=gap_value,
            energy_history=energies,
            gap_history=gaps,
            step_history=steps,
            x_norm_history=xnorms,
            feasibility=feas,
            converged=ok,
            outer_iterations=outer,
            mean_field_norm=op_norm(mf.H),
            warnings=notes,
            state=st,
        )

    while True:
        mf = state.mean_field
        g_dir = aufbau_direction(m, mf=mf)
        H = mf.H
        gap = _shifted_linear(H, state.gamma) - _shifted_linear(H, g_dir)
        gaps.append(gap)
        comm = op_norm(H @ state.gamma - state.gamma @ H)
        dev = _el_structure(mf, state.gamma)[3]
        energy_done = gap <= cfg.tol_gap
        if energy_done and comm <= cfg.tol_comm * op_norm(H) and dev <= cfg.tol_structure:
            converged = True
            break
        if outer >= cfg.max_outer:
            break
        if energy_done:
            # the energy is flat to rounding; take full steps and accept them
            # as long as the energy does not rise above the noise floor
            accepted = _polish_step(m, state, g_dir, F, dev, cfg)
            if accepted is None:
                break
            polished += 1
        else:
            accepted = _armijo_step(m, state, g_dir, F, gap, cfg)
        if accepted is None:
            partial = report(state, gap, False)
            raise LineSearchStalled(
                f"no sufficient decrease after {cfg.ls_halvings} halvings (gap {gap:.3e}, commutator {comm:.3e})",
                report=partial,
            )
        state, F, s = accepted
        outer += 1
        energies.append(F)
        steps.append(s)
        xnorms.append(x_norm(m, state.gamma))

    if polished:
        notes.append(f"{polished} polishing steps taken with the energy flat to rounding")
    if not converged:
        if outer >= cfg.max_outer:
            notes.append(f"outer budget of {cfg.max_outer} iterations exhausted")
        else:
            notes.append("structure deviation stagnated at the rounding floor")
    return report(state, gap, converged)


def _armijo_step(m, state, g_dir, F, gap, cfg):
    s = 1.0
    for _ in range(int(cfg.ls_halvings) + 1):
        trial = hermitize((1 - s) * state.gamma + s * g_dir)
        try:
            cand = theta(m, trial, cfg.retraction, check=False)
        except IterationError:
            cand = None
        if cand is not None:
            Fc = energy_shifted(m, cand.gamma)
            if Fc <= F - cfg.c1 * s * max(gap, 0.0) and Fc < F:
                return cand, Fc, s
        s *= cfg.ls_shrink
    return None


def _polish_step(m, state, g_dir, F, dev, cfg):
    try:
        cand = theta(m, g_dir, cfg.retraction, check=False)
    except IterationError:
        return None
    Fc = energy_shifted(m, cand.gamma)
    if Fc > F + energy_noise_floor(F, m.q):
        return None
    if _el_structure(cand.mean_field, cand.gamma)[3] >= dev:
        return None
    return cand, Fc, 1.0


def energy_noise_floor(F: float, q: float) -> float:
    """Rounding level of ``E - tr`` below which energy comparisons carry no information."""
    return 1e3 * np.finfo(float).eps * max(1.0, abs(F), q)


@dataclass(frozen=True)
class ELResidual:
    commutator_norm: float
    structure_deviation: float
    mu: float

    def to_dict(self) -> dict:
        return {"commutator_norm": self.commutator_norm, "structure_deviation": self.structure_deviation, "mu": self.mu}


def euler_lagrange_residual(m: ModelSpace, gamma, check: bool = True) -> ELResidual:
    """Distance of ``gamma`` from the pattern ``1_(0, mu)(H) + delta``, ``0 <= delta <= 1_{mu}(H)``."""
    g = as_square(gamma, m.dim, "gamma")
    mf = mean_field(m, g)
    if check:
        _require_admissible(mf, g)
    _, _, mu, dev = _el_structure(mf, g)
    return ELResidual(commutator_norm=op_norm(mf.H @ g - g @ mf.H), structure_deviation=dev, mu=mu)


def binding_curve(m: ModelSpace, q_list, cfg: SolveConfig | None = None) -> list[tuple[float, float]]:
    """``(q, E_q)`` for each ``q`` in the ascending list ``q_list``."""
    qs = [float(q) for q in q_list]
    if not qs:
        return []
    if any(q <= 0 for q in qs) or any(b <= a for a, b in zip(qs, qs[1:])):
        raise DomainError("q_list must be strictly ascending positive numbers")
    cfg = cfg or SolveConfig()
    return [(q, solve_ground_state(m.with_q(q), cfg).energy_q) for q in qs]


def eigen_count_window(m: ModelSpace, gamma, e: float) -> tuple[int, int]:
    """Numbers of mean-field eigenvalues in ``[0, 1 - e]`` and ``[0, 1 - e/2]``."""
    if not 0 < e < 1:
        raise DomainError(f"e must lie in (0, 1), got {e}")
    g = check_density(gamma, m.dim, m.q)
    lam = mean_field(m, g).evals
    low = int(np.count_nonzero((lam >= 0) & (lam <= 1 - e)))
    mid = int(np.count_nonzero((lam >= 0) & (lam <= 1 - e / 2)))
    return low, mid
