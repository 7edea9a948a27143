"""Diagnostic suites that check the analytic estimates on a concrete model.

Each suite returns a :class:`SuiteResult`.  A suite is *asserted* when the
model satisfies the hypotheses under which its inequalities are guaranteed;
otherwise it is run for information and its verdict does not count as a
failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .dfcore.constants import constants, feasibility_row
from .dfcore.density import random_density, random_hermitian
from .dfcore.estimates import hardy_checks, main_estimate_terms, sublevel_bound
from .dfcore.norms import op_norm
from .exceptions import IterationError, KappaTooLarge, LineSearchStalled, PreconditionViolated
from .groundstate import SolveConfig, SolveReport, eigen_count_window, solve_ground_state
from .model.space import ModelSpace
from .retraction import RetractionConfig, dtheta_fd, dtheta_propagated, theta, u_margin

__all__ = [
    "SUITES",
    "SuiteResult",
    "feasibility_table",
    "sample_in_invariant_set",
    "run_suites",
    "suite_hardy",
    "suite_contraction",
    "suite_dtheta_blocks",
    "suite_spectrum_count",
    "suite_sublevel",
]

RATIO_SLACK = 1e-9
BLOCK_TOL = 1e-4


@dataclass
class SuiteResult:
    name: str
    passed: bool
    asserted: bool
    samples: int
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.asserted and not self.passed

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "asserted": self.asserted,
            "samples": self.samples,
            "details": self.details,
        }


def feasibility_table(
    Z_values,
    q_of_Z: Callable[[float], float],
    alpha: float,
    kappa_mode: str = "hardy_bound",
    v_dinv_of_Z: Callable[[float], float] | None = None,
) -> list:
    """Rows ``(Z, q, kappa, lambda0, lhs, rhs, feasible)`` of the smallness condition.

    ``v_dinv_of_Z`` supplies ``||V D^{-1}||`` when ``kappa_mode`` is ``"matrix_exact"``.
    """
    if kappa_mode == "matrix_exact" and v_dinv_of_Z is None:
        raise ValueError("matrix_exact mode needs v_dinv_of_Z")
    rows = []
    for Z in Z_values:
        vd = None if v_dinv_of_Z is None else v_dinv_of_Z(Z)
        r = feasibility_row(alpha, Z, q_of_Z(Z), kappa_mode=kappa_mode, v_dinv_norm=vd)
        rows.append(
            {
                "Z": r.Z,
                "q": r.q,
                "kappa": r.kappa,
                "lambda0": r.lambda0,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "feasible": r.feasible,
            }
        )
    return rows


def _feasible(m: ModelSpace, kappa_mode: str = "matrix_exact"):
    try:
        c = constants(m, kappa_mode=kappa_mode)
    except KappaTooLarge:
        return None
    return c if c.feasible else None


def sample_in_invariant_set(m: ModelSpace, rng: np.random.Generator, c, attempts: int = 60) -> np.ndarray:
    """Random density inside the invariant set, shrinking the trace until it fits."""
    trace = m.q
    for _ in range(int(attempts)):
        g = random_density(m, rng, trace=trace * rng.uniform(0.2, 1.0))
        if u_margin(m, g, c) > 0:
            return g
        trace *= 0.7
    raise PreconditionViolated("could not sample a density inside the invariant set")


def suite_hardy(m: ModelSpace, samples: int = 100, seed: int = 0, **_) -> SuiteResult:
    rep = hardy_checks(m, samples=samples, seed=seed)
    asserted = rep.constants is not None and rep.constants.feasible
    return SuiteResult("hardy", rep.passed, asserted, samples, rep.to_dict())


def suite_contraction(m: ModelSpace, samples: int = 50, seed: int = 0, **_) -> SuiteResult:
    """Observed increment ratios against ``k`` and the one-step estimate along each run."""
    rng = np.random.default_rng(seed)
    try:
        c = constants(m)
    except KappaTooLarge as exc:
        return SuiteResult("contraction", False, False, 0, {"reason": str(exc)})
    asserted = c.feasible
    worst_ratio, worst_est, runs, failures = 0.0, 0.0, 0, 0
    cfg = RetractionConfig(tol_x=1e-12, max_iter=300, keep_path=True)
    for _ in range(int(samples)):
        try:
            g0 = sample_in_invariant_set(m, rng, c)
        except PreconditionViolated:
            failures += 1
            continue
        try:
            st = theta(m, g0, cfg)
        except IterationError:
            failures += 1
            continue
        runs += 1
        worst_ratio = max(worst_ratio, st.trace_path.max_ratio)
        for g in st.path:
            t = main_estimate_terms(m, g, c)
            if t["step"] > 1e-13:
                worst_est = max(worst_est, t["lhs"] / t["rhs"])
    passed = failures == 0 and worst_ratio <= c.k + RATIO_SLACK and worst_est <= 1 + RATIO_SLACK
    details = {
        "k": c.k,
        "worst_ratio": worst_ratio,
        "worst_estimate_ratio": worst_est,
        "runs": runs,
        "failures": failures,
    }
    return SuiteResult("contraction", passed, asserted, int(samples), details)


def suite_dtheta_blocks(m: ModelSpace, samples: int = 20, seed: int = 0, eps: float = 1e-6, **_) -> SuiteResult:
    """Block structure of the finite-difference differential at a fixed point."""
    rng = np.random.default_rng(seed)
    try:
        st = theta(m, random_density(m, rng), RetractionConfig(tol_x=1e-14, max_iter=300))
    except IterationError as exc:
        return SuiteResult("dtheta-blocks", False, _feasible(m) is not None, 0, {"reason": str(exc)})
    worst_pp = worst_mm = worst_agree = 0.0
    for _ in range(int(samples)):
        h = random_hermitian(m, rng)
        S, rep = dtheta_fd(m, st, h, eps=eps)
        P, _ = dtheta_propagated(m, st, h)
        worst_pp = max(worst_pp, rep.plus_plus)
        worst_mm = max(worst_mm, rep.minus_minus)
        worst_agree = max(worst_agree, op_norm(S - P) / max(op_norm(h), 1e-300))
    passed = max(worst_pp, worst_mm, worst_agree) <= BLOCK_TOL
    details = {"plus_plus": worst_pp, "minus_minus": worst_mm, "propagated_vs_fd": worst_agree, "tol": BLOCK_TOL}
    return SuiteResult("dtheta-blocks", passed, _feasible(m) is not None, int(samples), details)


def _solve(m: ModelSpace, cache: dict) -> SolveReport | None:
    if "solve" not in cache:
        try:
            cache["solve"] = solve_ground_state(m, SolveConfig(force=True))
        except LineSearchStalled as exc:
            cache["solve"] = exc.report
        except IterationError:
            cache["solve"] = None
    return cache["solve"]


def suite_spectrum_count(m: ModelSpace, samples: int = 0, seed: int = 0, e: float = 1e-4, cache=None, **_) -> SuiteResult:
    """Mean-field eigenvalues in ``[0, 1 - e]`` at the computed ground state versus ``ceil(q)``."""
    rep = _solve(m, {} if cache is None else cache)
    if rep is None:
        return SuiteResult("spectrum-count", False, False, 0, {"reason": "solver failed"})
    low, mid = eigen_count_window(m, rep.gamma_star, e)
    need = math.ceil(m.q - 1e-12)
    asserted = m.q < m.Z and _feasible(m) is not None and rep.converged
    details = {"e": e, "count_low": low, "count_mid": mid, "ceil_q": need, "mu": rep.mu}
    return SuiteResult("spectrum-count", low >= need, asserted, 1, details)


def suite_sublevel(m: ModelSpace, samples: int = 0, seed: int = 0, cache=None, **_) -> SuiteResult:
    """X-norm of solver iterates with nonpositive shifted energy against the sublevel bound."""
    rep = _solve(m, {} if cache is None else cache)
    if rep is None:
        return SuiteResult("sublevel", False, False, 0, {"reason": "solver failed"})
    c = _feasible(m)
    try:
        bound = sublevel_bound(m)
    except (KappaTooLarge, PreconditionViolated, ZeroDivisionError):
        bound = float("inf")
    pairs = [(e, x) for e, x in zip(rep.energy_history, rep.x_norm_history) if e <= 0]
    worst = max((x for _, x in pairs), default=0.0)
    passed = bound > 0 and worst <= bound * (1 + RATIO_SLACK)
    details = {"bound": bound, "worst_x_norm": worst, "iterates_checked": len(pairs)}
    return SuiteResult("sublevel", passed, c is not None, len(pairs), details)


SUITES = {
    "hardy": suite_hardy,
    "contraction": suite_contraction,
    "dtheta-blocks": suite_dtheta_blocks,
    "spectrum-count": suite_spectrum_count,
    "sublevel": suite_sublevel,
}


def run_suites(m: ModelSpace, names, samples: int | None = None, seed: int = 0, e: float = 1e-4) -> list[SuiteResult]:
    """Run the named suites in the given order; ``samples=None`` keeps each suite's default."""
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites {unknown}; choose from {sorted(SUITES)}")
    cache: dict = {}
    out = []
    for name in names:
        kw = {"seed": seed, "cache": cache, "e": e}
        if samples is not None:
            kw["samples"] = samples
        out.append(SUITES[name](m, **kw))
    return out
