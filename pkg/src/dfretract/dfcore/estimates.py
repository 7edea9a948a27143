"""Runtime checks of the inequalities behind the construction.

Rows that follow from matrix-level spectral calculus once ``kappa_r < 1`` are
asserted; rows whose constants come from continuum inequalities (Hardy,
Kato-Herbst on the whole space) are reported with their worst observed ratio.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .._validation import check_density, hermitize
from ..exceptions import KappaTooLarge, PreconditionViolated
from ..model.interaction import contract_direct, contract_exchange
from ..model.radial import kato_herbst_matrices
from ..model.space import ModelSpace
from .constants import ConstantsReport, constants
from .density import random_density
from .energy import t_map_with_field
from .meanfield import interaction_potential, mean_field
from .norms import half_weighted_trace_norm, op_norm, trace_norm, x_norm, y_norm

__all__ = [
    "BoundCheck",
    "HardyRow",
    "HardyReport",
    "sublevel_bound",
    "d_gamma_d_bound_check",
    "hardy_checks",
    "main_estimate_terms",
    "kato_herbst_check",
]

RATIO_SLACK = 1e-9
_POWERS = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def sublevel_bound(m: ModelSpace, kappa_mode: str = "matrix_exact") -> float:
    """``q / (1 - kappa - (pi/4) alpha q)``: bound on ``||gamma||_X`` over the nonpositive sublevel set."""
    c = constants(m, kappa_mode=kappa_mode)
    if c.margin <= 0:
        raise KappaTooLarge(f"1 - kappa - (pi/4) alpha q = {c.margin:.6g} <= 0")
    return m.q / c.margin


def d_gamma_d_bound_check(
    m: ModelSpace,
    gamma,
    nu: float,
    gamma_ref=None,
    kappa_mode: str = "matrix_exact",
    tol: float = 1e-9,
) -> BoundCheck:
    """Compare ``||D gamma D||_1`` with ``(1 - kappa)^{-2} nu^2 tr gamma``.

    ``gamma`` must live in the spectral window ``[0, nu]`` of the mean field at
    ``gamma_ref`` (``gamma`` itself by default).
    """
    g = check_density(gamma, m.dim, tol=1e-10)
    ref = g if gamma_ref is None else check_density(gamma_ref, m.dim, m.q)
    win = mean_field(m, ref).window(0.0, nu)
    scale = max(1.0, op_norm(g))
    if op_norm(g - win @ g @ win) > tol * scale:
        raise PreconditionViolated(f"gamma is not supported in the spectral window [0, {nu}]")
    c = constants(m, kappa_mode=kappa_mode)
    lhs = trace_norm(hermitize(m.D @ g @ m.D))
    rhs = nu**2 * float(np.trace(g).real) / (1.0 - c.kappa) ** 2
    return BoundCheck(lhs=lhs, rhs=rhs, ok=bool(lhs <= rhs * (1 + RATIO_SLACK) + 1e-14))


def main_estimate_terms(m: ModelSpace, gamma, c: ConstantsReport) -> dict:
    """Both sides of the one-step contraction estimate at ``gamma``.

    ``lhs = ||T^2 gamma - T gamma||_X`` and
    ``rhs = 2 a_r (||T gamma |D|^{1/2}||_1 + a_r (q + r)/2 ||T gamma - gamma||_X) ||T gamma - gamma||_X``.
    """
    t1, _ = t_map_with_field(m, gamma)
    t2, _ = t_map_with_field(m, t1)
    d1 = x_norm(m, t1 - gamma)
    d2 = x_norm(m, t2 - t1)
    rhs = 2 * c.a_r * (half_weighted_trace_norm(m, t1) + 0.5 * c.a_r * (c.q + c.r) * d1) * d1
    return {"lhs": d2, "rhs": rhs, "step": d1, "T": t1, "T2": t2}


@dataclass
class HardyRow:
    name: str
    worst_ratio: float
    samples: int
    asserted: bool

    @property
    def passed(self) -> bool:
        return bool(self.worst_ratio <= 1 + RATIO_SLACK)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class HardyReport:
    rows: list[HardyRow] = field(default_factory=list)
    constants: ConstantsReport | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if r.asserted)

    def row(self, name: str) -> HardyRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rows": [r.to_dict() for r in self.rows],
            "constants": None if self.constants is None else self.constants.to_dict(),
        }


def kato_herbst_check(n: int = 20, samples: int = 1000, seed: int = 0) -> HardyRow:
    """Worst ``<psi, r^{-1} psi> / ((pi/2) <psi, |p| psi>)`` over random s-wave vectors and the exact maximum."""
    A, M = kato_herbst_matrices(n)
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal((samples, n))
    num = np.einsum("si,ij,sj->s", psi, A, psi)
    den = np.einsum("si,ij,sj->s", psi, M, psi)
    worst = float((num / den).max()) if samples else 0.0
    w, U = np.linalg.eigh(M)
    Mi = (U / np.sqrt(w)) @ U.T
    exact = float(np.linalg.eigvalsh(Mi @ A @ Mi).max())
    return HardyRow("kato_herbst", max(worst, exact) / (math.pi / 2), samples, True)


def hardy_checks(
    m: ModelSpace,
    samples: int = 100,
    seed: int = 0,
    r: float = 0.0,
    kappa_mode: str = "matrix_exact",
) -> HardyReport:
    """Worst observed ratios of the Hardy-type inequalities on sampled densities.

    Rows (ratio of left to right side, 1 means tight):

    - ``interaction_x``: ``||J||, ||K||, ||W|| <= (pi/2) ||h||_X`` (informational)
    - ``interaction_trace``: ``||W |D|^{-1}|| <= 2 ||h||_1`` (informational)
    - ``potential_ratio``: ``||V D^{-1}|| <= 2 alpha Z`` (informational)
    - ``field_upper``: ``|| |H|^s |D|^{-s} || <= (1 + kappa_r)^s``
    - ``field_lower``: ``|| |D|^s |H|^{-s} || <= (1 - kappa_r)^{-s}``
    - ``projector_weight``: ``|| |D|^{-1/2} P+ |D|^{1/2} || <= sqrt((1 + kappa_r) / (1 - kappa_r))``
    - ``spectral_gap``: ``min |spec H| >= lambda_r``
    - ``projector_lipschitz``: ``||P+_g2 - P+_g1||_Y <= a_r ||g2 - g1||_X`` (informational)
    - ``kato_herbst``: ``1/r <= (pi/2) |p|`` on the s-wave grid (radial models only)
    """
    rng = np.random.default_rng(seed)
    try:
        c = constants(m, r=r, kappa_mode=kappa_mode)
    except KappaTooLarge:
        c = None
    worst = {k: 0.0 for k in ("interaction_x", "interaction_trace", "field_upper", "field_lower", "projector_weight", "spectral_gap", "projector_lipschitz")}
    Dm = {s: m.abs_D_power(-s) for s in _POWERS}
    Dp = {s: m.abs_D_power(s) for s in _POWERS}
    Dinv_abs = m.abs_D_power(-1.0)
    for _ in range(int(samples)):
        g = random_density(m, rng)
        g2 = random_density(m, rng)
        for h in (g, g - g2):
            W = interaction_potential(m, h)
            xn = x_norm(m, h)
            if xn > 0:
                top = max(op_norm(contract_direct(m, h)), op_norm(W), op_norm(contract_exchange(m, h)))
                worst["interaction_x"] = max(worst["interaction_x"], top / (0.5 * math.pi * xn))
            t1 = trace_norm(h)
            if t1 > 0:
                worst["interaction_trace"] = max(worst["interaction_trace"], op_norm(W @ Dinv_abs) / (2 * t1))
        if c is None:
            continue
        mf = mean_field(m, g)
        for s in _POWERS:
            Hs = mf.function(lambda w: np.abs(w) ** s)
            Hms = mf.function(lambda w: np.abs(w) ** -s)
            worst["field_upper"] = max(worst["field_upper"], op_norm(Hs @ Dm[s]) / (1 + c.kappa_r) ** s)
            worst["field_lower"] = max(worst["field_lower"], op_norm(Dp[s] @ Hms) / (1 - c.kappa_r) ** -s)
        comm = op_norm(Dm[0.5] @ mf.pplus @ Dp[0.5])
        worst["projector_weight"] = max(worst["projector_weight"], comm / math.sqrt((1 + c.kappa_r) / (1 - c.kappa_r)))
        worst["spectral_gap"] = max(worst["spectral_gap"], c.lambda_r / mf.gap)
        mf2 = mean_field(m, g2)
        dx = x_norm(m, g2 - g)
        if dx > 0:
            worst["projector_lipschitz"] = max(
                worst["projector_lipschitz"], y_norm(m, mf2.pplus - mf.pplus) / (c.a_r * dx)
            )
    n = int(samples)
    rows = [
        HardyRow("interaction_x", worst["interaction_x"], 2 * n, False),
        HardyRow("interaction_trace", worst["interaction_trace"], 2 * n, False),
    ]
    if m.Z > 0:
        rows.append(HardyRow("potential_ratio", op_norm(m.V @ m.D_inv) / (2 * m.alpha * m.Z), 1, False))
    if c is not None:
        rows += [
            HardyRow("field_upper", worst["field_upper"], n, True),
            HardyRow("field_lower", worst["field_lower"], n, True),
            HardyRow("projector_weight", worst["projector_weight"], n, True),
            HardyRow("spectral_gap", worst["spectral_gap"], n, True),
            HardyRow("projector_lipschitz", worst["projector_lipschitz"], n, False),
        ]
    meta = m.basis_meta
    if meta.get("builder") == "radial_hydrogenic" and -1 in meta.get("channels", []):
        rows.append(kato_herbst_check(min(int(meta.get("n_per_channel", 20)), 40), max(n, 1000), seed))
    return HardyReport(rows=rows, constants=c)
