"""Explicit constants of the retraction construction and the feasibility test.

All quantities follow from ``alpha``, ``Z``, ``q``, the enlargement radius
``r`` and ``||V D^{-1}||``::

    kappa    = ||V D^{-1}|| + 2 alpha q        (or 2 alpha Z + 2 alpha q)
    kappa_r  = kappa + 2 alpha r
    lambda_0 = 1 - alpha max(q, Z),  lambda_r = lambda_0 - alpha r
    a_r      = (pi alpha / 4) (1 - kappa_r)^{-1/2} lambda_r^{-1/2}
    R        = R_fraction / (2 a_r),  k = 2 a_r R
    A        = max((2 + a_r (q + r)) / 2, 1 / (1 - k))

Feasibility requires ``alpha (Z + r) < 2 / (pi/2 + 2/pi)``,
``1 - kappa - (pi/4) alpha q > 0`` and
``pi alpha q < 2 (1 - kappa_r)^{1/2} lambda_r^{1/2} (1 - kappa - (pi/4) alpha q)^{1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..exceptions import DomainError, KappaTooLarge
from ..model.space import ModelSpace

__all__ = [
    "ConstantsReport",
    "FeasibilityRow",
    "KAPPA_MODES",
    "TIX_THRESHOLD",
    "constants",
    "constants_from_parameters",
    "feasibility_row",
    "potential_ratio",
]

KAPPA_MODES = ("matrix_exact", "hardy_bound")
TIX_THRESHOLD = 2.0 / (math.pi / 2 + 2.0 / math.pi)


@dataclass(frozen=True)
class FeasibilityRow:
    """Both sides of the smallness condition for one parameter set."""

    Z: float
    q: float
    alpha: float
    kappa: float
    lambda0: float
    lhs: float
    rhs: float
    cond1_ok: bool
    cond2_ok: bool
    margin_ok: bool

    @property
    def feasible(self) -> bool:
        return self.cond1_ok and self.cond2_ok and self.margin_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = self.feasible
        return d


@dataclass(frozen=True)
class ConstantsReport:
    """Constants for one model and one choice of ``r`` and ``R``."""

    alpha: float
    Z: float
    q: float
    r: float
    kappa_mode: str
    v_dinv_norm: float
    kappa: float
    kappa_r: float
    lambda0: float
    lambda_r: float
    a_r: float
    R_max: float
    R_fraction: float
    R_chosen: float
    A: float
    k: float
    lhs: float
    rhs: float
    cond1_ok: bool
    cond2_ok: bool
    margin_ok: bool

    @property
    def feasible(self) -> bool:
        return self.cond1_ok and self.cond2_ok and self.margin_ok

    @property
    def margin(self) -> float:
        """``1 - kappa - (pi/4) alpha q``."""
        return 1.0 - self.kappa - 0.25 * math.pi * self.alpha * self.q

    def to_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = self.feasible
        return d


def potential_ratio(m: ModelSpace) -> float:
    """``||V D^{-1}||`` on the discrete space."""
    return float(np.linalg.norm(m.V @ m.D_inv, 2))


def _kappa(alpha, Z, q, mode, v_dinv_norm):
    if mode not in KAPPA_MODES:
        raise DomainError(f"kappa_mode must be one of {KAPPA_MODES}, got {mode!r}")
    if mode == "hardy_bound":
        v_dinv_norm = 2.0 * alpha * Z
    elif v_dinv_norm is None:
        raise DomainError("matrix_exact mode needs ||V D^{-1}||")
    return float(v_dinv_norm), float(v_dinv_norm) + 2.0 * alpha * q


def feasibility_row(alpha: float, Z: float, q: float, kappa_mode: str = "hardy_bound",
                    v_dinv_norm: float | None = None, r: float = 0.0) -> FeasibilityRow:
    """Evaluate the smallness condition without raising on infeasible input."""
    _, kappa = _kappa(alpha, Z, q, kappa_mode, v_dinv_norm)
    kappa_r = kappa + 2 * alpha * r
    lambda0 = 1.0 - alpha * max(q, Z)
    lambda_r = lambda0 - alpha * r
    margin = 1.0 - kappa - 0.25 * math.pi * alpha * q
    lhs = math.pi * alpha * q
    if kappa_r < 1 and lambda_r > 0 and margin > 0:
        rhs = 2.0 * math.sqrt((1 - kappa_r) * lambda_r * margin)
    else:
        rhs = float("nan")
    return FeasibilityRow(
        Z=float(Z),
        q=float(q),
        alpha=float(alpha),
        kappa=kappa,
        lambda0=lambda0,
        lhs=lhs,
        rhs=rhs,
        cond1_ok=bool(Z > 0 and q > 0 and alpha * (Z + r) < TIX_THRESHOLD),
        cond2_ok=bool(lhs < rhs),
        margin_ok=bool(margin > 0),
    )


def constants_from_parameters(
    alpha: float,
    Z: float,
    q: float,
    r: float = 0.0,
    R_fraction: float = 0.9,
    kappa_mode: str = "hardy_bound",
    v_dinv_norm: float | None = None,
) -> ConstantsReport:
    """Constants from scalar parameters; see the module docstring for formulas."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if Z < 0 or not q > 0:
        raise DomainError("need Z >= 0 and q > 0")
    if r < 0:
        raise DomainError("r must be nonnegative")
    if not 0 < R_fraction < 1:
        raise DomainError(f"R_fraction must lie in (0, 1), got {R_fraction}")
    vd, kappa = _kappa(alpha, Z, q, kappa_mode, v_dinv_norm)
    kappa_r = kappa + 2 * alpha * r
    lambda0 = 1.0 - alpha * max(q, Z)
    lambda_r = lambda0 - alpha * r
    if kappa_r >= 1:
        raise KappaTooLarge(f"kappa_r = {kappa_r:.6g} >= 1")
    if lambda_r <= 0:
        raise KappaTooLarge(f"lambda_r = {lambda_r:.6g} <= 0")
    a_r = 0.25 * math.pi * alpha / math.sqrt((1 - kappa_r) * lambda_r)
    R_max = 1.0 / (2 * a_r)
    R = R_fraction * R_max
    k = 2 * a_r * R
    A = max((2 + a_r * (q + r)) / 2, 1.0 / (1.0 - k))
    row = feasibility_row(alpha, Z, q, kappa_mode, v_dinv_norm, r)
    return ConstantsReport(
        alpha=float(alpha),
        Z=float(Z),
        q=float(q),
        r=float(r),
        kappa_mode=kappa_mode,
        v_dinv_norm=vd,
        kappa=kappa,
        kappa_r=kappa_r,
        lambda0=lambda0,
        lambda_r=lambda_r,
        a_r=a_r,
        R_max=R_max,
        R_fraction=float(R_fraction),
        R_chosen=R,
        A=A,
        k=k,
        lhs=row.lhs,
        rhs=row.rhs,
        cond1_ok=row.cond1_ok,
        cond2_ok=row.cond2_ok,
        margin_ok=row.margin_ok,
    )


def constants(m: ModelSpace, r: float = 0.0, R_fraction: float = 0.9,
              kappa_mode: str = "matrix_exact") -> ConstantsReport:
    """Constants of ``m``; ``matrix_exact`` uses the discrete ``||V D^{-1}||``."""
    vd = potential_ratio(m) if kappa_mode == "matrix_exact" else None
    return constants_from_parameters(m.alpha, m.Z, m.q, r, R_fraction, kappa_mode, vd)
