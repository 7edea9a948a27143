"""Iteration of self-maps whose successive increments contract.

The engine is agnostic about the state space: the caller supplies the map,
the metric and the initial state.  If ``d(T^2 x, T x) <= k d(T x, x)`` with
``k < 1`` then ``T^p x`` converges to a fixed point ``theta(x)`` and

    d(theta(x), T^p x) <= k**p / (1 - k) * d(T x, x),

which is what :func:`error_bound` evaluates.  Unlike Banach's theorem the map
need not be a contraction, so the limit depends on ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .exceptions import DimensionMismatch, DomainError, MaxIterExceeded, RatioAboveOne

__all__ = [
    "FixConfig",
    "IterationTrace",
    "iterate_to_fix",
    "error_bound",
    "propagate_differential",
]

RATIO_SLACK = 1e-9


@dataclass(frozen=True)
class FixConfig:
    """Stopping rule for :func:`iterate_to_fix`.

    Parameters
    ----------
    tol : float
        Stop as soon as ``dist(step(x), x) <= tol``.
    max_iter : int
        Number of applications of ``step`` allowed.
    k_cap : float, optional
        Declared contraction bound.  When set, any observed ratio above
        ``k_cap * (1 + 1e-9)`` raises :class:`RatioAboveOne`.
    """

    tol: float = 1e-12
    max_iter: int = 500
    k_cap: float | None = None

    def __post_init__(self):
        if not self.tol >= 0:
            raise DomainError(f"tol must be >= 0, got {self.tol}")
        if int(self.max_iter) < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.k_cap is not None and not 0 < self.k_cap < 1:
            raise DomainError(f"k_cap must lie in (0, 1), got {self.k_cap}")


@dataclass
class IterationTrace:
    """Residual history of one run.

    ``residuals[p]`` is ``d(T^{p+1} x, T^p x)``; ``ratios[p]`` is
    ``residuals[p+1] / residuals[p]`` and is only recorded while the
    denominator is positive.
    """

    residuals: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    def to_dict(self) -> dict:
        return {
            "residuals": list(self.residuals),
            "ratios": list(self.ratios),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def iterate_to_fix(
    step: Callable[[Any], Any],
    dist: Callable[[Any, Any], float],
    x0: Any,
    cfg: FixConfig | None = None,
) -> tuple[Any, IterationTrace]:
    """Iterate ``step`` from ``x0`` until the increment drops below ``cfg.tol``.

    Returns the last iterate ``x_p`` (not ``step(x_p)``) together with the
    trace; ``trace.iterations`` counts the productive updates, so a fixed
    point passed as ``x0`` comes back after zero iterations.
    """
    cfg = cfg or FixConfig()
    trace = IterationTrace()
    x = x0
    for _ in range(int(cfg.max_iter)):
        y = step(x)
        d = float(dist(y, x))
        if trace.residuals and trace.residuals[-1] > 0:
            ratio = d / trace.residuals[-1]
            trace.ratios.append(ratio)
            if cfg.k_cap is not None and ratio > cfg.k_cap * (1 + RATIO_SLACK):
                trace.residuals.append(d)
                raise RatioAboveOne(
                    f"observed ratio {ratio:.6g} exceeds declared k={cfg.k_cap:.6g} "
                    f"at iteration {trace.iterations}",
                    trace=trace,
                    last=x,
                )
        trace.residuals.append(d)
        if d <= cfg.tol:
            trace.converged = True
            return x, trace
        x = y
        trace.iterations += 1
    raise MaxIterExceeded(
        f"residual {trace.residuals[-1]:.3e} above tol {cfg.tol:.1e} after {cfg.max_iter} iterations",
        trace=trace,
        last=x,
    )


def error_bound(k: float, first_residual: float, p: int) -> float:
    """A priori bound ``k**p / (1 - k) * first_residual`` on ``d(theta(x), T^p x)``."""
    if not 0 < k < 1:
        raise DomainError(f"contraction factor must lie in (0, 1), got {k}")
    if first_residual < 0 or p < 0:
        raise DomainError("first_residual and p must be nonnegative")
    return k**p / (1 - k) * first_residual


def propagate_differential(
    step_diff: Callable[[Any, Any], Any],
    trajectory: Sequence[Any],
    h: Any,
) -> Any:
    """Chain rule for ``d(T^p)(x) h`` along ``trajectory = [x, T x, ..., T^{p-1} x]``.

    ``step_diff(y, v)`` must return ``dT(y) v``.  An empty trajectory gives
    back ``h`` (``p = 0``).
    """
    for y in trajectory:
        if np.shape(y) != np.shape(h):
            raise DimensionMismatch(
                f"tangent of shape {np.shape(h)} does not match state of shape {np.shape(y)}"
            )
        h = step_diff(y, h)
    return h
