"""Random models with the structure the estimates rely on.

``D`` is diagonal with entries ``+-e_i``, ``e_i >= 1``.  ``V`` is negative
semidefinite with ``||V|| <= potential_scale``, and the stored charge is
``Z = potential_scale / alpha`` so that ``||V D^{-1}|| <= alpha Z`` mirrors the
Coulomb bound.  The interaction factors are positive semidefinite with
``sum_a ||L_a||^2 = strength * pi / 4``; this gives ``||W_h|| <= (pi/2)||h||_1``
for every Hermitian ``h`` and ``W_gamma >= 0`` for ``gamma >= 0``.
"""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import DomainError
from .space import DEFAULT_ALPHA, ModelSpace

__all__ = ["build_synthetic"]


def _random_unitary(rng: np.random.Generator, n: int, complex_: bool) -> np.ndarray:
    A = rng.standard_normal((n, n))
    if complex_:
        A = A + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def build_synthetic(
    seed: int,
    dim: int = 8,
    interaction_rank: int = 3,
    potential_scale: float = 0.1,
    q: float = 1.0,
    alpha: float = DEFAULT_ALPHA,
    interaction_strength: float = 1.0,
    spread: float = 2.0,
    n_bound: int | None = None,
    complex_: bool = True,
) -> ModelSpace:
    """Seeded synthetic model.

    Parameters
    ----------
    seed : int
        Seed of the generator; equal seeds give bitwise equal models.
    dim : int
        Even dimension, at least 4.
    interaction_rank : int
        Number of repulsion factors; ``0`` switches the interaction off.
    potential_scale : float
        Operator-norm bound on ``V``.
    q, alpha : float
        Particle budget and coupling.
    interaction_strength : float
        Fraction in ``[0, 1]`` of the largest factor norm compatible with the
        Hardy-type bounds.
    spread : float
        Free energies are drawn from ``[1, 1 + spread]``.
    n_bound : int, optional
        Number of positive free energies placed just above 1 so that the
        potential creates bound states.  Defaults to ``min(dim // 2, 4)``.
    complex_ : bool
        Draw complex Hermitian ``V`` and factors.
    """
    dim = int(dim)
    if dim < 4 or dim % 2:
        raise DomainError(f"dim must be an even integer >= 4, got {dim}")
    if int(interaction_rank) < 0:
        raise DomainError("interaction_rank must be nonnegative")
    if potential_scale < 0:
        raise DomainError("potential_scale must be nonnegative")
    if not 0 <= interaction_strength <= 1:
        raise DomainError("interaction_strength must lie in [0, 1]")
    if spread < 0:
        raise DomainError("spread must be nonnegative")
    rng = np.random.default_rng(seed)
    half = dim // 2
    nb = min(half, 4) if n_bound is None else int(n_bound)
    if not 0 <= nb <= half:
        raise DomainError(f"n_bound must lie in [0, {half}]")

    pos = np.sort(1.0 + spread * rng.random(half))
    pos[:nb] = 1.0 + 1e-3 * np.arange(nb)
    pos = np.sort(pos)
    neg = -np.sort(1.0 + spread * rng.random(half))[::-1]
    D = np.diag(np.concatenate([neg, pos])).astype(complex if complex_ else float)

    U = _random_unitary(rng, dim, complex_)
    v = rng.random(dim)
    V = np.zeros((dim, dim), dtype=D.dtype)
    if potential_scale > 0 and v.max() > 0:
        v *= potential_scale / v.max()
        V = -(U * v) @ U.conj().T
        V = 0.5 * (V + V.conj().T)

    rank = int(interaction_rank)
    factors = np.zeros((rank, dim, dim), dtype=D.dtype)
    cols = max(1, dim // 4)
    total = interaction_strength * math.pi / 4
    for a in range(rank):
        G = rng.standard_normal((dim, cols))
        if complex_:
            G = G + 1j * rng.standard_normal((dim, cols))
        L = G @ G.conj().T
        L = 0.5 * (L + L.conj().T)
        norm = np.linalg.norm(L, 2)
        factors[a] = L * (math.sqrt(total / rank) / norm) if total > 0 else 0.0
    meta = {
        "builder": "synthetic",
        "seed": int(seed),
        "interaction_rank": rank,
        "potential_scale": float(potential_scale),
        "interaction_strength": float(interaction_strength),
        "spread": float(spread),
        "n_bound": nb,
        "complex": bool(complex_),
    }
    return ModelSpace(D=D, V=V, factors=factors, alpha=alpha, Z=potential_scale / alpha, q=q, basis_meta=meta)
