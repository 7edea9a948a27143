"""Radial kinetically balanced basis for a single nucleus.

Each relativistic channel ``kappa`` contributes ``n`` large-component
functions ``P_k`` (orthonormal generalized Laguerre functions with the
centrifugal exponent ``l + 1``) and ``n`` small-component functions obtained
from ``(d/dr + kappa/r) P_k`` and orthonormalized.  In this basis the free
Dirac matrix is ``[[I, B], [B^T, -I]]`` with ``B = S_Q^{1/2}``, so its
spectrum automatically avoids ``(-1, 1)``.

The repulsion is the spherical average of ``1/|x - y|``, i.e. the kernel
``1/max(r, r')``, written as ``int_0^inf H(t - r) H(t - r') t^{-2} dt``.
Discretizing the ``t`` integral gives factors ``L_a = sqrt(w_a) / t_a * C(t_a)``
with ``C_ij(t) = int_0^t phi_i phi_j dr``, each one positive semidefinite.
Only one orbital per radial function is kept (no magnetic degeneracy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dst
from scipy.special import erf, gammaln

from ..exceptions import DomainError, QuadratureFailure, SubcriticalityViolated
from .space import DEFAULT_ALPHA, ModelSpace

__all__ = [
    "build_radial_hydrogenic",
    "channel_quantum_numbers",
    "dirac_coulomb_ground_energy",
    "kato_herbst_matrices",
]

_ORTHO_TOL = 1e-8
_X_LOW = 1e-6
_X_CUT = 700.0  # Gauss-Laguerre nodes beyond this carry no weight in double precision


def channel_quantum_numbers(kappa: int) -> tuple[int, int]:
    """Orbital angular momentum ``l`` of the large component and exponent ``s = l + 1``."""
    kappa = int(kappa)
    if kappa == 0:
        raise DomainError("kappa = 0 is not a relativistic channel")
    ell = kappa if kappa > 0 else -kappa - 1
    return ell, ell + 1


def dirac_coulomb_ground_energy(Z: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Lowest bound state ``sqrt(1 - (alpha Z)^2)`` of the point-nucleus Dirac operator."""
    if alpha * Z >= 1:
        raise SubcriticalityViolated(f"alpha*Z = {alpha * Z} >= 1")
    return math.sqrt(1.0 - (alpha * Z) ** 2)


def _laguerre_functions(n: int, a: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``f_k(x) = c_k x^{a/2} e^{-x/2} L_k^{(a)}(x)`` and ``f_k'`` for ``k < n``."""
    x = np.asarray(x, dtype=float)
    L = np.zeros((n + 1, x.size))
    L[0] = 1.0
    if n > 0:
        L[1] = 1.0 + a - x
    for k in range(1, n):
        L[k + 1] = ((2 * k + 1 + a - x) * L[k] - (k + a) * L[k - 1]) / (k + 1)
    dL = np.zeros_like(L)
    for k in range(1, n + 1):
        dL[k] = (k * L[k] - (k + a) * L[k - 1]) / x
    k = np.arange(n + 1)
    norm = np.exp(0.5 * (gammaln(k + 1) - gammaln(k + a + 1)))[:, None]
    env = np.exp(0.5 * a * np.log(x) - 0.5 * x)
    f = norm * L * env
    df = norm * (dL * env + L * env * (0.5 * a / x - 0.5))
    return f[:n], df[:n]


def _inv_sqrt(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, U = np.linalg.eigh(S)
    if w.min() <= 0:
        raise QuadratureFailure("basis overlap is not positive definite")
    return (U / np.sqrt(w)) @ U.T, (U * np.sqrt(w)) @ U.T


@dataclass(frozen=True)
class _Channel:
    """One kappa channel in the scaled variable ``x = 2 beta r``.

    Functions are normalized for ``dx``; multiply by ``sqrt(2 beta)`` for ``dr``.
    """

    kappa: int
    n: int
    a: float
    XP: np.ndarray
    XQ: np.ndarray

    def values(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        f, df = _laguerre_functions(self.n, self.a, x)
        P = self.XP @ f
        dP = self.XP @ df
        Qt = dP + self.kappa * P / x
        return P, self.XQ @ Qt


def _gauss_laguerre(nq: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.laguerre.laggauss(nq)
    keep = (x < _X_CUT) & (w > 0)
    x, w = x[keep], w[keep]
    return x, w * np.exp(x)


def _build_channel(kappa: int, n: int, nq: int):
    ell, s = channel_quantum_numbers(kappa)
    a = 2.0 * s
    x, w = _gauss_laguerre(nq)
    f, df = _laguerre_functions(n, a, x)
    SP = (f * w) @ f.T
    if np.abs(SP - np.eye(n)).max() > _ORTHO_TOL:
        raise QuadratureFailure(f"large-component overlap deviates from identity (kappa={kappa})")
    XP, _ = _inv_sqrt(SP)
    P = XP @ f
    Qt = XP @ df + kappa * P / x
    SQ = (Qt * w) @ Qt.T
    XQ, B = _inv_sqrt(SQ)
    ch = _Channel(kappa=int(kappa), n=n, a=a, XP=XP, XQ=XQ)
    return ch, B, x, w


def _nuclear_profile(x: np.ndarray, beta: float, width: float | None) -> np.ndarray:
    """``1/r`` (point nucleus) or ``erf(r/width)/r`` (Gaussian nucleus), in units of ``2 beta``."""
    if width is None:
        return 1.0 / x
    r = x / (2 * beta)
    return erf(r / width) / x


def _panel_nodes(lo: float, hi: float, width: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule for ``int_lo^hi du``."""
    npanel = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, npanel + 1)
    g, gw = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * g).ravel(), (half * gw).ravel()


def _cumulative_overlaps(ch: _Channel, taus: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """``C(tau) = int_0^tau phi_i phi_j dx`` for both components at increasing ``taus``."""
    g, gw = np.polynomial.legendre.leggauss(order)
    CP = np.zeros((taus.size, ch.n, ch.n))
    CQ = np.zeros_like(CP)
    accP = np.zeros((ch.n, ch.n))
    accQ = np.zeros_like(accP)
    left = 0.0
    for i, right in enumerate(taus):
        xs = 0.5 * (right + left) + 0.5 * (right - left) * g
        ws = 0.5 * (right - left) * gw
        P, Q = ch.values(xs)
        accP = accP + (P * ws) @ P.T
        accQ = accQ + (Q * ws) @ Q.T
        CP[i], CQ[i] = accP, accQ
        left = right
    return CP, CQ


def _compress_factors(L: np.ndarray, rtol: float = 1e-15) -> np.ndarray:
    """Orthogonal remixing of the factors keeping only significant directions.

    ``sum_a L_a (x) L_a`` is invariant under ``L -> O L`` with ``O`` orthogonal,
    so direct and exchange terms are unchanged up to the discarded tail.
    """
    r, n, _ = L.shape
    M = L.reshape(r, n * n)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > rtol * s[0] if s.size and s[0] > 0 else np.zeros(0, dtype=bool)
    F = (s[keep, None] * Vt[keep]).reshape(-1, n, n)
    return 0.5 * (F + np.swapaxes(F, 1, 2))


def build_radial_hydrogenic(
    Z: float,
    channels=(-1,),
    n_per_channel: int = 30,
    alpha: float = DEFAULT_ALPHA,
    q: float = 1.0,
    scale: float | None = None,
    nucleus_width: float | None = None,
    interaction: bool = True,
    t_panel_width: float = 0.5,
    t_order: int = 10,
) -> ModelSpace:
    """Discretize a one-center Dirac-Fock problem in a radial Laguerre basis.

    Parameters
    ----------
    Z : float
        Nuclear charge.
    channels : sequence of int
        Relativistic quantum numbers ``kappa`` (``-1`` is s1/2, ``1`` p1/2, ``-2`` p3/2, ...).
    n_per_channel : int
        Number of large-component functions per channel; the channel adds
        twice this many basis vectors.
    alpha : float
        Coupling constant.
    q : float
        Particle-number budget stored on the model.
    scale : float, optional
        Exponent ``beta`` of the basis functions ``~ exp(-beta r)``.  Defaults
        to ``alpha * Z`` (the hydrogenic 1s exponent), or ``alpha`` if ``Z = 0``.
    nucleus_width : float, optional
        Width of a Gaussian nuclear charge; point nucleus when omitted.
    interaction : bool
        Attach the monopole repulsion factors.
    t_panel_width, t_order : float, int
        Panel width in ``log t`` and Gauss-Legendre order per panel for the
        kernel quadrature.

    Returns
    -------
    ModelSpace
        Basis ordered channel by channel, large components first.
    """
    if Z < 0:
        raise DomainError(f"Z must be nonnegative, got {Z}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if alpha * Z >= 1:
        raise SubcriticalityViolated(f"alpha*Z = {alpha * Z:.6g} >= 1: point-nucleus Coulomb operator is supercritical")
    channels = [int(k) for k in channels]
    if not channels:
        raise DomainError("at least one channel is required")
    if len(set(channels)) != len(channels):
        raise DomainError(f"duplicate channels in {channels}")
    n = int(n_per_channel)
    if n < 1:
        raise DomainError(f"n_per_channel must be >= 1, got {n_per_channel}")
    if nucleus_width is not None and not nucleus_width > 0:
        raise DomainError("nucleus_width must be positive")
    beta = float(scale) if scale is not None else (alpha * Z if Z > 0 else alpha)
    if not beta > 0:
        raise DomainError(f"scale must be positive, got {scale}")

    dim = 2 * n * len(channels)
    D = np.zeros((dim, dim))
    V = np.zeros((dim, dim))
    built = []
    for c, kappa in enumerate(channels):
        _, s = channel_quantum_numbers(kappa)
        nq = 2 * n + 2 * s + 20 + (40 if nucleus_width is not None else 0)
        ch, B, x, w = _build_channel(kappa, n, nq)
        P, Q = ch.values(x)
        prof = _nuclear_profile(x, beta, nucleus_width)
        o = 2 * n * c
        p_sl, q_sl = slice(o, o + n), slice(o + n, o + 2 * n)
        D[p_sl, p_sl] = np.eye(n)
        D[q_sl, q_sl] = -np.eye(n)
        # d/dr = 2 beta d/dx
        D[p_sl, q_sl] = 2 * beta * B
        D[q_sl, p_sl] = 2 * beta * B.T
        # <phi|1/r|phi> in r-units is 2 beta times the x-units value
        V[p_sl, p_sl] = -alpha * Z * 2 * beta * ((P * w * prof) @ P.T)
        V[q_sl, q_sl] = -alpha * Z * 2 * beta * ((Q * w * prof) @ Q.T)
        built.append(ch)
    D = 0.5 * (D + D.T)
    V = 0.5 * (V + V.T)

    factors = np.zeros((0, dim, dim))
    t_meta = {}
    if interaction:
        s_max = max(channel_quantum_numbers(k)[1] for k in channels)
        x_hi = 4.0 * n + 4.0 * s_max + 80.0
        u, wu = _panel_nodes(math.log(_X_LOW), math.log(x_hi), t_panel_width, t_order)
        taus = np.exp(u)
        order = n + s_max + 30
        raw = np.zeros((taus.size + 1, dim, dim))
        for c, ch in enumerate(built):
            CP, CQ = _cumulative_overlaps(ch, np.append(taus, x_hi), order)
            tail_dev = max(np.abs(CP[-1] - np.eye(n)).max(), np.abs(CQ[-1] - np.eye(n)).max())
            if tail_dev > 1e-10:
                raise QuadratureFailure(f"cumulative overlaps do not reach identity (deviation {tail_dev:.2e})")
            o = 2 * n * c
            for blk, C in ((slice(o, o + n), CP), (slice(o + n, o + 2 * n), CQ)):
                raw[:-1, blk, blk] = C[:-1]
                raw[-1, blk, blk] = C[-1]
        # kernel 1/max(r, r') = 2 beta int H(tau - x) H(tau - x') tau^{-2} dtau, with tau = e^u
        weights = np.append(2 * beta * wu / taus, 2 * beta / x_hi)
        raw *= np.sqrt(weights)[:, None, None]
        factors = _compress_factors(raw)
        t_meta = {"t_nodes": int(taus.size) + 1, "rank": int(factors.shape[0]), "x_hi": x_hi}

    meta = {
        "builder": "radial_hydrogenic",
        "channels": channels,
        "n_per_channel": n,
        "scale": beta,
        "nucleus": "point" if nucleus_width is None else {"gaussian_width": float(nucleus_width)},
        "interaction": "monopole" if interaction else "none",
        **t_meta,
    }
    return ModelSpace(D=D, V=V, factors=factors, alpha=alpha, Z=Z, q=q, basis_meta=meta)


def kato_herbst_matrices(
    n: int = 20,
    scale: float = 1.0,
    box_factor: float = 4.0,
    grid: int = 1 << 14,
) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin matrices of ``1/|x|`` and ``|p|`` on ``l = 0`` large components.

    For ``f(x) = u(r) / (sqrt(4 pi) r)`` one has ``<f, |x|^{-1} f> = int u^2 / r``
    and ``<f, |p| f> = int k |u_hat(k)|^2 dk`` with the sine transform
    ``u_hat``.  The first matrix is exact (Gauss-Laguerre).  The second is
    computed with a type-I discrete sine transform on a uniform grid in a box
    ``box_factor`` times wider than the support of the functions.

    Returns
    -------
    A, M : ndarray
        ``A_ij = <u_i, r^{-1} u_j>``, ``M_ij = <u_i, |p| u_j>``.
    """
    ch, _, x, w = _build_channel(-1, n, 2 * n + 22)
    P, _ = ch.values(x)
    A = 2 * scale * ((P * w / x) @ P.T)
    x_hi = 4.0 * n + 80.0
    box = box_factor * x_hi
    h = box / grid
    xs = h * np.arange(1, grid)
    U, _ = ch.values(xs)
    # u(x) = sum_m c_m sqrt(2/box) sin(m pi x / box), c_m = sqrt(2/box) * h * DST-I / 2
    c = dst(U, type=1, axis=1) * (0.5 * h) * math.sqrt(2.0 / box)
    k = np.pi * np.arange(1, grid) / box
    M = 2 * scale * ((c * k) @ c.T)
    return 0.5 * (A + A.T), 0.5 * (M + M.T)
