"""Scalar and spectral primitives.

Bounded Brent minimization, leading singular triplet and leading eigenspace
extraction, and Euclidean projection onto the capped simplex
``{s : sum(s) <= delta, s >= 0}``.  These are the building blocks of the
nuclear-norm oracles and the line-search step rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg as sla
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import NonConvergence, NonFiniteValue, ZeroMatrix

# Start-vector seed for the Krylov iterations: fixed, so repeated runs of the
# same problem produce bit-identical oracle outputs.
_KRYLOV_SEED = 20240
# Below this Gram dimension a dense symmetric eigensolve beats ARPACK.
_DENSE_CUTOFF = 48


@dataclass(frozen=True)
class SingularTriplet:
    """Leading singular value of a matrix with unit singular vectors."""

    sigma_max: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class Eigenspace:
    """Leading eigenvalue and an orthonormal basis of the eigenvectors whose
    eigenvalues sit within the relative gap tolerance of it."""

    lambda_max: float
    basis: np.ndarray  # (p, dim), orthonormal columns


def brent_min(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    cap: int = 100,
) -> tuple[float, float]:
    """Minimize a scalar function on ``[lo, hi]`` with the bounded Brent method.

    Returns ``(argmin, value)``.  Raises :class:`NonConvergence` if the
    iteration cap is exhausted before the interval shrinks to ``tol``.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = minimize_scalar(
        f, bounds=(lo, hi), method="bounded", options={"xatol": tol, "maxiter": cap}
    )
    if not res.success:
        raise NonConvergence(f"bounded Brent hit the {cap}-iteration cap on [{lo}, {hi}]")
    x, fx = float(res.x), float(res.fun)
    # The bounded method stays tol away from the ends; snap to an endpoint when
    # it is at least as good, so monotone functions return the boundary.
    for edge in (lo, hi):
        fe = float(f(edge))
        if fe <= fx:
            x, fx = edge, fe
    return x, fx


def bisect_slope_root(slope: Callable[[float], float], lam0: float,
                      lam_hi: float, rounds: int = 120) -> float:
    """Refine the minimizer of a convex scalar function from its slope.

    ``slope`` must be nondecreasing (a subgradient selection of a convex
    function works, jumps included).  Starting from ``lam0`` (e.g. a Brent
    output whose built-in relative tolerance is too loose), grows a
    sign-changing bracket and bisects it down to machine precision.  Returns
    0.0 when the slope is already nonnegative at the origin and ``lam_hi``
    when it is still negative there.
    """
    if slope(0.0) >= 0.0:
        return 0.0
    lo, hi = 0.0, max(lam_hi, lam0)
    step = max(1e-3 * (1.0 + lam0), 1e-6)
    cand = max(lam0 - step, 0.0)
    if slope(cand) < 0.0:
        lo = cand
    cand = lam0 + step
    while slope(cand) < 0.0 and cand < hi:
        lo = cand
        cand = min(2.0 * cand + step, hi)
    hi = cand
    if slope(hi) < 0.0:
        return hi
    for _ in range(rounds):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if slope(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _sign_fix(u: np.ndarray) -> float:
    """Sign making the first significantly nonzero coordinate of ``u`` positive."""
    amax = np.max(np.abs(u))
    if amax == 0.0:
        return 1.0
    idx = np.argmax(np.abs(u) > 1e-12 * amax)
    return 1.0 if u[idx] >= 0 else -1.0


def _leading_eigvec_gram(G: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the largest eigenvalue of a small/medium symmetric
    PSD matrix, via a dense solve below the cutoff and restarted Lanczos above."""
    k = G.shape[0]
    if k < _DENSE_CUTOFF:
        _, vecs = sla.eigh(G)
        return vecs[:, -1]
    rng = np.random.default_rng(_KRYLOV_SEED)
    for attempt in range(3):
        v0 = rng.standard_normal(k)
        try:
            _, vecs = eigsh(G, k=1, which="LA", v0=v0, maxiter=5000 * (attempt + 1))
            return vecs[:, 0]
        except ArpackNoConvergence:
            continue
    _, vecs = sla.eigh(G)
    return vecs[:, -1]


def leading_singular_triplet(C: np.ndarray, tol: float = 1e-10) -> SingularTriplet:
    """Leading singular triplet ``(sigma, u, v)`` of a real matrix.

    The right vector comes from the Gram matrix of the smaller side (Lanczos
    for large sides, dense symmetric solve for small ones); the left vector is
    ``C v / sigma``, so the residual ``C v - sigma u`` vanishes by
    construction.  Signs are fixed so the first nonzero coordinate of ``u`` is
    positive.  Raises :class:`ZeroMatrix` when ``sigma_max`` is numerically
    zero.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2:
        raise ValueError("expected a 2-D array")
    if not np.all(np.isfinite(C)):
        raise NonFiniteValue("matrix has non-finite entries")
    scale = float(np.linalg.norm(C))
    zero_tol = 1e-12 * max(1.0, scale)
    if scale <= zero_tol:
        raise ZeroMatrix("zero matrix has no leading singular direction")

    n, p = C.shape
    transposed = n < p
    M = C.T if transposed else C  # tall: rows >= cols
    G = M.T @ M
    v = _leading_eigvec_gram(G)
    # One power-iteration polish tightens the pair beyond the Gram solve.
    w = M @ v
    sigma = float(np.linalg.norm(w))
    if sigma > zero_tol:
        v = M.T @ (w / sigma)
        v /= np.linalg.norm(v)
        w = M @ v
        sigma = float(np.linalg.norm(w))
    if sigma <= zero_tol:
        raise ZeroMatrix("leading singular value is numerically zero")
    u = w / sigma
    if transposed:
        u, v = v, u
    s = _sign_fix(u)
    return SingularTriplet(sigma, s * u, s * v)


def sigma_max(C: np.ndarray) -> float:
    """Largest singular value; 0.0 for a numerically zero matrix."""
    try:
        return leading_singular_triplet(C).sigma_max
    except ZeroMatrix:
        return 0.0


def leading_eigenspace(M: np.ndarray, rel_gap_tol: float = 1e-10) -> Eigenspace:
    """Leading eigenvalue of a symmetric PSD matrix with the orthonormal basis
    of all eigenvectors whose eigenvalues reach ``(1 - rel_gap_tol)`` of it.

    Exact multiplicity is numerically meaningless, so the returned dimension
    is defined by the gap threshold.  Raises :class:`ZeroMatrix` when the
    leading eigenvalue is numerically zero.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise NonFiniteValue("matrix has non-finite entries")
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    if float(np.max(np.abs(M - M.T))) > 1e-8 * (1.0 + scale):
        raise ValueError("matrix is not symmetric within tolerance")
    H = 0.5 * (M + M.T)
    vals, vecs = sla.eigh(H)
    lam_max = float(vals[-1])
    if lam_max <= 1e-12 * max(1.0, scale):
        raise ZeroMatrix("leading eigenvalue is numerically zero")
    if vals[0] < -1e-8 * max(1.0, lam_max):
        raise ValueError("matrix is not PSD within tolerance")
    keep = vals >= (1.0 - rel_gap_tol) * lam_max
    basis = vecs[:, keep]
    for j in range(basis.shape[1]):
        basis[:, j] *= _sign_fix(basis[:, j])
    return Eigenspace(lam_max, basis)


def simplex_cap_projection(x: np.ndarray, delta: float) -> np.ndarray:
    """Euclidean projection onto ``{s : sum(s) <= delta, s >= 0}``.

    If clipping to the nonnegative orthant already satisfies the sum cap, that
    clip is the projection; otherwise the cap is active and the sort-and-
    threshold simplex projection applies.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-D array")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("vector has non-finite entries")
    if delta <= 0:
        raise ValueError("delta must be positive")
    y = np.maximum(x, 0.0)
    if y.sum() <= delta:
        return y
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, x.size + 1)
    rho = int(np.max(np.nonzero(u - (css - delta) / j > 0)[0])) + 1
    theta = (css[rho - 1] - delta) / rho
    return np.maximum(x - theta, 0.0)
