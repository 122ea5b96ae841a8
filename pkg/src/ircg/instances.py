"""Concrete bilevel instances and their data plumbing.

Three families ship:

* least-norm least squares: inner ``g(x) = ||Ax - b||^2 / 2`` over an
  Euclidean ball, outer ``f(x) = ||x||^2 / 2``; the target is the
  pseudoinverse solution, which gives analytic optimal values.
* ball quadratic: inner ``g(x) = x^T A x - 2 b^T x`` over the unit ball with
  a strongly convex outer ``f(x) = ||x - c||^2 / 2``; the regime where the
  accelerated rates apply.
* matrix completion: inner squared error on observed entries over a
  nuclear-norm ball, outer column-variance ``f(X) = ||U X||_F^2 / 2`` with
  ``U = I - (1/n) 11^T``.

Plus ingestion of ``::``-separated rating files and a synthetic low-rank
observation generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateEntry,
    InfeasibleOracle,
    NonFiniteValue,
    ParseError,
    PreconditionViolated,
    RadiusTooSmall,
)
from .nuclear import lmo_nuclear, nuclear_norm, project_nuclear, snb_lo, OracleMatrixProblem
from .numerics import bisect_slope_root, brent_min
from .problem import BilevelProblem, InstanceMetadata

_MEMBERSHIP_TOL = 1e-8


# ---------------------------------------------------------------------------
# Euclidean-ball domain helpers (shared by the two vector families)
# ---------------------------------------------------------------------------

def _ball_lmo(d: np.ndarray, radius: float) -> np.ndarray:
    nd = float(np.linalg.norm(d))
    if nd <= 1e-300:
        return np.zeros_like(d)  # tie-break: the center
    return (-radius / nd) * d


def _ball_proj(x: np.ndarray, radius: float) -> np.ndarray:
    nx = float(np.linalg.norm(x))
    return x if nx <= radius else (radius / nx) * x


def _ball_sliced_lmo(radius: float, c: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Minimize ``<c, v>`` over ``||v|| <= radius`` and ``<a, v> <= b``.

    Same dual device as the nuclear-ball slice: search the multiplier on
    ``radius * ||c + lam a|| + lam b`` over a bounded interval; for the
    Euclidean ball the tie-break stage is trivial because the ball oracle's
    minimizer is unique whenever the shifted cost is nonzero.
    """
    na = float(np.linalg.norm(a))
    nc = float(np.linalg.norm(c))
    scale = max(1.0, na, nc, abs(b))
    if b < -radius * na - 1e-8 * scale:
        raise InfeasibleOracle("half-space excludes the whole ball")
    if na <= 1e-12 * scale:
        return _ball_lmo(c, radius)
    if b <= -radius * na + 1e-9 * max(1.0, radius * na):
        return (-radius / na) * a  # slice pinned to the argmin of <a, .>
    if nc <= 1e-12 * scale:
        return (-radius / na) * a
    lam_hi = 2.0 * radius * nc / (b + radius * na)

    def dual_obj(lam: float) -> float:
        return radius * float(np.linalg.norm(c + lam * a)) + lam * b

    def dual_slope(lam: float) -> float:
        w = c + lam * a
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return b  # subgradient selection at the cusp
        return radius * float(a @ w) / nw + b

    lam, _ = brent_min(dual_obj, 0.0, lam_hi, tol=1e-10, cap=300)
    # same polish as the nuclear slice: Brent's relative floor is too loose
    # for the constraint to bind cleanly
    lam = bisect_slope_root(dual_slope, lam, lam_hi)
    w = c + lam * a
    nw = float(np.linalg.norm(w))
    if nw <= 1e-12 * scale:
        # cost collinear with the constraint: land exactly on the slice
        return (b / na**2) * a
    return (-radius / nw) * w


def _ball_sampler(radius: float, shape: tuple):
    def sample(rng: np.random.Generator) -> np.ndarray:
        u = rng.standard_normal(shape)
        u /= np.linalg.norm(u)
        n = int(np.prod(shape))
        r = radius * 0.95 * rng.random() ** (1.0 / n)
        return r * u

    return sample


# ---------------------------------------------------------------------------
# Least-norm least squares
# ---------------------------------------------------------------------------

def make_least_norm(A: np.ndarray, b: np.ndarray, radius: float | None = None) -> BilevelProblem:
    """Least-norm selection among least-squares solutions.

    The domain is the Euclidean ball of the given radius (default twice the
    pseudoinverse solution's norm), which must strictly contain that
    solution.  Optimal values are analytic from the pseudoinverse.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[0] != b.size:
        raise ValueError(f"incompatible shapes A {A.shape}, b {b.shape}")
    m, n = A.shape
    xstar = np.linalg.pinv(A) @ b
    norm_xstar = float(np.linalg.norm(xstar))
    if radius is None:
        radius = 2.0 * norm_xstar
    if radius <= norm_xstar:
        raise RadiusTooSmall(
            f"radius {radius} does not contain the target solution (norm {norm_xstar})"
        )
    residual = A @ xstar - b
    L_g = float(np.linalg.norm(A, 2)) ** 2

    meta = InstanceMetadata(
        f_opt=0.5 * norm_xstar**2,
        g_opt=0.5 * float(residual @ residual),
        min_f_over_X=0.0,
    )
    meta.note("f_opt", "analytic (pseudoinverse)")
    meta.note("g_opt", "analytic (pseudoinverse residual)")
    meta.note("min_f_over_X", "analytic (origin is feasible)")

    return BilevelProblem(
        name=f"least_norm-{m}x{n}",
        shape=(n,),
        eval_f=lambda x: 0.5 * float(x @ x),
        grad_f=lambda x: x.copy(),
        eval_g=lambda x: 0.5 * float(np.sum((A @ x - b) ** 2)),
        grad_g=lambda x: A.T @ (A @ x - b),
        lmo=lambda d: _ball_lmo(d, radius),
        proj=lambda x: _ball_proj(x, radius),
        sliced_lmo=lambda c, a, rhs: _ball_sliced_lmo(radius, c, a, rhs),
        membership=lambda x: float(np.linalg.norm(x)) <= radius + _MEMBERSHIP_TOL,
        sample_interior=_ball_sampler(radius, (n,)),
        L_f=1.0,
        L_g=L_g,
        diameter_D=2.0 * radius,
        x0=np.zeros(n),
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# Ball-constrained quadratic (acceleration regime)
# ---------------------------------------------------------------------------

def make_ball_quadratic(
    Aq: np.ndarray,
    bq: np.ndarray,
    f_center: np.ndarray,
    kappa: float | None = None,
    kappa_samples: int = 0,
    seed: int = 0,
) -> BilevelProblem:
    """Inner quadratic ``x^T A x - 2 b^T x`` over the unit ball, outer
    ``||x - c||^2 / 2``.

    ``A`` must be PSD with ``b`` in its column space, and the pseudoinverse
    point must satisfy the growth conditions (inside the ball; strictly
    inside when ``A`` is singular).  The quadratic-growth modulus is
    ``lambda_min(A)`` when ``A`` is positive definite; otherwise pass
    ``kappa`` or request a sampled estimate with ``kappa_samples > 0``.
    """
    Aq = np.asarray(Aq, dtype=float)
    bq = np.asarray(bq, dtype=float).reshape(-1)
    c = np.asarray(f_center, dtype=float).reshape(-1)
    n = bq.size
    if Aq.shape != (n, n) or c.size != n:
        raise ValueError("incompatible shapes for Aq, bq, f_center")
    if float(np.max(np.abs(Aq - Aq.T))) > 1e-10 * (1.0 + float(np.max(np.abs(Aq)))):
        raise PreconditionViolated("Aq must be symmetric")
    evals, evecs = np.linalg.eigh(Aq)
    tol = 1e-10 * max(1.0, float(evals[-1]))
    if evals[0] < -tol:
        raise PreconditionViolated("Aq must be positive semidefinite")

    pinv_A = np.linalg.pinv(Aq, rcond=1e-10)
    xhat = pinv_A @ bq
    if float(np.linalg.norm(Aq @ xhat - bq)) > 1e-8 * (1.0 + float(np.linalg.norm(bq))):
        raise PreconditionViolated("bq must lie in the column space of Aq")
    norm_xhat = float(np.linalg.norm(xhat))
    positive_definite = evals[0] > tol
    if positive_definite:
        if norm_xhat > 1.0 + 1e-12:
            raise PreconditionViolated(
                "definite case needs the unconstrained solution inside the ball"
            )
    else:
        if norm_xhat >= 1.0 - 1e-12:
            raise PreconditionViolated(
                "singular case needs the unconstrained solution strictly inside the ball"
            )

    null_mask = evals <= tol
    N = evecs[:, null_mask]  # orthonormal basis of the solution set's directions
    g_opt = -float(bq @ xhat)

    # Outer optimum over (xhat + span(N)) intersected with the ball: the
    # pseudoinverse point is orthogonal to the null space, so the two
    # constraints decouple in the null coordinates.
    if N.shape[1] == 0:
        x_sol = xhat
    else:
        t_unc = N.T @ (c - xhat)
        rho = float(np.sqrt(max(0.0, 1.0 - norm_xhat**2)))
        nt = float(np.linalg.norm(t_unc))
        t = t_unc if nt <= rho else (rho / nt) * t_unc
        x_sol = xhat + N @ t
    f_opt = 0.5 * float(np.sum((x_sol - c) ** 2))

    # Largest outer gradient over the solution set.
    if N.shape[1] == 0:
        G_f = float(np.linalg.norm(xhat - c))
    else:
        w = N.T @ (c - xhat)
        r = (c - xhat) - N @ w
        rho = float(np.sqrt(max(0.0, 1.0 - norm_xhat**2)))
        G_f = float(np.sqrt((np.linalg.norm(w) + rho) ** 2 + float(r @ r)))

    meta = InstanceMetadata(
        f_opt=f_opt,
        g_opt=g_opt,
        min_f_over_X=0.5 * max(0.0, float(np.linalg.norm(c)) - 1.0) ** 2,
        G_f=G_f,
        alpha_f=1.0,
        alpha_X=1.0,
    )
    meta.note("f_opt", "analytic (null-space parametrization)")
    meta.note("g_opt", "analytic (pseudoinverse)")
    meta.note("min_f_over_X", "analytic (ball projection of the center)")
    meta.note("G_f", "analytic (max over the solution set)")
    meta.note("alpha_f", "analytic")
    meta.note("alpha_X", "analytic (unit Euclidean ball)")

    def eval_g(x):
        return float(x @ (Aq @ x) - 2.0 * (bq @ x))

    def grad_g(x):
        return 2.0 * (Aq @ x - bq)

    problem = BilevelProblem(
        name=f"ball_quadratic-{n}d",
        shape=(n,),
        eval_f=lambda x: 0.5 * float(np.sum((x - c) ** 2)),
        grad_f=lambda x: x - c,
        eval_g=eval_g,
        grad_g=grad_g,
        lmo=lambda d: _ball_lmo(d, 1.0),
        proj=lambda x: _ball_proj(x, 1.0),
        sliced_lmo=lambda cc, aa, rhs: _ball_sliced_lmo(1.0, cc, aa, rhs),
        membership=lambda x: float(np.linalg.norm(x)) <= 1.0 + _MEMBERSHIP_TOL,
        sample_interior=_ball_sampler(1.0, (n,)),
        L_f=1.0,
        L_g=2.0 * float(evals[-1]),
        diameter_D=2.0,
        x0=np.zeros(n),
        metadata=meta,
    )

    if kappa is not None:
        meta.kappa = float(kappa)
        meta.note("kappa", "user-supplied")
    elif positive_definite:
        meta.kappa = float(evals[0])
        meta.note("kappa", "analytic (smallest eigenvalue)")
    elif kappa_samples > 0:
        meta.kappa = _estimate_kappa(problem, xhat, N, kappa_samples, seed)
        meta.note("kappa", f"sampled estimate over {kappa_samples} points (not certified)")
    return problem


def _estimate_kappa(problem, xhat, N, samples, seed):
    """Smallest sampled ratio of inner gap to squared distance from the
    solution set; an uncertified estimate for singular inner quadratics."""
    rng = np.random.default_rng(seed)
    g_opt = problem.metadata.g_opt
    ratios = []
    for _ in range(samples):
        x = problem.sample_interior(rng)
        y = xhat + N @ (N.T @ (x - xhat))
        ny = float(np.linalg.norm(y))
        if ny > 1.0:
            y = y / ny
        d2 = float(np.sum((x - y) ** 2))
        if d2 < 1e-16:
            continue
        ratios.append((problem.eval_g(x) - g_opt) / d2)
    if not ratios:
        return None
    return float(min(ratios))


# ---------------------------------------------------------------------------
# Matrix completion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Observations:
    """Sparse set of observed entries of an ``n_rows x n_cols`` matrix."""

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals, dtype=float)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise ValueError("rows, cols, vals must be 1-D arrays of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n_rows:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.n_cols:
                raise ValueError("column index out of range")
            keys = rows * self.n_cols + cols
            if np.unique(keys).size != keys.size:
                raise DuplicateEntry("repeated (row, col) observation")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValue("observation values must be finite")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "vals", vals)

    def __len__(self):
        return self.rows.size


def load_ratings(path, n_rows: int = 6040, n_cols: int = 3952) -> Observations:
    """Read ``UserID::MovieID::Rating::Timestamp`` lines (1-based ids).

    The timestamp is ignored.  Raises :class:`ParseError` with the offending
    line number and :class:`DuplicateEntry` on a repeated (user, movie) pair.
    """
    rows, cols, vals = [], [], []
    seen = set()
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 4 or any(p == "" for p in parts[:3]):
                raise ParseError(f"line {lineno}: expected UserID::MovieID::Rating::Timestamp")
            try:
                i, j, r = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from exc
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise ParseError(f"line {lineno}: index ({i}, {j}) out of range")
            if (i, j) in seen:
                raise DuplicateEntry(f"line {lineno}: duplicate rating for ({i}, {j})")
            seen.add((i, j))
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(r)
    return Observations(n_rows, n_cols, np.array(rows, dtype=np.int64),
                        np.array(cols, dtype=np.int64), np.array(vals))


def gen_synthetic_completion(
    n: int,
    p: int,
    rank: int,
    density: float,
    noise: float = 0.0,
    seed: int = 0,
    nuclear_scale: float | None = None,
) -> Observations:
    """Observations of a planted low-rank matrix plus optional noise.

    Entries are revealed by an independent Bernoulli(``density``) mask; the
    draw is deterministic in ``seed``.  With ``nuclear_scale`` set, the
    planted matrix is rescaled to that nuclear norm before noise, so a
    noiseless draw with ``nuclear_scale <= delta`` has inner optimum exactly
    zero (the planted matrix itself is feasible and fits every observation).
    """
    if not 1 <= rank <= min(n, p):
        raise ValueError("rank must be between 1 and min(n, p)")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    M = (rng.standard_normal((n, rank)) @ rng.standard_normal((rank, p))) / np.sqrt(rank)
    if nuclear_scale is not None:
        M *= nuclear_scale / nuclear_norm(M)
    if noise > 0:
        M = M + noise * rng.standard_normal((n, p))
    mask = rng.random((n, p)) < density
    rows, cols = np.nonzero(mask)
    return Observations(n, p, rows, cols, M[rows, cols])


def make_matrix_completion(
    obs: Observations,
    delta: float,
    known_g_opt: float | None = None,
) -> BilevelProblem:
    """Nuclear-ball matrix completion with the column-variance outer objective.

    ``f(X) = ||U X||_F^2 / 2`` with ``U = I - (1/n) 11^T`` subtracts each
    column's mean, so ``f`` is invariant to constant row shifts and both
    smoothness constants equal one.  Pass ``known_g_opt`` when the inner
    optimum is known (e.g. a noiseless planted matrix inside the ball).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    n, p = obs.n_rows, obs.n_cols
    rows, cols, vals = obs.rows, obs.cols, obs.vals

    def col_centered(X):
        return X - X.mean(axis=0, keepdims=True)

    def eval_f(X):
        return 0.5 * float(np.sum(col_centered(X) ** 2))

    def eval_g(X):
        diff = X[rows, cols] - vals
        return 0.5 * float(diff @ diff)

    def grad_g(X):
        G = np.zeros_like(X)
        G[rows, cols] = X[rows, cols] - vals
        return G

    k = min(n, p)
    x0 = np.zeros((n, p))
    x0[np.arange(k), np.arange(k)] = 0.01 * delta / k

    def sample(rng: np.random.Generator):
        G = rng.standard_normal((n, p))
        return (0.1 + 0.8 * rng.random()) * delta * G / nuclear_norm(G)

    meta = InstanceMetadata()
    if known_g_opt is not None:
        meta.g_opt = float(known_g_opt)
        meta.note("g_opt", "supplied (consistent construction)")

    return BilevelProblem(
        name=f"completion-{n}x{p}",
        shape=(n, p),
        eval_f=eval_f,
        grad_f=col_centered,
        eval_g=eval_g,
        grad_g=grad_g,
        lmo=lambda d: lmo_nuclear(d, delta),
        proj=lambda X: project_nuclear(X, delta),
        sliced_lmo=lambda C, A, b: snb_lo(OracleMatrixProblem(C, A, b, delta)).V,
        membership=lambda X: nuclear_norm(X) <= delta + _MEMBERSHIP_TOL * max(1.0, delta),
        sample_interior=sample,
        L_f=1.0,
        L_g=1.0,
        diameter_D=2.0 * delta,
        x0=x0,
        metadata=meta,
    )
