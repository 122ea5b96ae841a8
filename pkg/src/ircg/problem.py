"""Bilevel problem abstraction.

A problem bundles an outer objective ``f`` (the selection criterion), an
inner objective ``g`` (whose minimizers over the compact convex domain ``X``
form the feasible set of interest), first-order oracles for both, a linear
minimization oracle over ``X``, and the smoothness/diameter constants the
convergence certificates need.  Points are plain dense ``numpy`` arrays; the
problem's ``shape`` fixes the layout (a length-``n`` vector or an ``n x p``
matrix).

All norms are Euclidean (Frobenius for matrices), so dual norms coincide with
primal ones; the shipped instances and constants all assume this.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue

Point = np.ndarray


@dataclass
class InstanceMetadata:
    """Known constants of an instance, each with a provenance note.

    ``provenance`` maps a field name to how the value was obtained
    (``"analytic"`` or ``"long-run numeric"`` style notes).  Fields are None
    when unknown.
    """

    f_opt: Optional[float] = None
    g_opt: Optional[float] = None
    min_f_over_X: Optional[float] = None
    kappa: Optional[float] = None
    G_f: Optional[float] = None
    alpha_f: Optional[float] = None
    alpha_X: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    def note(self, name: str, how: str):
        self.provenance[name] = how


@dataclass(frozen=True)
class BilevelProblem:
    """Immutable problem data; safe to share across concurrent runs.

    ``lmo`` maps a gradient-like array to a minimizer of the induced linear
    form over ``X``.  ``proj`` (Euclidean projection onto ``X``) and
    ``sliced_lmo`` (linear minimization over ``X`` intersected with a
    half-space ``<a, v> <= b``) are optional; methods that need them check.
    ``membership`` tests ``x in X`` within the instance's tolerance and
    ``sample_interior`` draws gradient-check points.
    """

    name: str
    shape: tuple
    eval_f: Callable[[Point], float]
    grad_f: Callable[[Point], Point]
    eval_g: Callable[[Point], float]
    grad_g: Callable[[Point], Point]
    lmo: Callable[[Point], Point]
    L_f: float
    L_g: float
    diameter_D: float
    x0: Point
    proj: Optional[Callable[[Point], Point]] = None
    sliced_lmo: Optional[Callable[[Point, Point, float], Point]] = None
    membership: Optional[Callable[[Point], bool]] = None
    sample_interior: Optional[Callable[[np.random.Generator], Point]] = None
    metadata: InstanceMetadata = field(default_factory=InstanceMetadata)

    def __post_init__(self):
        if min(self.L_f, self.L_g, self.diameter_D) <= 0:
            raise ValueError("L_f, L_g and diameter_D must be positive")
        if tuple(self.x0.shape) != tuple(self.shape):
            raise DimensionMismatch(
                f"x0 has shape {self.x0.shape}, expected {self.shape}"
            )


def check_point(problem: BilevelProblem, x: Point) -> Point:
    """Validate layout and finiteness of a point for this problem."""
    x = np.asarray(x, dtype=float)
    if tuple(x.shape) != tuple(problem.shape):
        raise DimensionMismatch(f"point has shape {x.shape}, expected {problem.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("point has non-finite entries")
    return x


def _finite_scalar(value: float, what: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise NonFiniteValue(f"{what} returned a non-finite value")
    return value


def eval_phi(problem: BilevelProblem, sigma: float, x: Point) -> float:
    """Combined objective ``sigma * f(x) + g(x)``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = check_point(problem, x)
    fx = _finite_scalar(problem.eval_f(x), "f")
    gx = _finite_scalar(problem.eval_g(x), "g")
    return sigma * fx + gx


def grad_phi(problem: BilevelProblem, sigma: float, x: Point) -> Point:
    """Gradient of the combined objective, ``sigma * grad f(x) + grad g(x)``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = check_point(problem, x)
    out = sigma * problem.grad_f(x) + problem.grad_g(x)
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue("gradient has non-finite entries")
    return out


@dataclass(frozen=True)
class GradCheckReport:
    """Worst relative error of each analytic gradient against central
    finite differences, with the evaluation points used."""

    max_rel_err_f: float
    max_rel_err_g: float
    points: list


def check_gradients(
    problem: BilevelProblem,
    samples: int = 20,
    h: float = 1e-6,
    seed: int = 0,
    directions: int = 4,
) -> GradCheckReport:
    """Directional finite-difference check of both gradients.

    At ``samples`` random interior points, compares ``<grad, u>`` against the
    central difference ``(F(x + h u) - F(x - h u)) / (2 h)`` along random unit
    directions; the relative error uses a unit absolute floor.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if h <= 0:
        raise ValueError("h must be positive")
    if problem.sample_interior is None:
        raise ValueError(f"instance {problem.name!r} has no interior sampler")
    rng = np.random.default_rng(seed)
    worst_f, worst_g, pts = 0.0, 0.0, []
    for _ in range(samples):
        x = check_point(problem, problem.sample_interior(rng))
        pts.append(x)
        gf, gg = problem.grad_f(x), problem.grad_g(x)
        for _ in range(directions):
            u = rng.standard_normal(problem.shape)
            u /= np.linalg.norm(u)
            xp, xm = x + h * u, x - h * u
            for eval_fn, grad, is_f in ((problem.eval_f, gf, True), (problem.eval_g, gg, False)):
                fd = (_finite_scalar(eval_fn(xp), "objective") - _finite_scalar(eval_fn(xm), "objective")) / (2 * h)
                exact = float(np.vdot(grad, u))
                err = abs(fd - exact) / max(1.0, abs(exact))
                if is_f:
                    worst_f = max(worst_f, err)
                else:
                    worst_g = max(worst_g, err)
    return GradCheckReport(worst_f, worst_g, pts)
