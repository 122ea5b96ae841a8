"""Reference solvers for the benchmark: IR-PG, CG-BiO, and a simplified Bi-SG.

These exist for comparison runs, share the trace format, and follow the
published parameter choices rather than re-deriving each method:

* IR-PG takes one projected-gradient step on the combined objective per
  iteration, with power-decaying regularization ``sigma_t = varsigma
  (t+1)**(-theta)`` and step ``alpha_t = alpha_bar (t+1)**(-eta)``.
* CG-BiO replaces the inner-optimality constraint with its linearization at
  the current point: each step minimizes ``<grad f(x_t), v>`` over the domain
  sliced by ``<grad g(x_t), v - x_t> <= g(x0') - g(x_t)``, where ``x0'`` is a
  warm start whose inner gap is at most half the slack budget ``eps_g``.
* Bi-SG (simplified reading): a projected gradient step on the inner
  objective followed by a diminishing projected gradient step on the outer
  one.  The outer step uses ``c * (t+1)**(-alpha_exp)``; the shift to
  ``t + 1`` avoids the undefined step at ``t = 0``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import MissingProjection
from .problem import BilevelProblem, Point
from .schedules import step_open_loop
from .solver import single_level_cg
from .trace import RunTrace


@dataclass(frozen=True)
class IRPGParams:
    varsigma: float = 0.05
    theta: float = 0.5       # regularization decay exponent
    alpha_bar: float = 0.5   # step-size constant
    eta: float = 0.5         # step-size decay exponent

    def __post_init__(self):
        if self.varsigma <= 0 or self.alpha_bar <= 0:
            raise ValueError("varsigma and alpha_bar must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")

    def sigma(self, t: int) -> float:
        return self.varsigma * (t + 1.0) ** (-self.theta)

    def alpha(self, t: int) -> float:
        return self.alpha_bar * (t + 1.0) ** (-self.eta)


@dataclass(frozen=True)
class CGBiOParams:
    eps_g: float = 1e-4
    warm_max_iters: int = 200_000
    warm_time_limit_s: Optional[float] = None

    def __post_init__(self):
        if self.eps_g <= 0:
            raise ValueError("eps_g must be positive")


@dataclass(frozen=True)
class BiSGParams:
    alpha_exp: float = 1.0 / (2.0 - 0.01)
    c: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.alpha_exp < 1.0:
            raise ValueError("alpha_exp must lie in (1/2, 1)")
        if self.c <= 0:
            raise ValueError("c must be positive")


BaselineParams = Union[IRPGParams, CGBiOParams, BiSGParams]


@dataclass
class BaselineState:
    t: int
    x: Point
    last_alpha: float = math.nan
    last_sigma: float = math.nan
    aux: dict = field(default_factory=dict)


def initial_baseline_state(problem: BilevelProblem) -> BaselineState:
    return BaselineState(t=0, x=problem.x0.astype(float).copy())


def _require_proj(problem: BilevelProblem):
    if problem.proj is None:
        raise MissingProjection(f"instance {problem.name!r} has no projection")
    return problem.proj


def irpg_step(state: BaselineState, problem: BilevelProblem, params: IRPGParams) -> BaselineState:
    """Projected gradient step on ``sigma_t f + g``."""
    proj = _require_proj(problem)
    t, x = state.t, state.x
    sigma = params.sigma(t)
    alpha = params.alpha(t)
    x_next = proj(x - alpha * (sigma * problem.grad_f(x) + problem.grad_g(x)))
    return BaselineState(t + 1, x_next, last_alpha=alpha, last_sigma=sigma, aux=state.aux)


def cgbio_warm_start(problem: BilevelProblem, params: CGBiOParams) -> tuple[Point, float, float]:
    """Warm start whose inner suboptimality targets ``eps_g / 2``, found by
    single-level conditional gradient with the surrogate gap as stopping rule.

    Returns ``(point, inner value at the point, achieved surrogate gap)``.
    The achieved gap may exceed the target when the cap binds; the cut then
    uses the achieved inner value, which keeps every subproblem feasible.
    """
    x0p, gap, _ = single_level_cg(
        problem, problem.x0, params.eps_g / 2.0,
        params.warm_max_iters, params.warm_time_limit_s,
    )
    return x0p, float(problem.eval_g(x0p)), gap


def cgbio_step(
    state: BaselineState,
    problem: BilevelProblem,
    params: CGBiOParams,
    snb_oracle: Optional[Callable[[Point, Point, float], Point]] = None,
) -> BaselineState:
    """Conditional-gradient step over the domain sliced by the inner-objective
    linearization cut, using the instance's sliced oracle by default."""
    oracle = snb_oracle or problem.sliced_lmo
    if oracle is None:
        raise ValueError(f"instance {problem.name!r} has no sliced linear oracle")
    if "g_warm" not in state.aux:
        raise ValueError("cg-bio state lacks the warm-start value; seed aux['g_warm']")
    t, x = state.t, state.x
    a = problem.grad_g(x)
    b = float(np.vdot(a, x)) + state.aux["g_warm"] - float(problem.eval_g(x))
    v = oracle(problem.grad_f(x), a, b)
    alpha = step_open_loop(t)
    return BaselineState(t + 1, x + alpha * (v - x), last_alpha=alpha, aux=state.aux)


def bisg_step(state: BaselineState, problem: BilevelProblem, params: BiSGParams) -> BaselineState:
    """Inner projected gradient step, then a diminishing outer one."""
    proj = _require_proj(problem)
    t, x = state.t, state.x
    y = proj(x - params.c * problem.grad_g(x))
    step_f = params.c * (t + 1.0) ** (-params.alpha_exp)
    x_next = proj(y - step_f * problem.grad_f(y))
    return BaselineState(t + 1, x_next, last_alpha=step_f, aux=state.aux)


_SOLVER_IDS = {IRPGParams: "irpg", CGBiOParams: "cgbio", BiSGParams: "bisg"}


def run_baseline(
    problem: BilevelProblem,
    params: BaselineParams,
    max_iters: int,
    time_limit_s: Optional[float] = None,
    record_every: int = 1,
    seed: int = 0,
) -> RunTrace:
    """Run one baseline and record a trace (averaged-iterate columns empty).

    For CG-BiO the warm start runs before the clock starts, as its own
    preparation phase, and the achieved warm values are echoed in the header.
    """
    if max_iters < 0:
        raise ValueError("max_iters must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    solver_id = _SOLVER_IDS[type(params)]
    header = {
        "solver": solver_id,
        "instance": problem.name,
        "seed": seed,
        "run.max_iters": max_iters,
        "run.record_every": record_every,
    }
    if time_limit_s is not None:
        header["run.time_limit_s"] = repr(time_limit_s)
    for key, value in vars(params).items():
        if value is not None:
            header[f"params.{key}"] = repr(value)
    for key in ("f_opt", "g_opt"):
        value = getattr(problem.metadata, key)
        if value is not None:
            header[key] = repr(value)

    state = initial_baseline_state(problem)
    if isinstance(params, CGBiOParams):
        x0p, g_warm, warm_gap = cgbio_warm_start(problem, params)
        state.x = x0p
        state.aux["g_warm"] = g_warm
        header["cgbio.warm_gap"] = repr(warm_gap)
        step = lambda s: cgbio_step(s, problem, params)
    elif isinstance(params, IRPGParams):
        step = lambda s: irpg_step(s, problem, params)
    else:
        step = lambda s: bisg_step(s, problem, params)

    rows = []
    start = time.perf_counter()

    def record(s: BaselineState):
        rows.append(
            (s.t, time.perf_counter() - start,
             float(problem.eval_f(s.x)), float(problem.eval_g(s.x)),
             None, None,
             None if math.isnan(s.last_sigma) else s.last_sigma,
             None if math.isnan(s.last_alpha) else s.last_alpha,
             None)
        )

    record(state)
    for _ in range(max_iters):
        if time_limit_s is not None and time.perf_counter() - start > time_limit_s:
            break
        state = step(state)
        if state.t % record_every == 0 or state.t == max_iters:
            record(state)
    if rows[-1][0] != state.t:
        record(state)
    return RunTrace(header, rows)
