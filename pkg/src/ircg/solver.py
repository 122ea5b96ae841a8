"""Iteratively regularized conditional gradient (IR-CG).

Each iteration takes a plain conditional-gradient step on the combined
objective ``sigma_t * f + g`` while ``sigma_t`` decays, and maintains a
weighted average ``z_t`` of the iterates whose weights are chosen so that
both the inner- and outer-level gaps of ``z_t`` admit explicit
non-asymptotic bounds.  The weight sum ``S_t`` and the average are updated
recursively:

    S_{t+1} = S_t + 2 (t+1) sigma_t
    z_{t+1} = (S_t z_t - (t+1) t sigma_t x_t
               + (t+2)(t+1) sigma_t x_{t+1}) / S_{t+1}

with ``S_0 = 0`` and ``z_0 = 0``.  ``z_closed_form`` evaluates the defining
convex combination directly and exists as a test oracle for the recursion.

The certificate helpers turn instance constants into the explicit bound
envelopes the benchmark asserts: ``C * sigma_t`` for the last iterate's inner
gap, ``C (1 + V) sigma_t`` for the averaged inner gap, the power-law outer
bound for ``z_t``, and the accelerated ``W``-envelopes available under
quadratic growth of the inner objective.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MissingMetadata, NonConvergence, PreconditionViolated
from .problem import BilevelProblem, Point, check_gradients, eval_phi, grad_phi
from .schedules import (
    RegSchedule,
    StepRule,
    sigma_at,
    step_closed_loop,
    step_line_search,
    step_open_loop,
)
from .trace import RunTrace


@dataclass(frozen=True)
class SolverState:
    """Iterate, averaged iterate, and the running weight sum."""

    t: int
    x: Point
    z: Point
    S: float
    last_alpha: float = math.nan
    last_sigma: float = math.nan


@dataclass(frozen=True)
class SolverConfig:
    schedule: RegSchedule
    step_rule: StepRule = StepRule("open")
    max_iters: int = 1000
    time_limit_s: Optional[float] = None
    record_every: int = 1
    smoke_grad_check: bool = True

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


def initial_state(problem: BilevelProblem) -> SolverState:
    return SolverState(t=0, x=problem.x0.astype(float).copy(),
                       z=np.zeros(problem.shape), S=0.0)


def ircg_step(state: SolverState, problem: BilevelProblem, config: SolverConfig) -> SolverState:
    """One conditional-gradient step on the current combined objective,
    followed by the recursive weight-sum and average updates."""
    t = state.t
    sigma = sigma_at(config.schedule, t)
    x = state.x
    grad = grad_phi(problem, sigma, x)
    v = problem.lmo(grad)
    direction = v - x

    rule = config.step_rule
    if rule.variant == "open":
        alpha = step_open_loop(t)
    elif rule.variant == "closed":
        d = float(np.vdot(grad, direction))
        s = float(np.vdot(direction, direction))
        alpha = step_closed_loop(d, s, sigma * problem.L_f + problem.L_g)
    else:
        alpha = step_line_search(
            lambda a: eval_phi(problem, sigma, x + a * direction),
            tol=rule.line_search_tol,
            cap=rule.line_search_cap,
        )

    x_next = x + alpha * direction
    S_next = state.S + 2.0 * (t + 1) * sigma
    z_next = (state.S * state.z - (t + 1) * t * sigma * x + (t + 2) * (t + 1) * sigma * x_next) / S_next
    return SolverState(t=t + 1, x=x_next, z=z_next, S=S_next,
                       last_alpha=alpha, last_sigma=sigma)


def z_closed_form(history: Sequence[Point], schedule: RegSchedule, t: int) -> Point:
    """Averaged iterate evaluated from its defining convex combination.

    ``history[i-1]`` must hold the iterate after ``i`` steps.  Used as an
    independent oracle for the recursion in :func:`ircg_step`.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if len(history) < t:
        raise ValueError("history is shorter than t")
    sig = schedule.sigma(np.arange(t + 1))
    weights = np.empty(t)
    i = np.arange(1, t + 1)
    weights[:] = (i + 1) * i * (sig[:-1][i - 1] - sig[i])
    weights[t - 1] += (t + 1) * t * sig[t]
    total = weights.sum()
    out = np.zeros_like(np.asarray(history[0], dtype=float))
    for w, xi in zip(weights, history[:t]):
        out += w * xi
    return out / total


def solve(
    problem: BilevelProblem,
    config: SolverConfig,
    observers: Sequence[Callable[[SolverState], None]] = (),
    seed: int = 0,
) -> RunTrace:
    """Run IR-CG and record a trace.

    Records the initial point, every ``record_every``-th iterate, and the
    final iterate: objective values of ``x_t`` and ``z_t``, the schedule and
    step size used, and the weight sum.  Deterministic given the problem and
    configuration; the seed is only echoed into the header.  Observers run
    synchronously after each step.
    """
    if config.smoke_grad_check and problem.sample_interior is not None:
        report = check_gradients(problem, samples=2, h=1e-6, seed=7, directions=2)
        worst = max(report.max_rel_err_f, report.max_rel_err_g)
        if worst > 1e-3:
            raise PreconditionViolated(
                f"gradients disagree with finite differences (rel err {worst:.2e})"
            )

    header = {
        "solver": f"ircg-{config.step_rule.variant}",
        "instance": problem.name,
        "seed": seed,
        "schedule.varsigma": repr(config.schedule.varsigma),
        "schedule.p": repr(config.schedule.p),
        "run.max_iters": config.max_iters,
        "run.record_every": config.record_every,
    }
    if config.time_limit_s is not None:
        header["run.time_limit_s"] = repr(config.time_limit_s)
    for key in ("f_opt", "g_opt"):
        value = getattr(problem.metadata, key)
        if value is not None:
            header[key] = repr(value)

    state = initial_state(problem)
    rows = []
    start = time.perf_counter()

    def record(state: SolverState, include_z: bool):
        elapsed = time.perf_counter() - start
        x = state.x
        f_x = problem.eval_f(x)
        g_x = problem.eval_g(x)
        if include_z:
            f_z = problem.eval_f(state.z)
            g_z = problem.eval_g(state.z)
        else:
            f_z = g_z = None
        alpha = None if math.isnan(state.last_alpha) else state.last_alpha
        rows.append(
            (state.t, elapsed, f_x, g_x, f_z, g_z,
             sigma_at(config.schedule, state.t), alpha, state.S)
        )

    record(state, include_z=False)
    for _ in range(config.max_iters):
        if config.time_limit_s is not None and time.perf_counter() - start > config.time_limit_s:
            break
        state = ircg_step(state, problem, config)
        for obs in observers:
            obs(state)
        if state.t % config.record_every == 0 or state.t == config.max_iters:
            record(state, include_z=True)
    if rows[-1][0] != state.t:
        record(state, include_z=state.t >= 1)
    return RunTrace(header, rows)


# ---------------------------------------------------------------------------
# Certificate constants and bound envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateConstants:
    """Explicit constants of the convergence envelopes for a power schedule.

    ``F`` is the outer optimal value minus the outer minimum over the whole
    domain.  ``W_bound`` (the accelerated inner envelope constant) is only
    available when the quadratic-growth modulus ``kappa``, the solution-set
    gradient bound ``G_f``, and the initial inner gap are all known.
    """

    C_bound: float
    V_bound: float
    W_bound: Optional[float]
    p: float
    varsigma: float
    F: float
    D: float
    L_f: float
    L_g: float
    kappa: Optional[float] = None
    G_f: Optional[float] = None
    g0_gap: Optional[float] = None


def certificate_constants(
    p: float,
    varsigma: float,
    F: float,
    D: float,
    L_f: float,
    L_g: float,
    kappa: Optional[float] = None,
    G_f: Optional[float] = None,
    g0_gap: Optional[float] = None,
    require_w: bool = False,
) -> CertificateConstants:
    """Evaluate the certificate constants for ``sigma_t = varsigma (t+1)^-p``.

    ``C_bound = (1 + 2p) F + 2 (varsigma L_f + L_g) D^2 / varsigma`` bounds
    the last-iterate inner-gap constant, ``V_bound = 2p / min(1, 2(1-p))``
    the averaging overhead.  ``W_bound`` solves the fixed point ``w = a +
    c sqrt(w)`` (in closed form through the quadratic in ``sqrt(w)``) and is
    floored at the initial inner gap.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if min(varsigma, D, L_f, L_g) <= 0:
        raise ValueError("varsigma, D, L_f, L_g must be positive")
    if F < 0:
        raise ValueError("F must be nonnegative")
    C_bound = (1.0 + 2.0 * p) * F + 2.0 * (varsigma * L_f + L_g) * D**2 / varsigma
    V_bound = 2.0 * p / min(1.0, 2.0 * (1.0 - p))

    W_bound = None
    have_w = kappa is not None and G_f is not None and g0_gap is not None
    if require_w and not have_w:
        missing = [k for k, v in (("kappa", kappa), ("G_f", G_f), ("g0_gap", g0_gap)) if v is None]
        raise MissingMetadata(f"accelerated envelope needs {', '.join(missing)}")
    if have_w:
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        sigma0 = varsigma
        a = 4.0 * (L_f * sigma0 + L_g) * D**2 + G_f**2 * varsigma**2 / kappa
        c = p * 2.0 ** min(2.0 * p + 2.0, 3.0) * G_f * varsigma / math.sqrt(kappa)
        sqrt_w = 0.5 * (c + math.sqrt(c**2 + 4.0 * a))
        W_bound = max(float(g0_gap), sqrt_w**2)
    return CertificateConstants(C_bound, V_bound, W_bound, p, varsigma, F, D,
                                L_f, L_g, kappa, G_f, g0_gap)


def constants_for(problem: BilevelProblem, schedule: RegSchedule,
                  require_w: bool = False) -> CertificateConstants:
    """Certificate constants pulled from an instance's metadata."""
    meta = problem.metadata
    if meta.f_opt is None or meta.min_f_over_X is None:
        raise MissingMetadata("need f_opt and min_f_over_X for the envelope constants")
    g0_gap = None
    if meta.g_opt is not None:
        g0_gap = problem.eval_g(problem.x0) - meta.g_opt
    return certificate_constants(
        p=schedule.p,
        varsigma=schedule.varsigma,
        F=meta.f_opt - meta.min_f_over_X,
        D=problem.diameter_D,
        L_f=problem.L_f,
        L_g=problem.L_g,
        kappa=meta.kappa,
        G_f=meta.G_f,
        g0_gap=g0_gap,
        require_w=require_w,
    )


@dataclass(frozen=True)
class CertificateBounds:
    """Bound envelopes at one iteration index.

    ``outer_z``/``inner_z`` bound ``f(z_t) - f_opt`` and ``g(z_t) - g_opt``;
    ``inner_x``/``outer_x`` are the accelerated last-iterate envelopes,
    present only when ``W_bound`` is available.
    """

    outer_z: float
    inner_z: float
    inner_x: Optional[float]
    outer_x: Optional[float]


def certificate_bounds_at(t: int, constants: CertificateConstants) -> CertificateBounds:
    if t < 0:
        raise ValueError("t must be nonnegative")
    p, vs = constants.p, constants.varsigma
    outer_z = 2.0 * (vs * constants.L_f + constants.L_g) * constants.D**2 / (
        vs * (t + 1.0) ** (1.0 - p)
    )
    sigma_t = vs * (t + 1.0) ** (-p)
    inner_z = constants.C_bound * (1.0 + constants.V_bound) * sigma_t
    inner_x = outer_x = None
    if constants.W_bound is not None:
        inner_x = constants.W_bound / (t + 1.0) ** min(2.0 * p, 1.0)
        outer_x = constants.W_bound / (2.0 * vs * (t + 1.0) ** min(p, 1.0 - p))
    return CertificateBounds(outer_z, inner_z, inner_x, outer_x)


# ---------------------------------------------------------------------------
# Inner-optimum estimation (single-level conditional gradient)
# ---------------------------------------------------------------------------

def single_level_cg(
    problem: BilevelProblem,
    x0: Point,
    tol: float,
    max_iters: int,
    time_limit_s: Optional[float] = None,
) -> tuple[Point, float, int]:
    """Conditional gradient on the inner objective alone with ``2/(t+2)``
    steps, stopping when the surrogate gap ``<grad g(x), x - v>`` (an upper
    bound on the inner suboptimality) falls below ``tol``.

    Returns ``(point, last surrogate gap, iterations)``; it is the caller's
    job to decide whether a still-large gap is an error.
    """
    x = np.asarray(x0, dtype=float).copy()
    start = time.perf_counter()
    gap = math.inf
    t = 0
    for t in range(max_iters):
        grad = problem.grad_g(x)
        v = problem.lmo(grad)
        gap = float(np.vdot(grad, x - v))
        if gap <= tol:
            break
        if time_limit_s is not None and time.perf_counter() - start > time_limit_s:
            break
        x = x + step_open_loop(t) * (v - x)
    return x, gap, t


def estimate_g_opt(
    problem: BilevelProblem,
    tol_coarse: float = 1e-5,
    tol_fine: float = 1e-12,
    max_iters: int = 1_000_000,
) -> float:
    """Two-phase warm-started estimate of the inner optimal value.

    A first conditional-gradient pass stops at the coarse surrogate-gap
    tolerance; a second pass restarts from its result and stops at the fine
    tolerance.  The returned value overshoots the true optimum by at most
    ``tol_fine``.  Raises :class:`NonConvergence` when the cap runs out
    first.
    """
    if tol_fine > tol_coarse:
        raise ValueError("tol_fine must not exceed tol_coarse")
    x, gap, used = single_level_cg(problem, problem.x0, tol_coarse, max_iters)
    if gap > tol_coarse:
        raise NonConvergence(f"coarse phase stalled at surrogate gap {gap:.3e}")
    x, gap, _ = single_level_cg(problem, x, tol_fine, max_iters - used)
    if gap > tol_fine:
        raise NonConvergence(f"fine phase stalled at surrogate gap {gap:.3e}")
    return float(problem.eval_g(x))
