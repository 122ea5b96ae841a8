"""Benchmark harness: config files, run orchestration, oracle self-test.

Configs are flat UTF-8 ``key=value`` files with ``#`` comments.  Keys are
namespaced (``instance.*``, ``schedule.*``, ``solver.*``, ``run.*``); unknown
keys fail fast.  ``run_from_config`` builds the instance, runs the requested
solver(s), and writes one trace file per (solver, instance) pair.
"""

from __future__ import annotations

import itertools
from pathlib import Path
from typing import Optional

import numpy as np

from . import baselines as bl
from .errors import ConfigError
from .instances import (
    gen_synthetic_completion,
    load_ratings,
    make_ball_quadratic,
    make_least_norm,
    make_matrix_completion,
)
from .nuclear import (
    OracleMatrixProblem,
    lmo_nuclear,
    nuclear_norm,
    project_nuclear,
    snb_lo,
)
from .numerics import simplex_cap_projection
from .problem import BilevelProblem
from .schedules import RegSchedule, StepRule
from .solver import SolverConfig, estimate_g_opt, solve
from .trace import RunTrace, write_trace

_KNOWN_KEYS = {
    "instance.kind", "instance.m", "instance.n", "instance.p", "instance.seed",
    "instance.radius_scale", "instance.f_center", "instance.rank",
    "instance.density", "instance.noise", "instance.delta",
    "instance.nuclear_scale", "instance.path", "instance.n_rows", "instance.n_cols",
    "schedule.varsigma", "schedule.p",
    "solver.kind", "solver.kinds", "solver.step_rule", "solver.line_search_tol",
    "solver.varsigma", "solver.theta", "solver.alpha_bar", "solver.eta",
    "solver.c", "solver.alpha_exp", "solver.eps_g", "solver.warm_max_iters",
    "run.max_iters", "run.time_limit_s", "run.record_every", "run.seed",
    "run.estimate_g_opt", "run.g_opt_tol_coarse", "run.g_opt_tol_fine",
    "run.g_opt_max_iters",
}


def parse_config(path) -> dict:
    cfg = {}
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"{path} line {lineno}: unknown key {key!r}")
            if key in cfg:
                raise ConfigError(f"{path} line {lineno}: duplicate key {key!r}")
            cfg[key] = value
    return cfg


def _get(cfg, key, cast, default=None, required=False):
    if key not in cfg:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        if cast is bool:
            return cfg[key].lower() in ("1", "true", "yes", "on")
        return cast(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {exc}") from exc


def build_instance(cfg: dict, seed: Optional[int] = None) -> BilevelProblem:
    kind = _get(cfg, "instance.kind", str, required=True)
    inst_seed = _get(cfg, "instance.seed", int, default=0) if seed is None else seed
    if kind == "least_norm":
        m = _get(cfg, "instance.m", int, required=True)
        n = _get(cfg, "instance.n", int, required=True)
        scale = _get(cfg, "instance.radius_scale", float, default=2.0)
        rng = np.random.default_rng(inst_seed)
        A = rng.standard_normal((m, n))
        x_true = rng.standard_normal(n)
        b = A @ x_true  # consistent by construction
        xstar = np.linalg.pinv(A) @ b
        return make_least_norm(A, b, radius=scale * float(np.linalg.norm(xstar)))
    if kind == "ball_quadratic":
        n = _get(cfg, "instance.n", int, required=True)
        center_spec = _get(cfg, "instance.f_center", str, required=True)
        c = np.array([float(v) for v in center_spec.split(",")])
        if c.size != n:
            raise ConfigError("instance.f_center length must equal instance.n")
        return make_ball_quadratic(np.eye(n), np.zeros(n), c)
    if kind == "completion":
        obs = gen_synthetic_completion(
            n=_get(cfg, "instance.n", int, required=True),
            p=_get(cfg, "instance.p", int, required=True),
            rank=_get(cfg, "instance.rank", int, required=True),
            density=_get(cfg, "instance.density", float, required=True),
            noise=_get(cfg, "instance.noise", float, default=0.0),
            seed=inst_seed,
            nuclear_scale=_get(cfg, "instance.nuclear_scale", float),
        )
        delta = _get(cfg, "instance.delta", float, required=True)
        noise = _get(cfg, "instance.noise", float, default=0.0)
        nuclear_scale = _get(cfg, "instance.nuclear_scale", float)
        known = 0.0 if (noise == 0.0 and nuclear_scale is not None and nuclear_scale <= delta) else None
        return make_matrix_completion(obs, delta, known_g_opt=known)
    if kind == "ratings":
        obs = load_ratings(
            _get(cfg, "instance.path", str, required=True),
            n_rows=_get(cfg, "instance.n_rows", int, default=6040),
            n_cols=_get(cfg, "instance.n_cols", int, default=3952),
        )
        return make_matrix_completion(obs, _get(cfg, "instance.delta", float, required=True))
    raise ConfigError(f"unknown instance.kind {kind!r}")


def _solver_specs(cfg: dict) -> list:
    if "solver.kinds" in cfg:
        return [s.strip() for s in cfg["solver.kinds"].split(",") if s.strip()]
    kind = _get(cfg, "solver.kind", str, required=True)
    step = _get(cfg, "solver.step_rule", str, default="open")
    return [f"{kind}:{step}" if kind == "ircg" else kind]


def run_from_config(
    config_path,
    out_dir,
    seed: Optional[int] = None,
    time_limit_s: Optional[float] = None,
) -> list:
    """Execute the configured solver(s) on the configured instance.

    Returns the written trace paths.  ``seed`` and ``time_limit_s`` override
    the config when given.
    """
    cfg = parse_config(config_path)
    run_seed = _get(cfg, "run.seed", int, default=0) if seed is None else seed
    problem = build_instance(cfg, seed=run_seed)
    max_iters = _get(cfg, "run.max_iters", int, required=True)
    if time_limit_s is None:
        time_limit_s = _get(cfg, "run.time_limit_s", float)
    record_every = _get(cfg, "run.record_every", int, default=1)

    if problem.metadata.g_opt is None and _get(cfg, "run.estimate_g_opt", bool, default=False):
        # Open-loop CG's surrogate gap decays like 1/t on interior-optimum
        # instances, so the defaults here are desk-scale reachable rather
        # than the tight protocol values.
        est = estimate_g_opt(
            problem,
            tol_coarse=_get(cfg, "run.g_opt_tol_coarse", float, default=1e-3),
            tol_fine=_get(cfg, "run.g_opt_tol_fine", float, default=1e-5),
            max_iters=_get(cfg, "run.g_opt_max_iters", int, default=500_000),
        )
        problem.metadata.g_opt = est
        problem.metadata.note("g_opt", "warm-started conditional-gradient estimate")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for spec in _solver_specs(cfg):
        trace = _run_one(spec, problem, cfg, max_iters, time_limit_s, record_every, run_seed)
        if problem.metadata.g_opt is not None and problem.metadata.provenance.get("g_opt", "").startswith("warm"):
            trace.header["g_opt_provenance"] = "estimate"
        path = out_dir / f"{trace.header['solver']}__{problem.name}.csv"
        write_trace(trace, path)
        paths.append(path)
    return paths


def _run_one(spec, problem, cfg, max_iters, time_limit_s, record_every, seed) -> RunTrace:
    kind, _, variant = spec.partition(":")
    if kind == "ircg":
        schedule = RegSchedule(
            varsigma=_get(cfg, "schedule.varsigma", float, required=True),
            p=_get(cfg, "schedule.p", float, required=True),
        )
        rule = StepRule(variant or "open",
                        line_search_tol=_get(cfg, "solver.line_search_tol", float, default=1e-8))
        config = SolverConfig(schedule=schedule, step_rule=rule, max_iters=max_iters,
                              time_limit_s=time_limit_s, record_every=record_every)
        return solve(problem, config, seed=seed)
    if kind == "irpg":
        params = bl.IRPGParams(
            varsigma=_get(cfg, "solver.varsigma", float,
                          default=_get(cfg, "schedule.varsigma", float, default=0.05)),
            theta=_get(cfg, "solver.theta", float, default=0.5),
            alpha_bar=_get(cfg, "solver.alpha_bar", float, default=0.5),
            eta=_get(cfg, "solver.eta", float, default=0.5),
        )
    elif kind == "bisg":
        params = bl.BiSGParams(
            alpha_exp=_get(cfg, "solver.alpha_exp", float, default=1.0 / (2.0 - 0.01)),
            c=_get(cfg, "solver.c", float, default=1.0),
        )
    elif kind == "cgbio":
        params = bl.CGBiOParams(
            eps_g=_get(cfg, "solver.eps_g", float, default=1e-4),
            warm_max_iters=_get(cfg, "solver.warm_max_iters", int, default=200_000),
            warm_time_limit_s=time_limit_s,
        )
    else:
        raise ConfigError(f"unknown solver kind {kind!r}")
    return bl.run_baseline(problem, params, max_iters, time_limit_s, record_every, seed)


# ---------------------------------------------------------------------------
# Oracle self-test battery
# ---------------------------------------------------------------------------

def brute_force_cap_projection(x: np.ndarray, delta: float) -> np.ndarray:
    """Exhaustive active-set solve of the capped-simplex projection.

    Enumerates every support; on each, either the cap is slack (plain clip)
    or tight (equal shift on the support).  KKT feasibility picks the valid
    candidates and the nearest one wins.  Exponential in the dimension; a
    test oracle only.
    """
    x = np.asarray(x, dtype=float)
    k = x.size
    clip = np.maximum(x, 0.0)
    if clip.sum() <= delta:
        return clip
    best, best_d = None, np.inf
    for bits in itertools.product((0, 1), repeat=k):
        support = np.array(bits, dtype=bool)
        if not support.any():
            continue
        theta = (x[support].sum() - delta) / support.sum()
        cand = np.where(support, x - theta, 0.0)
        if theta < -1e-12 or np.any(cand[support] < -1e-12):
            continue
        if np.any(x[~support] - theta > 1e-12):
            continue
        d = float(np.sum((cand - x) ** 2))
        if d < best_d:
            best, best_d = np.maximum(cand, 0.0), d
    assert best is not None
    return best


def oracle_selftest(seed: int = 0, n_lmo: int = 200, n_snb: int = 200,
                    n_proj: int = 100, n_simplex: int = 500) -> list:
    """Randomized battery pitting each oracle against an independent check.

    Returns ``(name, ok, detail)`` triples: ball LMO objective against dense
    SVD, sliced-oracle duality certificates and feasibility, nuclear
    projection optimality via the variational inequality, and the capped
    simplex projection against the exhaustive active-set solve.
    """
    rng = np.random.default_rng(seed)
    results = []

    worst = 0.0
    for _ in range(n_lmo):
        C = rng.standard_normal((6, 5))
        V = lmo_nuclear(C, 1.5)
        dense = float(np.linalg.svd(C, compute_uv=False)[0])
        err = abs(float(np.vdot(C, V)) + 1.5 * dense) / (1.5 * dense)
        worst = max(worst, err)
    results.append(("lmo-nuclear objective vs dense SVD", worst <= 1e-8,
                    f"max rel err {worst:.2e} over {n_lmo}"))

    worst_gap, worst_feas, certified_all = 0.0, 0.0, True
    for _ in range(n_snb):
        C = rng.standard_normal((6, 5))
        A = rng.standard_normal((6, 5))
        delta = 1.0 + rng.random()
        sA = float(np.linalg.svd(A, compute_uv=False)[0])
        b = -delta * sA + rng.random() * 2.0 * delta * sA
        sol = snb_lo(OracleMatrixProblem(C, A, b, delta))
        certified_all &= sol.certified
        worst_gap = max(worst_gap, abs(sol.primal_value - sol.dual_value) / (1.0 + abs(sol.dual_value)))
        worst_feas = max(worst_feas,
                         float(np.vdot(A, sol.V)) - b,
                         nuclear_norm(sol.V) - delta)
    results.append(("snb-lo duality certificate", certified_all and worst_gap <= 1e-6,
                    f"max rel gap {worst_gap:.2e} over {n_snb}"))
    results.append(("snb-lo feasibility", worst_feas <= 1e-8,
                    f"max violation {worst_feas:.2e}"))

    worst_vi = 0.0
    for _ in range(n_proj):
        X = rng.standard_normal((6, 5)) * 2.0
        delta = 1.0 + rng.random()
        P = project_nuclear(X, delta)
        for _ in range(5):
            Z = rng.standard_normal((6, 5))
            Z *= (rng.random() * delta) / nuclear_norm(Z)
            worst_vi = max(worst_vi, float(np.vdot(X - P, Z - P)))
        worst_vi = max(worst_vi, nuclear_norm(P) - delta)
    results.append(("nuclear projection variational inequality", worst_vi <= 1e-8,
                    f"max violation {worst_vi:.2e} over {n_proj}"))

    worst_sp = 0.0
    for _ in range(n_simplex):
        k = int(rng.integers(1, 13))
        x = rng.standard_normal(k) * 2.0
        delta = 0.2 + 2.0 * rng.random()
        fast = simplex_cap_projection(x, delta)
        slow = brute_force_cap_projection(x, delta)
        worst_sp = max(worst_sp, float(np.max(np.abs(fast - slow))))
    results.append(("capped simplex projection vs brute force", worst_sp <= 1e-10,
                    f"max abs diff {worst_sp:.2e} over {n_simplex}"))
    return results
