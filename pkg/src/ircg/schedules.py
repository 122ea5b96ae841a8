"""Regularization schedules and step-size rules.

The solver multiplies the outer objective by a decaying weight
``sigma_t = varsigma * (t+1)**(-p)`` and needs three things from it: strict
decrease to zero, eventual growth of ``(t+1) * sigma_t``, and a finite limit
``L = lim t * (sigma_t / sigma_{t+1} - 1)`` (which equals ``p`` for the power
family).  ``verify_conditions`` samples those properties over a finite
horizon; it is a sanity check, not a proof.

Step sizes come in three flavors: the open-loop ``2/(t+2)`` rule, the
closed-loop exact minimizer of the one-dimensional quadratic upper model, and
an exact line search on the segment via bounded Brent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InvalidDescent, InvalidSchedule
from .numerics import brent_min


@dataclass(frozen=True)
class RegSchedule:
    """Power-family regularization weights ``sigma_t = varsigma * (t+1)**(-p)``."""

    varsigma: float
    p: float

    def __post_init__(self):
        if self.varsigma <= 0:
            raise InvalidSchedule("varsigma must be positive")
        if not 0.0 < self.p < 1.0:
            raise InvalidSchedule("p must lie in (0, 1)")

    def sigma(self, t) -> float:
        return self.varsigma * (np.asarray(t, dtype=float) + 1.0) ** (-self.p)


def sigma_at(schedule: RegSchedule, t: int) -> float:
    """Weight ``sigma_t`` at iteration ``t >= 0``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(schedule.sigma(t))


@dataclass(frozen=True)
class ScheduleReport:
    """Finite-horizon check of the three schedule conditions."""

    condition1_ok: bool
    condition2_first_index: int
    condition3_L_estimate: float
    horizon: int


SequenceLike = Union[RegSchedule, Callable[[np.ndarray], np.ndarray]]


def verify_conditions(schedule: SequenceLike, horizon: int) -> ScheduleReport:
    """Sample the schedule conditions for ``t <= horizon``.

    Checks strict positive decrease (raising :class:`InvalidSchedule` when it
    fails), reports the smallest ``t0`` from which ``(t+2) sigma_{t+1} >
    (t+1) sigma_t`` holds through the horizon, and estimates the limit
    ``t (sigma_t / sigma_{t+1} - 1)`` at the horizon.  Accepts a
    :class:`RegSchedule` or any vectorized callable ``t -> sigma_t``.
    """
    if horizon < 10:
        raise ValueError("horizon must be at least 10")
    t = np.arange(horizon + 2, dtype=float)
    sig = schedule.sigma(t) if isinstance(schedule, RegSchedule) else np.asarray(schedule(t), dtype=float)
    if sig.shape != t.shape:
        raise ValueError("schedule callable must map an index array to a value array")
    if np.any(sig <= 0) or not np.all(np.isfinite(sig)):
        raise InvalidSchedule("sigma_t must be positive and finite")
    if np.any(np.diff(sig) >= 0):
        raise InvalidSchedule("sigma_t must be strictly decreasing")

    # (t+2) sigma_{t+1} > (t+1) sigma_t for t0 <= t <= horizon.
    lhs = (t[:-1] + 2.0) * sig[1:]
    rhs = (t[:-1] + 1.0) * sig[:-1]
    ok = lhs > rhs
    ok = ok[: horizon + 1]
    if not ok[-1]:
        raise InvalidSchedule("(t+1) sigma_t is still shrinking at the horizon")
    bad = np.nonzero(~ok)[0]
    t0 = int(bad[-1]) + 1 if bad.size else 0

    h = float(horizon)
    L = h * (sig[horizon] / sig[horizon + 1] - 1.0)
    return ScheduleReport(True, t0, float(L), horizon)


@dataclass(frozen=True)
class StepRule:
    """Step-size selection: ``open`` loop, ``closed`` loop, or ``line`` search."""

    variant: str = "open"
    line_search_tol: float = 1e-8
    line_search_cap: int = 100

    def __post_init__(self):
        if self.variant not in ("open", "closed", "line"):
            raise ValueError(f"unknown step rule {self.variant!r}")
        if self.line_search_tol <= 0:
            raise ValueError("line_search_tol must be positive")


def step_open_loop(t: int) -> float:
    """The classic conditional-gradient step ``2 / (t + 2)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return 2.0 / (t + 2.0)


def step_closed_loop(d: float, s: float, Lsmooth: float) -> float:
    """Exact minimizer over [0, 1] of ``alpha*d + (Lsmooth/2)*alpha**2*s``.

    ``d`` is the linearized decrease (must be <= 0 up to rounding: the oracle
    returns a minimizer of the linear form, so a positive value flags a bug),
    ``s`` the squared step length, ``Lsmooth`` the smoothness constant of the
    combined objective.
    """
    if Lsmooth <= 0:
        raise ValueError("Lsmooth must be positive")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if d > 1e-12 * (1.0 + abs(d)):
        raise InvalidDescent(f"linearized decrease is positive: d={d!r}")
    if s == 0.0:
        return 0.0
    return float(np.clip(-d / (Lsmooth * s), 0.0, 1.0))


def step_line_search(
    phi_on_segment: Callable[[float], float],
    tol: float = 1e-8,
    cap: int = 100,
) -> float:
    """Minimize the segment restriction of the combined objective over [0, 1]."""
    alpha, _ = brent_min(phi_on_segment, 0.0, 1.0, tol=tol, cap=cap)
    return float(np.clip(alpha, 0.0, 1.0))
