"""Finite-horizon solver for the eating-up truncated problem.

For horizon ``T`` the unknowns are ``x(1..T)`` with ``x(0) = x0`` and
``x(T+1) = 0``; the interior optimum solves the Euler system

    F_s = v2(x(s-1), x(s), s-1) + v1(x(s), x(s+1), s) = 0,  s = 1..T,

whose Jacobian is tridiagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Path, Problem, truncated_sum
from .errors import BoundaryInfeasibleError, InfeasibleError, NoConvergenceError
from .numerics import NewtonOptions, _clip_limits, newton_tridiag


@dataclass(frozen=True)
class SolveReport:
    path: Path
    horizon: int
    euler_residual_max: float
    iterations: int
    converged: bool
    objective: float

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "converged": self.converged,
            "iterations": self.iterations,
            "euler_residual_max": self.euler_residual_max,
            "objective": self.objective,
            "path": self.path.to_records(),
        }


@dataclass(frozen=True)
class EulerResiduals:
    residuals: np.ndarray
    max_norm: float


def euler_residual(problem: Problem, path: Path) -> EulerResiduals:
    """Residuals ``v2(x(t), x(t+1), t) + v1(x(t+1), x(t+2), t+1)``, ``t = 0..N-2``.

    The path must carry its successor values, e.g. a finite-horizon solution
    with the terminal ``x(T+1) = 0`` appended.
    """
    x = path.values
    if x.size < 2:
        raise ValueError("euler residual needs at least two path values")
    if x.size == 2:
        return EulerResiduals(np.zeros(0), 0.0)
    v = problem.v
    v.require_feasible(x[:-1], x[1:])
    t = np.arange(x.size - 2)
    r = v.d2(x[:-2], x[1:-1], t) + v.d1(x[1:-1], x[2:], t + 1)
    r = np.asarray(r, dtype=float)
    return EulerResiduals(r, float(np.max(np.abs(r))))


def _euler_system(problem: Problem, T: int):
    v = problem.v
    x0 = problem.x0
    t_all = np.arange(T + 1)

    def full(u):
        return np.concatenate(([x0], u, [0.0]))

    def residual(u):
        x = full(u)
        v.require_feasible(x[:-1], x[1:])
        return np.asarray(v.d2(x[:-2], x[1:-1], t_all[:-1]) + v.d1(x[1:-1], x[2:], t_all[1:]), dtype=float)

    def bands(u):
        x = full(u)
        left = (x[:-2], x[1:-1], t_all[:-1])
        right = (x[1:-1], x[2:], t_all[1:])
        diag = np.asarray(v.d22(*left) + v.d11(*right), dtype=float)
        sub = np.asarray(v.d21(*left), dtype=float) * np.ones(T)
        sup = np.asarray(v.d12(*right), dtype=float) * np.ones(T)
        return sub, diag, sup

    return residual, bands


def initial_guess(problem: Problem, T: int, policy: str = "geometric", margin: float = 1e-3) -> np.ndarray:
    """Starting values for ``x(1..T)``.

    ``geometric`` moves from ``x0`` toward the midpoint of the state bounds
    (``x0`` itself when a bound is infinite); ``linear`` moves from ``x0``
    toward a point just above ``max(lower, 0)``.
    """
    x0, lo, hi = problem.x0, problem.lower, problem.upper
    s = np.arange(1, T + 1) / (T + 1)
    if policy == "geometric":
        mid = 0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else x0
        if x0 > 0 and mid > 0:
            return x0 * (mid / x0) ** s
        return x0 + (mid - x0) * s
    if policy == "linear":
        base = max(lo, 0.0)
        width = (hi - lo) if math.isfinite(hi - lo) else max(1.0, abs(x0))
        target = base + margin * width
        if not lo < target < hi:
            target = x0
        return x0 + (target - x0) * s
    raise ValueError(f"unknown initial guess policy {policy!r}")


def solve_finite(problem: Problem, T: int, opts: NewtonOptions | None = None, guess="auto") -> SolveReport:
    """Optimal finite-horizon path for ``T`` under the eating-up boundary.

    ``guess`` is ``"auto"`` (geometric, then linear on failure), a policy
    name understood by :func:`initial_guess`, or an explicit array of
    ``T`` starting values.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    opts = opts or NewtonOptions()
    v = problem.v
    if T == 0:
        if not bool(v.feasible(problem.x0, 0.0, 0)):
            raise BoundaryInfeasibleError(0, problem.x0)
        path = Path([problem.x0])
        return SolveReport(path, 0, 0.0, 0, True, truncated_sum(problem, path, 0))

    residual, bands = _euler_system(problem, T)
    if isinstance(guess, str):
        policies = ["geometric", "linear"] if guess == "auto" else [guess]
        starts = [initial_guess(problem, T, p) for p in policies]
    else:
        starts = [np.asarray(guess, dtype=float)]

    lo, hi = _clip_limits(problem.bounds, opts.bound_margin)
    failure: Exception | None = None
    for start in starts:
        start = np.clip(start, lo, hi)
        try:
            res = newton_tridiag(residual, bands, start, problem.bounds, opts)
            break
        except (NoConvergenceError, InfeasibleError) as exc:
            failure = exc
    else:
        assert failure is not None
        raise failure

    x = np.concatenate(([problem.x0], res.x))
    path = Path(x)
    if not bool(v.feasible(x[-1], 0.0, T)):
        raise BoundaryInfeasibleError(T, float(x[-1]))
    eres = euler_residual(problem, path.append([0.0]))
    return SolveReport(
        path=path,
        horizon=T,
        euler_residual_max=eres.max_norm,
        iterations=res.iterations,
        converged=res.converged,
        objective=truncated_sum(problem, path, T),
    )
