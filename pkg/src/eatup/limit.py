"""Horizon limits ``x°(t) = lim_T x_T(t)`` and the limit-optimality gap.

The gap at horizon ``T`` compares the finite-horizon optimum with the
eating-up truncation of the limit path::

    gap(T) = sum_{t<=T} v(x_T(t), x_T(t+1), t) - v(x°~T(t), x°~T(t+1), t)

When ``gap(T) -> 0`` no attainable path overtakes ``x°`` under the
modified criterion; the module reports the numerical evidence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import Path, Problem, truncated_terms
from .errors import EatupError, WindowError
from .numerics import NewtonOptions, TailEstimate, Trend, default_window, tail_estimate
from .solver import SolveReport, solve_finite


def doubling_schedule(window: int, max_T: int) -> list[int]:
    """``window, 2*window, 4*window, ...`` below ``max_T``, then ``max_T`` itself."""
    if window < 1:
        raise WindowError("window must be >= 1")
    if max_T < window:
        raise WindowError(f"max-T {max_T} is below the window {window}")
    out, T = [], window
    while T < max_T:
        out.append(T)
        T *= 2
    out.append(max_T)
    return out


def linear_schedule(window: int, max_T: int, step: int) -> list[int]:
    if step < 1:
        raise WindowError("linear schedule step must be >= 1")
    if max_T < window:
        raise WindowError(f"max-T {max_T} is below the window {window}")
    out = list(range(window, max_T + 1, step))
    if out[-1] != max_T:
        out.append(max_T)
    return out


def parse_schedule(spec: str, window: int, max_T: int) -> list[int]:
    """Parse ``doubling`` or ``linear:<step>``."""
    if spec == "doubling":
        return doubling_schedule(window, max_T)
    if spec.startswith("linear:"):
        try:
            step = int(spec.split(":", 1)[1])
        except ValueError:
            raise WindowError(f"bad linear schedule {spec!r}") from None
        return linear_schedule(window, max_T, step)
    raise WindowError(f"unknown schedule {spec!r}; use 'doubling' or 'linear:<step>'")


class HorizonSolveError(EatupError):
    def __init__(self, horizon: int, cause: Exception):
        super().__init__(f"solve failed at horizon T={horizon}: {cause}")
        self.horizon = horizon
        self.cause = cause


def _solve_tagged(problem, T, opts) -> SolveReport:
    try:
        return solve_finite(problem, T, opts)
    except EatupError as exc:
        raise HorizonSolveError(T, exc) from exc


@dataclass(frozen=True)
class GapReport:
    horizons: np.ndarray
    deltas: np.ndarray
    tail: TailEstimate

    @property
    def verdict(self) -> Trend:
        return self.tail.trend

    @property
    def vanishes(self) -> bool:
        """Trend is settled toward zero and the latest gap is inside ``1e-6``."""
        band = 1e-6
        settled = self.tail.trend in (Trend.CONSTANT, Trend.DECREASING_TO_ZERO)
        return settled and abs(self.tail.last_value) <= band

    def to_records(self) -> list[dict]:
        return [{"T": int(T), "delta": float(d)} for T, d in zip(self.horizons, self.deltas)]


@dataclass(frozen=True)
class LimitReport:
    window: int
    limit_path: Path
    horizon_schedule: tuple
    per_t_convergence: np.ndarray
    step_deltas: np.ndarray
    converged: bool
    tol: float
    gap: GapReport | None = None
    longest: SolveReport | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = {
            "window": self.window,
            "horizon_schedule": [int(T) for T in self.horizon_schedule],
            "converged": self.converged,
            "tol": self.tol,
            "limit_path": self.limit_path.to_records(),
            "per_t_convergence": [float(d) for d in self.per_t_convergence],
            "step_deltas": [float(d) for d in self.step_deltas],
        }
        if self.gap is not None:
            out["gap_series"] = self.gap.to_records()
            out["gap_tail"] = self.gap.tail.to_dict()
            out["gap_verdict"] = self.gap.verdict.value
            out["gap_vanishes"] = self.gap.vanishes
        return out


def limit_path(
    problem: Problem,
    window: int,
    schedule: Sequence[int] | None = None,
    tol: float = 1e-8,
    opts: NewtonOptions | None = None,
    *,
    max_T: int = 256,
    gap_horizons: Iterable[int] | None | bool = None,
) -> LimitReport:
    """Solve each horizon in ``schedule`` and read off ``x°(0..window)``.

    The limit path is the solution at the largest horizon. It is declared
    converged when the last two schedule entries agree to ``tol`` on
    ``t <= window``. Unless ``gap_horizons`` is ``False``, the gap series is
    computed for ``T = 1..T_last // 2`` (or the given horizons) using the
    largest-horizon solution as the stand-in for ``x°``.
    """
    if schedule is None:
        schedule = doubling_schedule(window, max_T)
    schedule = [int(T) for T in schedule]
    if window < 1:
        raise WindowError("window must be >= 1")
    if len(schedule) < 2:
        raise WindowError("a schedule needs at least two horizons")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise WindowError("schedule must be strictly increasing")
    if schedule[0] < window:
        raise WindowError(f"every horizon must be >= the window {window}; got {schedule[0]}")

    reports = [_solve_tagged(problem, T, opts) for T in schedule]
    heads = np.array([r.path.values[: window + 1] for r in reports])
    diffs = np.abs(np.diff(heads, axis=0))
    step_deltas = diffs.max(axis=1)
    per_t = diffs[-1]
    longest = reports[-1]

    gap = None
    if gap_horizons is not False:
        if gap_horizons is None or gap_horizons is True:
            gap_horizons = range(1, longest.horizon // 2 + 1)
        gap = optimality_gap(problem, longest.path, gap_horizons, opts)

    return LimitReport(
        window=window,
        limit_path=Path(heads[-1]),
        horizon_schedule=tuple(schedule),
        per_t_convergence=per_t,
        step_deltas=step_deltas,
        converged=bool(float(per_t.max()) < tol),
        tol=tol,
        gap=gap,
        longest=longest,
    )


def _gap_value(problem: Problem, solution: Path, limit: Path, T: int) -> float:
    # termwise differences keep the identical early terms from cancelling noisily
    diff = truncated_terms(problem, solution, T) - truncated_terms(problem, limit, T)
    return math.fsum(diff)


def optimality_gap(
    problem: Problem,
    limit: Path | Callable[[int], Path],
    horizons: Iterable[int],
    opts: NewtonOptions | None = None,
    window: int | None = None,
) -> GapReport:
    """Gap series between re-solved horizon-``T`` optima and the limit path.

    ``limit`` is a path covering the largest horizon, or a callable
    ``length -> Path`` (e.g. a closed-form generator).
    """
    horizons = [int(T) for T in horizons]
    if not horizons:
        raise WindowError("no horizons given for the gap series")
    T_max = max(horizons)
    if callable(limit) and not isinstance(limit, Path):
        limit = limit(T_max)
    if limit.N < T_max:
        raise WindowError(f"limit path covers t<={limit.N} but the gap needs t<={T_max}")
    deltas = np.array(
        [_gap_value(problem, _solve_tagged(problem, T, opts).path, limit, T) for T in horizons]
    )
    tail = tail_estimate(deltas, window or default_window(deltas.size))
    return GapReport(np.array(horizons), deltas, tail)


def agreeable_gap(problem, limit, horizons, opts=None, window=None) -> GapReport:
    """The agreeable-plan loss series; term for term the same sum as :func:`optimality_gap`."""
    return optimality_gap(problem, limit, horizons, opts, window)
