"""Transversality-condition series and assumption diagnostics.

Two terminal expressions are audited along a candidate path:

* the Kamihigashi form ``K(T) = -v2(x(T), x(T+1), T) * x(T+1)``;
* the eating-up form ``E(T) = (v2(x(T-1), x(T), T-1) + v1(x(T), 0, T)) * x(T)``,
  where ``v1(x(T), 0, T)`` is the marginal value of the stock consumed at
  the horizon.

Limits are replaced by windowed tail estimates, so every verdict comes
with the tail it was read from.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Path, Problem
from .errors import HorizonExceedsPathError, InfeasibleError
from .numerics import TailEstimate, Trend, default_window, tail_estimate

ZERO_BAND = 1e-6


class TvcVerdict(str, enum.Enum):
    HOLDS_EQ_ZERO = "HOLDS_EQ_ZERO"
    HOLDS_LIMINF_NONNEG = "HOLDS_LIMINF_NONNEG"
    HOLDS_LIMSUP_NONNEG = "HOLDS_LIMSUP_NONNEG"
    VIOLATED = "VIOLATED"
    INDETERMINATE = "INDETERMINATE"


_SETTLED = (Trend.CONSTANT, Trend.DECREASING_TO_ZERO)


def _is_zero(tail: TailEstimate, band: float) -> bool:
    return tail.trend in _SETTLED and max(abs(tail.tail_inf), abs(tail.tail_sup)) <= band


def limit_zero_verdict(tail: TailEstimate, band: float = ZERO_BAND) -> TvcVerdict:
    """Verdict for a condition of the form ``lim s(T) = 0``."""
    if _is_zero(tail, band):
        return TvcVerdict.HOLDS_EQ_ZERO
    away = tail.tail_inf > band or tail.tail_sup < -band
    if away and tail.trend is not Trend.DECREASING_TO_ZERO:
        return TvcVerdict.VIOLATED
    return TvcVerdict.INDETERMINATE


def sign_verdict(tail: TailEstimate, band: float = ZERO_BAND) -> TvcVerdict:
    """Verdict for ``limsup s(T) >= 0``, reporting the stronger form when it holds."""
    if _is_zero(tail, band):
        return TvcVerdict.HOLDS_EQ_ZERO
    if tail.tail_inf >= -band:
        return TvcVerdict.HOLDS_LIMINF_NONNEG
    if tail.tail_sup >= -band:
        return TvcVerdict.HOLDS_LIMSUP_NONNEG
    if tail.trend is not Trend.DECREASING_TO_ZERO:
        return TvcVerdict.VIOLATED
    return TvcVerdict.INDETERMINATE


def tail_sides(tail: TailEstimate, band: float = ZERO_BAND) -> dict:
    """Both one-sided readings; which one matters depends on the admissible perturbation side."""
    return {
        "liminf_ge_zero": tail.tail_inf >= -band,
        "liminf_le_zero": tail.tail_inf <= band,
        "limsup_ge_zero": tail.tail_sup >= -band,
        "limsup_le_zero": tail.tail_sup <= band,
    }


@dataclass(frozen=True)
class SeriesAudit:
    horizons: np.ndarray
    values: np.ndarray
    tail: TailEstimate
    verdict: TvcVerdict | None = None
    sides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "series": [{"T": int(T), "value": float(v)} for T, v in zip(self.horizons, self.values)],
            "tail": self.tail.to_dict(),
            "sides": dict(self.sides),
        }
        if self.verdict is not None:
            out["verdict"] = self.verdict.value
        return out


@dataclass(frozen=True)
class TvcReport:
    Tmax: int
    kamihigashi: SeriesAudit
    eating_up: SeriesAudit

    def to_dict(self) -> dict:
        return {"Tmax": self.Tmax, "kamihigashi": self.kamihigashi.to_dict(), "eating_up": self.eating_up.to_dict()}

    def csv_rows(self) -> list[tuple]:
        """Rows ``(T, K, E)`` for ``T = 0..Tmax``; ``K`` is undefined at ``Tmax``, ``E`` at 0."""
        K = dict(zip(self.kamihigashi.horizons.tolist(), self.kamihigashi.values.tolist()))
        E = dict(zip(self.eating_up.horizons.tolist(), self.eating_up.values.tolist()))
        return [(T, K.get(T), E.get(T)) for T in range(self.Tmax + 1)]


def _need(path: Path, last_index: int) -> None:
    if path.N < last_index:
        raise HorizonExceedsPathError(last_index, path.N)


def _audit(horizons, values, window, verdict_fn) -> SeriesAudit:
    values = np.asarray(values, dtype=float)
    tail = tail_estimate(values, window or default_window(values.size))
    return SeriesAudit(np.asarray(horizons), values, tail, verdict_fn(tail) if verdict_fn else None, tail_sides(tail))


def kamihigashi_series(problem: Problem, path: Path, Tmax: int, window: int | None = None) -> SeriesAudit:
    """``K(T) = -v2(x(T), x(T+1), T) x(T+1)`` for ``T = 0..Tmax-1``; verdict tests ``lim K = 0``."""
    if Tmax < 1:
        raise ValueError("Tmax must be >= 1")
    _need(path, Tmax)
    x = path.values[: Tmax + 1]
    T = np.arange(Tmax)
    problem.v.require_feasible(x[:-1], x[1:])
    K = -np.asarray(problem.v.d2(x[:-1], x[1:], T), dtype=float) * x[1:]
    return _audit(T, K, window, limit_zero_verdict)


def _bracket(problem: Problem, x: np.ndarray, Tmax: int) -> np.ndarray:
    """``v2(x(T-1), x(T), T-1) + v1(x(T), 0, T)`` for ``T = 1..Tmax``."""
    v = problem.v
    T = np.arange(1, Tmax + 1)
    v.require_feasible(x[:Tmax], x[1 : Tmax + 1])
    cur = x[1 : Tmax + 1]
    ok = np.atleast_1d(np.asarray(v.feasible(cur, 0.0 * cur, T), dtype=bool))
    if not ok.all():
        i = int(np.argmin(ok))
        raise InfeasibleError(int(T[i]), float(cur[i]), 0.0, what="eating-up boundary term")
    return np.asarray(v.d2(x[:Tmax], cur, T - 1) + v.d1(cur, 0.0 * cur, T), dtype=float)


def eating_up_series(problem: Problem, path: Path, Tmax: int, window: int | None = None) -> SeriesAudit:
    """``E(T)`` for ``T = 1..Tmax``, judged as ``limsup E >= 0`` with both sides reported."""
    if Tmax < 1:
        raise ValueError("Tmax must be >= 1")
    _need(path, Tmax)
    x = path.values
    E = _bracket(problem, x, Tmax) * x[1 : Tmax + 1]
    return _audit(np.arange(1, Tmax + 1), E, window, sign_verdict)


def eating_up_series_euler(problem: Problem, path: Path, Tmax: int) -> np.ndarray:
    """``E(T)`` with ``v2(x(T-1), x(T), T-1)`` replaced by ``-v1(x(T), x(T+1), T)``.

    Agrees with :func:`eating_up_series` wherever the path satisfies the Euler
    equations; needs ``x(Tmax+1)``.
    """
    _need(path, Tmax + 1)
    v = problem.v
    x = path.values[: Tmax + 2]
    T = np.arange(1, Tmax + 1)
    cur, nxt = x[1 : Tmax + 1], x[2 : Tmax + 2]
    v.require_feasible(cur, nxt, 1)
    return np.asarray(-v.d1(cur, nxt, T) + v.d1(cur, 0.0 * cur, T), dtype=float) * cur


def directional_tvc(
    problem: Problem,
    path: Path,
    direction: Callable[[int], float] | Sequence[float],
    Tmax: int,
    window: int | None = None,
) -> SeriesAudit:
    """``(v2(x(T-1), x(T), T-1) + v1(x(T), 0, T)) p(T)`` for ``T = 1..Tmax``.

    ``direction`` is ``p`` as a callable or a sequence indexed by ``t``; it
    must vanish at ``t = 0``. Both tail extrema are in ``tail``.
    """
    if Tmax < 1:
        raise ValueError("Tmax must be >= 1")
    _need(path, Tmax)
    p = direction if callable(direction) else (lambda t, seq=direction: seq[t])
    if p(0) != 0:
        raise ValueError("perturbation direction must satisfy p(0) = 0")
    weights = np.array([float(p(t)) for t in range(1, Tmax + 1)])
    vals = _bracket(problem, path.values, Tmax) * weights
    return _audit(np.arange(1, Tmax + 1), vals, window, None)


def audit_tvc(problem: Problem, path: Path, Tmax: int, window: int | None = None) -> TvcReport:
    return TvcReport(
        Tmax,
        kamihigashi_series(problem, path, Tmax, window),
        eating_up_series(problem, path, Tmax, window),
    )


# ---------------------------------------------------------------------------
# assumption diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionReport:
    n_tested: int
    n_skipped: int
    concavity_violations: int
    v12_sign_violations: int
    continuity_max_jump: float
    worst_concavity_gap: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def assumption_diagnostics(
    problem: Problem,
    region: tuple[tuple[float, float], tuple[float, float]],
    n_samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-10,
    times: Sequence[int] = (0,),
) -> AssumptionReport:
    """Sample concavity, ``v12 >= 0`` and continuity of ``v`` over a box of ``(x, y)``.

    Pairs whose endpoints or blend leave the domain are skipped and counted.
    """
    (xlo, xhi), (ylo, yhi) = region
    if not (problem.lower <= xlo < xhi <= problem.upper):
        raise ValueError("sample region must lie inside the state bounds")
    rng = np.random.default_rng(seed)
    v = problem.v
    p = rng.uniform([xlo, ylo], [xhi, yhi], size=(n_samples, 2))
    q = rng.uniform([xlo, ylo], [xhi, yhi], size=(n_samples, 2))
    theta = rng.uniform(0.0, 1.0, size=n_samples)
    t = rng.choice(np.asarray(times), size=n_samples)
    m = theta[:, None] * p + (1.0 - theta[:, None]) * q

    def feas(a):
        return np.asarray(v.feasible(a[:, 0], a[:, 1], t), dtype=bool)

    keep = feas(p) & feas(q) & feas(m)
    p, q, m, theta, t = p[keep], q[keep], m[keep], theta[keep], t[keep]
    if p.size == 0:
        return AssumptionReport(0, n_samples, 0, 0, 0.0, 0.0)

    vp = np.asarray(v.value(p[:, 0], p[:, 1], t), dtype=float)
    vq = np.asarray(v.value(q[:, 0], q[:, 1], t), dtype=float)
    vm = np.asarray(v.value(m[:, 0], m[:, 1], t), dtype=float)
    chord = theta * vp + (1.0 - theta) * vq
    gap = vm - chord
    concave_bad = gap < -tol * (1.0 + np.abs(chord))

    d12 = np.asarray(v.d12(p[:, 0], p[:, 1], t), dtype=float)
    v12_bad = d12 < -tol

    h = 1e-8 * (1.0 + np.abs(p))
    shifted = p + h
    ok = feas(shifted)
    jump = 0.0
    if ok.any():
        vs = np.asarray(v.value(shifted[ok, 0], shifted[ok, 1], t[ok]), dtype=float)
        jump = float(np.max(np.abs(vs - vp[ok])))

    return AssumptionReport(
        n_tested=int(p.shape[0]),
        n_skipped=int(n_samples - p.shape[0]),
        concavity_violations=int(concave_bad.sum()),
        v12_sign_violations=int(v12_bad.sum()),
        continuity_max_jump=jump,
        worst_concavity_gap=float(min(0.0, gap.min())),
    )
