"""Numerical kernels: finite differences, tridiagonal Newton, tail statistics.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EatupError,
    NoConvergenceError,
    SingularJacobianError,
    StencilError,
    WindowError,
)

_CBRT_EPS = np.finfo(float).eps ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# tail estimation
# ---------------------------------------------------------------------------


class Trend(str, enum.Enum):
    DECREASING_TO_ZERO = "DECREASING_TO_ZERO"
    INCREASING = "INCREASING"
    OSCILLATING = "OSCILLATING"
    CONSTANT = "CONSTANT"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class TailEstimate:
    """Windowed stand-in for liminf / limsup of a real series.

    ``tail_inf`` and ``tail_sup`` are the extrema of the last ``window``
    entries; ``trend`` labels how the tail behaves so a verdict built on the
    estimate can say why it trusts it.
    """

    series_length: int
    window: int
    tail_inf: float
    tail_sup: float
    last_value: float
    trend: Trend

    def to_dict(self) -> dict:
        return {
            "series_length": self.series_length,
            "window": self.window,
            "tail_inf": self.tail_inf,
            "tail_sup": self.tail_sup,
            "last_value": self.last_value,
            "trend": self.trend.value,
        }


def classify_trend(series: np.ndarray, window: int) -> Trend:
    tail = series[-window:]
    last = float(tail[-1])
    spread = float(tail.max() - tail.min())
    if spread < 1e-12 * (1.0 + abs(last)):
        return Trend.CONSTANT

    mag = np.abs(tail)
    if np.all(np.diff(mag) <= 0.0):
        if abs(last) < 1e-6 * (abs(float(series[0])) + 1.0):
            return Trend.DECREASING_TO_ZERO
        # slow (power-law) decay: the remaining magnitude is no larger than the
        # drop across the window extrapolated over the series length
        drop = float(mag[0] - mag[-1])
        if drop > 0.0 and abs(last) <= 2.0 * (len(series) / window) * drop:
            return Trend.DECREASING_TO_ZERO

    signs = np.sign(tail)
    signs = signs[signs != 0]
    if window > 1 and np.count_nonzero(signs[1:] != signs[:-1]) >= window / 4:
        return Trend.OSCILLATING

    if window > 1:
        slope = np.polyfit(np.arange(window, dtype=float), tail, 1)[0]
        if slope > 0:
            return Trend.INCREASING
    return Trend.INDETERMINATE


def tail_estimate(series: Sequence[float], window: int) -> TailEstimate:
    a = np.asarray(series, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise WindowError("tail estimate needs a non-empty 1-D series")
    if window < 1 or window > a.size:
        raise WindowError(f"window {window} invalid for a series of length {a.size}")
    tail = a[-window:]
    return TailEstimate(
        series_length=int(a.size),
        window=int(window),
        tail_inf=float(tail.min()),
        tail_sup=float(tail.max()),
        last_value=float(tail[-1]),
        trend=classify_trend(a, window),
    )


def default_window(n: int, cap: int = 50) -> int:
    return max(1, min(cap, n))


def tail_estimate_duality(series: Sequence[float], window: int | None = None):
    """Estimate ``series`` and its negation, checking liminf a = -limsup(-a).

    Returns ``(estimate(a), estimate(-a))``.
    """
    a = np.asarray(series, dtype=float)
    if window is None:
        window = default_window(a.size)
    lo = tail_estimate(a, window)
    hi = tail_estimate(-a, window)
    if lo.tail_inf != -hi.tail_sup or lo.tail_sup != -hi.tail_inf:
        raise ArithmeticError("liminf/limsup duality broken")
    return lo, hi


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def central_diff(f: Callable[[float], float], x: float, scale: float = 1.0) -> float:
    h = _CBRT_EPS * max(abs(x), scale)
    # make the step exactly representable so (x+h)-(x-h) is exactly 2h
    h = (x + h) - x
    try:
        fp = f(x + h)
        fm = f(x - h)
    except (EatupError, ArithmeticError, ValueError) as exc:
        raise StencilError(f"stencil point outside the domain near x={x!r}") from exc
    if not (math.isfinite(fp) and math.isfinite(fm)):
        raise StencilError(f"non-finite value on stencil near x={x!r}")
    return (fp - fm) / (2.0 * h)


# ---------------------------------------------------------------------------
# tridiagonal Newton
# ---------------------------------------------------------------------------


def solve_tridiagonal(sub, diag, sup, rhs) -> np.ndarray:
    """Thomas sweep for ``sub[i] u[i-1] + diag[i] u[i] + sup[i] u[i+1] = rhs[i]``.

    ``sub[0]`` and ``sup[-1]`` are ignored. No pivoting; an exactly zero
    pivot raises :class:`SingularJacobianError`.
    """
    n = len(diag)
    c = np.empty(n)
    d = np.empty(n)
    piv = diag[0]
    if piv == 0.0 or not np.isfinite(piv):
        raise SingularJacobianError(0)
    c[0] = sup[0] / piv if n > 1 else 0.0
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * c[i - 1]
        if piv == 0.0 or not np.isfinite(piv):
            raise SingularJacobianError(i)
        c[i] = sup[i] / piv if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv
    u = np.empty(n)
    u[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        u[i] = d[i] - c[i] * u[i + 1]
    return u


@dataclass(frozen=True)
class NewtonOptions:
    """Settings for :func:`newton_tridiag`.

    Convergence requires both ``max|F| <= tol`` and a final Newton correction
    no larger than ``step_tol * (1 + max|x|)``; the second test guards rows
    that are tiny only because of discounting.
    """

    tol: float = 1e-12
    max_iter: int = 100
    damping: float = 1.0
    bound_margin: float = 1e-9
    step_tol: float = 1e-10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not 0 < self.bound_margin < 0.5:
            raise ValueError("bound_margin must lie in (0, 0.5)")
        if not self.step_tol > 0:
            raise ValueError("step_tol must be positive")


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool


def _clip_limits(bounds, margin):
    lo, hi = bounds
    if math.isfinite(lo) and math.isfinite(hi):
        pad_lo = pad_hi = margin * (hi - lo)
    else:
        pad_lo = margin * max(1.0, abs(lo)) if math.isfinite(lo) else 0.0
        pad_hi = margin * max(1.0, abs(hi)) if math.isfinite(hi) else 0.0
    return lo + pad_lo, hi - pad_hi


def newton_tridiag(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian_bands: Callable[[np.ndarray], tuple],
    x_init,
    bounds: tuple[float, float] = (-math.inf, math.inf),
    opts: NewtonOptions | None = None,
) -> NewtonResult:
    """Damped Newton iteration for a square system with tridiagonal Jacobian.

    ``jacobian_bands(x)`` returns ``(sub, diag, sup)``. A step is halved until
    the residual max-norm decreases (at most 30 times) and every iterate is
    clipped to stay ``bound_margin`` inside ``bounds``. Any exception raised by
    ``residual`` on a trial point counts as "no decrease".
    """
    opts = opts or NewtonOptions()
    lo, hi = bounds
    x = np.array(x_init, dtype=float)
    if np.any(x <= lo) or np.any(x >= hi):
        raise ValueError("initial guess must lie strictly inside the bounds")
    clip_lo, clip_hi = _clip_limits(bounds, opts.bound_margin)

    F = np.asarray(residual(x), dtype=float)
    if F.shape != x.shape:
        raise ValueError("residual dimension must equal the number of unknowns")
    norm = float(np.max(np.abs(F))) if F.size else 0.0
    it = 0
    while True:
        if x.size == 0:
            return NewtonResult(x, 0, 0.0, True)
        sub, diag, sup = jacobian_bands(x)
        step = -solve_tridiagonal(sub, diag, sup, F)
        small = float(np.max(np.abs(step))) <= opts.step_tol * (1.0 + float(np.max(np.abs(x))))
        if norm <= opts.tol and small:
            # the pending correction is below step_tol; take it when it keeps
            # the residual within tolerance (quadratic convergence makes it free)
            polished = np.clip(x + step, clip_lo, clip_hi)
            try:
                n_pol = float(np.max(np.abs(residual(polished))))
            except (EatupError, ArithmeticError, ValueError):
                n_pol = math.inf
            if n_pol <= opts.tol:
                return NewtonResult(polished, it, n_pol, True)
            return NewtonResult(x, it, norm, True)
        if it >= opts.max_iter:
            raise NoConvergenceError("Newton iteration limit reached", norm, it, x)

        lam = opts.damping
        for _ in range(31):
            trial = np.clip(x + lam * step, clip_lo, clip_hi)
            try:
                F_trial = np.asarray(residual(trial), dtype=float)
                n_trial = float(np.max(np.abs(F_trial)))
            except (EatupError, ArithmeticError, ValueError):
                n_trial = math.inf
            if n_trial < norm or n_trial <= opts.tol:
                break
            lam *= 0.5
        else:
            raise NoConvergenceError("line search failed to decrease the residual", norm, it, x)
        x, F, norm = trial, F_trial, n_trial
        it += 1
