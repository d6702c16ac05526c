"""Built-in models with closed-form oracles.

* ``growth``: one-sector growth with log utility and Cobb-Douglas output,
  ``v(x, y, t) = beta**t * ln(x**alpha - y)`` on ``0 < k < 1``.
* ``counterexample``: ``v(x, y, t) = -(x - a)**2 - b*(y - x)`` with
  ``x0 = a``, unbounded states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import Path, Problem, ReturnFunction
from .errors import ParameterError


@dataclass(frozen=True)
class GrowthParams:
    alpha: float = 0.5
    beta: float = 0.9
    k0: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not 0.0 < self.k0 < 1.0:
            raise ParameterError(f"k0 must lie in (0, 1), got {self.k0!r}")

    @property
    def steady_state(self) -> float:
        ab = self.alpha * self.beta
        return ab ** (1.0 / (1.0 - self.alpha))


@dataclass(frozen=True)
class CounterexampleParams:
    a: float = 2.0
    b: float = 3.0
    x0: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"a must be positive, got {self.a!r}")
        if not self.b > 0:
            raise ParameterError(f"b must be positive, got {self.b!r}")
        if self.x0 is None:
            object.__setattr__(self, "x0", float(self.a))


# -- growth -----------------------------------------------------------------


def growth_return(alpha: float, beta: float) -> ReturnFunction:
    def _c(x, y):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.power(x, alpha) - y

    def _disc(t):
        return np.power(beta, np.asarray(t, dtype=float))

    def value(x, y, t):
        with np.errstate(invalid="ignore", divide="ignore"):
            return _disc(t) * np.log(_c(x, y))

    def d1(x, y, t):
        return _disc(t) * alpha * np.power(x, alpha - 1.0) / _c(x, y)

    def d2(x, y, t):
        return -_disc(t) / _c(x, y)

    def d11(x, y, t):
        c = _c(x, y)
        fp = alpha * np.power(x, alpha - 1.0)
        fpp = alpha * (alpha - 1.0) * np.power(x, alpha - 2.0)
        return _disc(t) * (fpp / c - fp * fp / (c * c))

    def d12(x, y, t):
        c = _c(x, y)
        return _disc(t) * alpha * np.power(x, alpha - 1.0) / (c * c)

    def d22(x, y, t):
        c = _c(x, y)
        return -_disc(t) / (c * c)

    def feasible(x, y, t):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            return (x > 0) & (np.asarray(y, dtype=float) < np.power(np.abs(x), alpha)) & np.isfinite(
                np.asarray(t, dtype=float)
            )

    return ReturnFunction(value, d1, d2, d11, d12, d12, d22, feasible)


def growth_problem(params: GrowthParams) -> Problem:
    return Problem(
        growth_return(params.alpha, params.beta),
        params.k0,
        0.0,
        1.0,
        name=f"growth(alpha={params.alpha}, beta={params.beta}, k0={params.k0})",
    )


def savings_ratio(params: GrowthParams, remaining: int) -> float:
    """Share of output saved with ``remaining = T - t`` periods left."""
    ab = params.alpha * params.beta
    return ab * (1.0 - ab**remaining) / (1.0 - ab ** (remaining + 1))


def growth_finite_closed_form(params: GrowthParams, T: int):
    """Optimal ``k(0..T)`` and ``c(0..T)`` for horizon ``T`` with ``k(T+1) = 0``.

    Built from the savings-policy recursion
    ``k(t+1) = ab (1 - ab**(T-t)) / (1 - ab**(T-t+1)) * k(t)**alpha``.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    a = params.alpha
    k = np.empty(T + 2)
    k[0] = params.k0
    for t in range(T + 1):
        k[t + 1] = savings_ratio(params, T - t) * k[t] ** a
    c = k[:-1] ** a - k[1:]
    return Path(k[:-1]), c


def growth_limit_closed_form(params: GrowthParams, window: int):
    """Limit path ``k°``, consumption ``c°`` and shadow price ``λ°`` on ``t = 0..window``.

    The shadow price uses its own closed form rather than ``1/c°`` so that
    ``λ° c° = 1`` is a genuine cross-check.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    a, ab = params.alpha, params.alpha * params.beta
    ss = params.steady_state
    t = np.arange(window + 1)
    ratio = params.k0 / ss
    k = ss * ratio ** (a**t)
    c = (1.0 - ab) * ab ** (a / (1.0 - a)) * ratio ** (a ** (t + 1))
    lam = (1.0 - ab) ** -1 * ab ** (-a / (1.0 - a)) * ratio ** (-(a ** (t + 1)))
    return Path(k), c, lam


def growth_limit_path(params: GrowthParams, length: int) -> Path:
    return growth_limit_closed_form(params, length)[0]


# -- counterexample -----------------------------------------------------------


def counterexample_return(a: float, b: float) -> ReturnFunction:
    def value(x, y, t):
        return -((x - a) ** 2) - b * (y - x)

    def d1(x, y, t):
        return -2.0 * (x - a) + b + 0.0 * y

    def d2(x, y, t):
        return -b + 0.0 * (x + y)

    def d11(x, y, t):
        return -2.0 + 0.0 * (x + y)

    def zero(x, y, t):
        return 0.0 * (x + y)

    def feasible(x, y, t):
        return np.isfinite(np.asarray(x, dtype=float) + np.asarray(y, dtype=float) + np.asarray(t))

    return ReturnFunction(value, d1, d2, d11, zero, zero, zero, feasible)


def counterexample_problem(params: CounterexampleParams) -> Problem:
    return Problem(
        counterexample_return(params.a, params.b),
        params.x0,
        -math.inf,
        math.inf,
        name=f"counterexample(a={params.a}, b={params.b})",
    )


def counterexample_solution(params: CounterexampleParams, T: int) -> Path:
    if params.x0 != params.a:
        raise ParameterError("the closed-form solution is only known for x0 = a")
    return Path(np.full(T + 1, float(params.a)))


# -- generic path generators ---------------------------------------------------


def constant_path(value: float, length: int) -> Path:
    return Path(np.full(length + 1, float(value)))


# -- registry -----------------------------------------------------------------


def _pick(params: Mapping[str, float], allowed, label):
    unknown = set(params) - set(allowed)
    if unknown:
        raise ParameterError(f"unknown {label} parameter(s): {', '.join(sorted(unknown))}")
    return {k: float(v) for k, v in params.items()}


def model_registry(name: str, params: Mapping[str, float] | None = None, **custom) -> Problem:
    """Build a :class:`Problem` by model name.

    ``custom`` (alias ``custom-expr``) takes ``expr`` and optionally
    ``feasible_if``, ``bounds`` and ``x0`` as keyword arguments; ``params``
    then binds the expression's named parameters.
    """
    params = dict(params or {})
    if name == "growth":
        return growth_problem(GrowthParams(**_pick(params, ("alpha", "beta", "k0"), "growth")))
    if name == "counterexample":
        return counterexample_problem(CounterexampleParams(**_pick(params, ("a", "b", "x0"), "counterexample")))
    if name in ("custom", "custom-expr"):
        from .expr import expression_problem

        if not custom.get("expr"):
            raise ParameterError("custom model requires an expression")
        bounds = custom.get("bounds") or (-math.inf, math.inf)
        if "x0" not in custom or custom["x0"] is None:
            raise ParameterError("custom model requires x0")
        return expression_problem(
            custom["expr"],
            params,
            x0=float(custom["x0"]),
            bounds=(float(bounds[0]), float(bounds[1])),
            feasible_if=custom.get("feasible_if"),
        )
    raise ParameterError(f"unknown model {name!r}")
