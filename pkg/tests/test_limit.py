import numpy as np
import pytest

from eatup.core import Path
from eatup.errors import WindowError
from eatup.limit import (
    HorizonSolveError,
    agreeable_gap,
    doubling_schedule,
    limit_path,
    linear_schedule,
    optimality_gap,
    parse_schedule,
)
from eatup.models import GrowthParams, growth_finite_closed_form, growth_limit_path, growth_problem
from eatup.numerics import Trend
from eatup.solver import solve_finite


def test_growth_limit_first_entries(growth):
    rep = limit_path(growth, 2, [25, 50, 100, 200], gap_horizons=False)
    x = rep.limit_path.values
    assert x.size == 3
    assert x[0] == 0.25
    assert x[1] == pytest.approx(0.225, abs=1e-12)
    assert x[2] == pytest.approx(0.45 * 0.225**0.5, abs=1e-12)
    assert x[2] == pytest.approx(0.2134, abs=1e-4)
    assert rep.converged


def test_growth_steady_start_is_fixed():
    pr = growth_problem(GrowthParams(0.5, 0.9, 0.2025))
    rep = limit_path(pr, 10, max_T=160, gap_horizons=False)
    np.testing.assert_allclose(rep.limit_path.values, 0.2025, rtol=1e-12)


def test_counterexample_limit(counterexample):
    rep = limit_path(counterexample, 5, [5, 10])
    assert rep.limit_path.values.tolist() == [2.0] * 6
    assert rep.converged
    assert not np.any(rep.step_deltas)
    assert not np.any(rep.gap.deltas)


def test_limit_matches_closed_form_window_20(growth):
    rep = limit_path(growth, 20, max_T=256, gap_horizons=False)
    oracle = growth_limit_path(GrowthParams(), 20).values
    assert np.max(np.abs(rep.limit_path.values - oracle)) <= 1e-6
    assert rep.horizon_schedule == (20, 40, 80, 160, 256)


@pytest.mark.parametrize("params", [GrowthParams(0.5, 0.9, 0.25), GrowthParams(0.3, 1.0, 0.1), GrowthParams(0.7, 0.95, 0.6)])
def test_step_deltas_nonincreasing_on_doubling(params):
    rep = limit_path(growth_problem(params), 8, max_T=256, gap_horizons=False)
    d = rep.step_deltas
    assert np.all(d >= 0)
    # deltas that have already hit rounding level cannot be ordered meaningfully
    assert np.all(np.diff(d) <= 1e-15)


@pytest.mark.parametrize("params", [GrowthParams(0.5, 0.9, 0.25), GrowthParams(0.3, 1.0, 0.7)])
def test_limit_starts_at_x0(params):
    rep = limit_path(growth_problem(params), 3, [3, 6], gap_horizons=False)
    assert rep.limit_path.values[0] == params.k0
    assert np.all(rep.per_t_convergence >= 0)
    assert rep.per_t_convergence[0] == 0.0


@pytest.mark.parametrize("alpha,beta", [(0.3, 0.9), (0.5, 1.0), (0.6, 0.95)])
def test_savings_ratio_monotone_in_horizon_from_solver(alpha, beta):
    params = GrowthParams(alpha, beta, 0.3)
    pr = growth_problem(params)
    ab = alpha * beta
    for t in (0, 2):
        ratios = []
        for T in range(t + 1, t + 50):
            k = solve_finite(pr, T).path.values
            r = k[t + 1] / k[t] ** alpha
            n = T - t
            assert r == pytest.approx(ab * (1 - ab**n) / (1 - ab ** (n + 1)), abs=1e-10)
            ratios.append(r)
        assert np.all(np.diff(ratios) > -1e-10)
        assert ratios[-1] == pytest.approx(ab, abs=1e-10)


def test_non_convergence_is_reported(growth):
    rep = limit_path(growth, 5, [5, 6], tol=1e-12, gap_horizons=False)
    assert not rep.converged


@pytest.mark.parametrize(
    "schedule",
    [[10], [10, 10], [20, 10], [4, 40]],
)
def test_bad_schedules(growth, schedule):
    with pytest.raises(WindowError):
        limit_path(growth, 5, schedule)


def test_solve_failure_carries_horizon(growth):
    from eatup.numerics import NewtonOptions

    with pytest.raises(HorizonSolveError) as info:
        limit_path(growth, 2, [2, 4], opts=NewtonOptions(max_iter=1, tol=1e-30), gap_horizons=False)
    assert info.value.horizon == 2


def test_schedules():
    assert doubling_schedule(20, 256) == [20, 40, 80, 160, 256]
    assert doubling_schedule(5, 5) == [5]
    assert linear_schedule(10, 35, 10) == [10, 20, 30, 35]
    assert parse_schedule("linear:50", 20, 120) == [20, 70, 120]
    assert parse_schedule("doubling", 2, 8) == [2, 4, 8]
    for bad in ("linear:x", "cubic", "linear:0"):
        with pytest.raises(WindowError):
            parse_schedule(bad, 2, 8)
    with pytest.raises(WindowError):
        doubling_schedule(30, 20)


def test_counterexample_gap_is_exactly_zero(counterexample):
    gap = optimality_gap(counterexample, Path([2.0] * 60), range(1, 60))
    assert not np.any(gap.deltas)
    assert gap.verdict is Trend.CONSTANT
    assert gap.vanishes


def test_growth_gap_vanishes():
    params = GrowthParams(0.5, 0.9, 0.25)
    pr = growth_problem(params)
    gap = optimality_gap(pr, lambda n: growth_limit_path(params, n), range(1, 201))
    assert abs(gap.deltas[-1]) <= 1e-6
    assert gap.verdict is Trend.DECREASING_TO_ZERO
    assert gap.vanishes
    # the finite optimum beats the truncated limit path at every horizon
    assert np.all(gap.deltas >= -1e-12)


def test_growth_undiscounted_gap_is_reported():
    params = GrowthParams(0.5, 1.0, 0.25)
    gap = optimality_gap(growth_problem(params), lambda n: growth_limit_path(params, n), range(1, 80))
    assert gap.deltas.shape == (79,)
    assert np.all(np.isfinite(gap.deltas))


@pytest.mark.parametrize("beta", [0.9, 1.0])
def test_agreeable_gap_is_the_same_series(beta):
    params = GrowthParams(0.5, beta, 0.25)
    pr = growth_problem(params)
    lim = growth_limit_path(params, 60)
    a = optimality_gap(pr, lim, range(1, 60))
    b = agreeable_gap(pr, lim, range(1, 60))
    assert np.array_equal(a.deltas, b.deltas)


def test_gap_needs_long_enough_limit(growth):
    with pytest.raises(WindowError):
        optimality_gap(growth, Path([0.25] * 5), [10])
    with pytest.raises(WindowError):
        optimality_gap(growth, Path([0.25] * 5), [])


def test_gap_uses_resolved_optima():
    params = GrowthParams(0.5, 0.9, 0.25)
    pr = growth_problem(params)
    lim = growth_limit_path(params, 10)
    gap = optimality_gap(pr, lim, [4])
    from eatup.core import truncated_sum

    opt = growth_finite_closed_form(params, 4)[0]
    assert gap.deltas[0] == pytest.approx(truncated_sum(pr, opt, 4) - truncated_sum(pr, lim, 4), abs=1e-13)


def test_limit_report_serializes(counterexample):
    d = limit_path(counterexample, 2, [2, 4]).to_dict()
    assert d["converged"] is True
    assert len(d["limit_path"]) == 3
    assert d["gap_verdict"] == "CONSTANT"
