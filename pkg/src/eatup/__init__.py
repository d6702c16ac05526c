"""Infinite-horizon optimal control through eating-up truncations.

Solve finite-horizon truncations, take their horizon limit, and audit Euler
equations, transversality conditions and overtaking comparisons.
"""

__version__ = "0.1.0"

from .core import (
    Path,
    Problem,
    ReturnFunction,
    TruncatedView,
    is_attainable,
    read_path_csv,
    truncate,
    truncated_sum,
    write_path_csv,
)
from .criteria import CompareReport, Criterion, Verdict, compare_brock, compare_modified
from .limit import LimitReport, agreeable_gap, limit_path, optimality_gap
from .models import (
    CounterexampleParams,
    GrowthParams,
    counterexample_problem,
    counterexample_solution,
    growth_finite_closed_form,
    growth_limit_closed_form,
    growth_problem,
    model_registry,
)
from .numerics import NewtonOptions, TailEstimate, Trend, central_diff, newton_tridiag, tail_estimate
from .solver import SolveReport, euler_residual, solve_finite
from .tvc import (
    TvcReport,
    TvcVerdict,
    assumption_diagnostics,
    directional_tvc,
    eating_up_series,
    kamihigashi_series,
)

__all__ = [
    "CompareReport",
    "CounterexampleParams",
    "Criterion",
    "GrowthParams",
    "LimitReport",
    "NewtonOptions",
    "Path",
    "Problem",
    "ReturnFunction",
    "SolveReport",
    "TailEstimate",
    "Trend",
    "TruncatedView",
    "TvcReport",
    "TvcVerdict",
    "Verdict",
    "agreeable_gap",
    "assumption_diagnostics",
    "central_diff",
    "compare_brock",
    "compare_modified",
    "counterexample_problem",
    "counterexample_solution",
    "directional_tvc",
    "eating_up_series",
    "euler_residual",
    "growth_finite_closed_form",
    "growth_limit_closed_form",
    "growth_problem",
    "is_attainable",
    "kamihigashi_series",
    "limit_path",
    "model_registry",
    "newton_tridiag",
    "optimality_gap",
    "read_path_csv",
    "solve_finite",
    "tail_estimate",
    "truncate",
    "truncated_sum",
    "write_path_csv",
]
