"""Pairwise overtaking comparisons.

``D(T)`` is path B's partial return sum minus path A's. Under the modified
criterion both sums use the eating-up truncation at ``T``; under Brock's
criterion they use the raw successors ``x(T+1)``. B overtakes A when
``liminf D > 0``, estimated on the tail of the computed series.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import Path, Problem, is_attainable, truncated_terms, untruncated_terms
from .errors import AttainabilityError, InfeasibleError
from .numerics import TailEstimate, Trend, default_window, tail_estimate

DEFAULT_THRESHOLD = 1e-9


class Criterion(str, enum.Enum):
    MODIFIED = "MODIFIED"
    BROCK = "BROCK"


class Verdict(str, enum.Enum):
    B_OVERTAKES_A = "B_OVERTAKES_A"
    A_OVERTAKES_B = "A_OVERTAKES_B"
    NEITHER = "NEITHER"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class CompareReport:
    horizons: np.ndarray
    d_series: np.ndarray
    tail: TailEstimate
    verdict: Verdict
    criterion: Criterion
    threshold: float = DEFAULT_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion.value,
            "verdict": self.verdict.value,
            "threshold": self.threshold,
            "tail": self.tail.to_dict(),
            "d_series": [{"T": int(T), "D": float(d)} for T, d in zip(self.horizons, self.d_series)],
        }


def overtaking_verdict(tail: TailEstimate, threshold: float = DEFAULT_THRESHOLD) -> Verdict:
    if tail.tail_inf > threshold:
        return Verdict.B_OVERTAKES_A
    if -tail.tail_sup > threshold:
        return Verdict.A_OVERTAKES_B
    if abs(tail.tail_inf) <= threshold and tail.trend in (Trend.CONSTANT, Trend.DECREASING_TO_ZERO):
        return Verdict.NEITHER
    return Verdict.INDETERMINATE


class PathTermError(InfeasibleError):
    def __init__(self, label: str, cause: InfeasibleError):
        InfeasibleError.__init__(self, cause.t, cause.x, cause.y)
        self.args = (f"{label}: {cause}",)
        self.label = label


def _check(problem: Problem, path: Path, label: str) -> None:
    ok, idx = is_attainable(problem, path)
    if not ok:
        raise AttainabilityError(idx, label)


def _compare(problem, path_a, path_b, horizons, threshold, window, criterion, terms_fn, need, require_attainable):
    if require_attainable:
        _check(problem, path_a, "path A")
        _check(problem, path_b, "path B")
    horizons = list(horizons) if horizons is not None else None
    if horizons is None:
        horizons = list(range(0, min(path_a.N, path_b.N) - need + 1))
    if not horizons:
        raise ValueError("paths are too short for any comparison horizon")
    d = []
    for T in horizons:
        # both sums span the same horizon; difference them termwise for accuracy
        try:
            ta = terms_fn(problem, path_a, T)
        except InfeasibleError as exc:
            raise PathTermError("path A", exc) from exc
        try:
            tb = terms_fn(problem, path_b, T)
        except InfeasibleError as exc:
            raise PathTermError("path B", exc) from exc
        d.append(math.fsum(tb - ta))
    d = np.array(d)
    tail = tail_estimate(d, window or default_window(d.size))
    return CompareReport(np.array(horizons), d, tail, overtaking_verdict(tail, threshold), criterion, threshold)


def compare_modified(
    problem: Problem,
    path_a: Path,
    path_b: Path,
    horizons: Iterable[int] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    window: int | None = None,
    require_attainable: bool = True,
) -> CompareReport:
    """Compare under the eating-up (modified) overtaking criterion.

    ``horizons`` defaults to every ``T`` both paths cover. Both paths must
    be attainable unless ``require_attainable`` is false.
    """
    return _compare(problem, path_a, path_b, horizons, threshold, window, Criterion.MODIFIED, truncated_terms, 0, require_attainable)


def compare_brock(
    problem: Problem,
    path_a: Path,
    path_b: Path,
    horizons: Iterable[int] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    window: int | None = None,
    require_attainable: bool = True,
) -> CompareReport:
    """Compare under Brock's criterion; each horizon needs ``x(T+1)`` on both paths."""
    return _compare(problem, path_a, path_b, horizons, threshold, window, Criterion.BROCK, untruncated_terms, 1, require_attainable)


def compare(problem, path_a, path_b, criterion="modified", **kwargs) -> CompareReport:
    crit = Criterion(criterion.upper()) if isinstance(criterion, str) else criterion
    fn = compare_modified if crit is Criterion.MODIFIED else compare_brock
    return fn(problem, path_a, path_b, **kwargs)
