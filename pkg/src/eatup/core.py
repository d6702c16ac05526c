"""Problems, paths, the eating-up truncation and objective sums.

A problem is ``max sum_t v(x(t), x(t+1), t)`` over scalar state paths with
``x(0) = x0`` and ``lower < x(t) < upper``. Paths are finite samples
``x(0), ..., x(N)``; the eating-up truncation at horizon ``T`` keeps
``x(0..T)`` and sets the state to zero from ``T + 1`` on.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    BoundaryInfeasibleError,
    HorizonExceedsPathError,
    InfeasibleError,
    ParameterError,
    PathFormatError,
)
from .numerics import central_diff

_PARTIALS = ("d1", "d2", "d11", "d12", "d21", "d22")


def _vectorize(fn, otype=float):
    """Let a scalar function ``fn(x, y, t)`` accept numpy arrays."""
    vec = np.vectorize(fn, otypes=[otype])

    def wrapped(x, y, t):
        if np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(t) == 0:
            return fn(float(x), float(y), int(t))
        return vec(x, y, t)

    return wrapped


def _fd_partial(fn, arg):
    def scalar(x, y, t):
        if arg == 0:
            return central_diff(lambda s: float(fn(s, y, t)), x)
        return central_diff(lambda s: float(fn(x, s, t)), y)

    return _vectorize(scalar)


@dataclass(frozen=True)
class ReturnFunction:
    """Per-period return ``v(x, y, t)`` with its partial derivatives.

    ``d1``/``d2`` are the partials in the current and next state, ``d12`` is
    ``d/dy (dv/dx)`` and ``d21`` is ``d/dx (dv/dy)``. Missing partials fall
    back to central differences. With ``vectorized=False`` the callables are
    treated as scalar-only and wrapped so they also accept arrays.

    ``feasible(x, y, t)`` is the domain predicate; outside it ``v`` would be
    minus infinity and the package raises :class:`InfeasibleError` instead.
    """

    value: Callable
    d1: Callable | None = None
    d2: Callable | None = None
    d11: Callable | None = None
    d12: Callable | None = None
    d21: Callable | None = None
    d22: Callable | None = None
    feasible: Callable | None = None
    vectorized: bool = True
    analytic: tuple = field(default=(), compare=False)

    def __post_init__(self):
        wrap = (lambda f: f) if self.vectorized else _vectorize
        given = tuple(n for n in _PARTIALS if getattr(self, n) is not None)
        object.__setattr__(self, "analytic", given)
        object.__setattr__(self, "value", wrap(self.value))
        for name in _PARTIALS:
            fn = getattr(self, name)
            if fn is not None:
                object.__setattr__(self, name, wrap(fn))
        if self.feasible is None:
            object.__setattr__(self, "feasible", lambda x, y, t: np.isfinite(self.value(x, y, t)))
        elif not self.vectorized:
            object.__setattr__(self, "feasible", _vectorize(self.feasible, bool))
        # finite-difference fallbacks, first order before second order
        if self.d1 is None:
            object.__setattr__(self, "d1", _fd_partial(self.value, 0))
        if self.d2 is None:
            object.__setattr__(self, "d2", _fd_partial(self.value, 1))
        if self.d11 is None:
            object.__setattr__(self, "d11", _fd_partial(self.d1, 0))
        if self.d12 is None:
            object.__setattr__(self, "d12", _fd_partial(self.d1, 1))
        if self.d21 is None:
            object.__setattr__(self, "d21", _fd_partial(self.d2, 0))
        if self.d22 is None:
            object.__setattr__(self, "d22", _fd_partial(self.d2, 1))

    def require_feasible(self, x, y, t0: int = 0) -> None:
        """Raise for the first infeasible pair among ``(x[i], y[i], t0 + i)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        t = np.arange(t0, t0 + max(x.size, y.size))
        try:
            ok = np.atleast_1d(np.asarray(self.feasible(x, y, t), dtype=bool))
        except (ArithmeticError, ValueError):
            ok = np.array([_safe_feasible(self, xi, yi, ti) for xi, yi, ti in np.broadcast(x, y, t)])
        if not ok.all():
            i = int(np.argmin(ok))
            xb, yb = np.broadcast_to(x, t.shape), np.broadcast_to(y, t.shape)
            raise InfeasibleError(int(t[i]), float(xb[i]), float(yb[i]))


def _safe_feasible(rf, x, y, t) -> bool:
    try:
        return bool(rf.feasible(x, y, t))
    except (ArithmeticError, ValueError):
        return False


@dataclass(frozen=True)
class Problem:
    """Scalar infinite-horizon problem: return function, start and state bounds."""

    v: ReturnFunction
    x0: float
    lower: float = -math.inf
    upper: float = math.inf
    name: str = "problem"

    def __post_init__(self):
        if not self.lower < self.x0 < self.upper:
            raise ParameterError(
                f"x0={self.x0!r} must lie strictly inside ({self.lower!r}, {self.upper!r})"
            )

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.lower, self.upper)


class Path:
    """Immutable finite sample ``x(0), ..., x(N)`` of a state path."""

    __slots__ = ("_values",)

    def __init__(self, values: Sequence[float]):
        arr = np.array(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("a path needs at least x(0)")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def N(self) -> int:
        return self._values.size - 1

    def __len__(self) -> int:
        return self._values.size

    def __getitem__(self, t):
        return self._values[t]

    def __eq__(self, other):
        return isinstance(other, Path) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def __repr__(self):
        return f"Path(N={self.N}, values={self._values.tolist()!r})"

    def append(self, values: Sequence[float]) -> "Path":
        return Path(np.concatenate([self._values, np.asarray(values, dtype=float)]))

    def to_records(self) -> list[dict]:
        return [{"t": t, "x": float(v)} for t, v in enumerate(self._values)]


@dataclass(frozen=True)
class TruncatedView:
    """The eating-up image of ``base`` at horizon ``T``: zero after ``T``."""

    base: Path
    T: int

    def value_at(self, t: int) -> float:
        if t < 0:
            raise IndexError("negative time index")
        return float(self.base[t]) if t <= self.T else 0.0

    def materialize(self, length: int) -> Path:
        """Return ``value_at(0..length)`` as an ordinary path."""
        out = np.zeros(length + 1)
        m = min(self.T, length)
        out[: m + 1] = self.base.values[: m + 1]
        return Path(out)


def truncate(path: Path, T: int) -> TruncatedView:
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T > path.N:
        raise HorizonExceedsPathError(T, path.N)
    return TruncatedView(path, int(T))


def truncated_sum(problem: Problem, path: Path, T: int) -> float:
    """``sum_{t=0}^{T} v(x~(t), x~(t+1), t)`` for the eating-up truncation at ``T``."""
    terms = truncated_terms(problem, path, T)
    return float(math.fsum(terms))


def truncated_terms(problem: Problem, path: Path, T: int) -> np.ndarray:
    if T > path.N:
        raise HorizonExceedsPathError(T, path.N)
    xs = np.append(path.values[: T + 1], 0.0)
    v = problem.v
    try:
        v.require_feasible(xs[:-1], xs[1:])
    except InfeasibleError as exc:
        if exc.t == T:
            raise BoundaryInfeasibleError(T, float(xs[T])) from None
        raise
    return np.asarray(v.value(xs[:-1], xs[1:], np.arange(T + 1)), dtype=float)


def untruncated_terms(problem: Problem, path: Path, T: int) -> np.ndarray:
    """Terms ``v(x(t), x(t+1), t)`` for ``t = 0..T`` on the raw path."""
    if T + 1 > path.N:
        raise HorizonExceedsPathError(T + 1, path.N)
    xs = path.values[: T + 2]
    problem.v.require_feasible(xs[:-1], xs[1:])
    return np.asarray(problem.v.value(xs[:-1], xs[1:], np.arange(T + 1)), dtype=float)


class Attainability(NamedTuple):
    ok: bool
    index: int | None


def is_attainable(problem: Problem, path: Path, atol: float = 1e-12) -> Attainability:
    """Check ``x(0) = x0`` and ``lower < x(t) < upper`` for all sampled ``t``."""
    vals = path.values
    if abs(vals[0] - problem.x0) > atol * max(1.0, abs(problem.x0)):
        return Attainability(False, 0)
    inside = (vals > problem.lower) & (vals < problem.upper)
    if not inside.all():
        return Attainability(False, int(np.argmin(inside)))
    return Attainability(True, None)


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def format_real(x: float) -> str:
    return repr(float(x))


def read_path_csv(source) -> Path:
    """Read a ``t,x`` CSV; ``t`` must run 0, 1, 2, ... without gaps or repeats."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise PathFormatError("empty path file") from None
    if [h.strip() for h in header] != ["t", "x"]:
        raise PathFormatError(f"expected header 't,x', got {','.join(header)!r}")
    values = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise PathFormatError(f"line {lineno}: expected 2 fields, got {len(row)}")
        try:
            t = int(row[0])
            x = float(row[1])
        except ValueError:
            raise PathFormatError(f"line {lineno}: cannot parse {row!r}") from None
        if t < len(values):
            raise PathFormatError(f"line {lineno}: duplicate or decreasing t={t}")
        if t > len(values):
            raise PathFormatError(f"line {lineno}: gap before t={t}")
        if not math.isfinite(x):
            raise PathFormatError(f"line {lineno}: non-finite state value")
        values.append(x)
    if not values:
        raise PathFormatError("path file has no rows")
    return Path(values)


def path_to_csv(path: Path) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x"])
    for t, x in enumerate(path.values):
        w.writerow([t, format_real(x)])
    return buf.getvalue()


def atomic_write_text(dest, text: str) -> None:
    """Write via a temp file in the destination directory, then rename."""
    dest = os.fspath(dest)
    directory = os.path.dirname(os.path.abspath(dest))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(dest))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_path_csv(path: Path, dest) -> None:
    atomic_write_text(dest, path_to_csv(path))
