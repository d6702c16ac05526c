import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eatup.errors import ExprDomainError, ExprSyntaxError, ParameterError, StencilError, UnboundParameterError
from eatup.expr import (
    Bin,
    Const,
    Func,
    Neg,
    Var,
    compile_ast,
    depends_on,
    diff,
    evaluate,
    expression_problem,
    expression_return_function,
    free_parameters,
    parse,
    parse_condition,
    simplify,
    to_string,
)
from eatup.models import GrowthParams, growth_problem
from eatup.numerics import central_diff
from eatup.solver import solve_finite

GROWTH = "0.9^t * ln(x^0.5 - y)"
COUNTER = "-(x - a)^2 - b*(y - x)"
AB = {"a": 2.0, "b": 3.0}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def test_parse_growth():
    ast = parse(GROWTH)
    assert ast == Bin(
        "*",
        Bin("^", Const(0.9), Var("t")),
        Func("ln", Bin("-", Bin("^", Var("x"), Const(0.5)), Var("y"))),
    )


def test_parse_counterexample():
    ast = parse(COUNTER)
    assert ast == Bin(
        "-",
        Neg(Bin("^", Bin("-", Var("x"), Var("a")), Const(2.0))),
        Bin("*", Var("b"), Bin("-", Var("y"), Var("x"))),
    )
    assert free_parameters(ast) == {"a", "b"}


def test_trailing_operator_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x + ")
    assert info.value.offset == 4
    assert info.value.expected


@pytest.mark.parametrize(
    "text,offset",
    [("", 0), ("(x", 2), ("x $ y", 2), ("foo(x)", 0), ("ln x", 3), ("x y", 2), ("x + é", 4)],
)
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_precedence():
    assert evaluate(parse("-2^2"), 0, 0) == -4.0
    assert evaluate(parse("2^3^2"), 0, 0) == 512.0
    assert evaluate(parse("2^-1"), 0, 0) == 0.5
    assert evaluate(parse("1 - 2 - 3"), 0, 0) == -4.0
    assert evaluate(parse("8 / 4 / 2"), 0, 0) == 1.0
    assert evaluate(parse("2 * 3 + 4 * 5"), 0, 0) == 26.0
    assert parse("x ** 2") == parse("x^2")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_eval_growth():
    val = evaluate(parse(GROWTH), 0.25, 0.1551724, 0)
    assert val == pytest.approx(math.log(0.3448276), rel=1e-15)
    assert val == pytest.approx(-1.064711, abs=1e-6)


def test_eval_counterexample():
    assert evaluate(parse(COUNTER), 2.0, 2.0, 0, AB) == 0.0


def test_eval_domain_errors():
    with pytest.raises(ExprDomainError) as info:
        evaluate(parse(GROWTH), 0.25, 0.5, 0)
    assert "ln" in info.value.subexpr
    for text, x in [("sqrt(x)", 0.0), ("1 / x", 0.0), ("x^0.5", -1.0), ("x^-1", 0.0), ("exp(1000 + x)", 0.0)]:
        with pytest.raises(ExprDomainError):
            evaluate(parse(text), x, 0.0)


def test_unbound_parameter():
    with pytest.raises(UnboundParameterError):
        evaluate(parse(COUNTER), 1, 1, 0, {"a": 1})
    with pytest.raises(ParameterError):
        expression_return_function(COUNTER, {"a": 1})


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------


def test_diff_square():
    d = diff(parse("x^2"), "x")
    assert evaluate(d, 3.0, 0.0) == 6.0


def test_diff_counterexample_wrt_y_is_constant():
    d = diff(parse(COUNTER), "y")
    assert d == Neg(Var("b"))
    assert evaluate(d, 1.234, -5.0, 7, AB) == -3.0


def test_diff_rejects_t():
    with pytest.raises(ValueError):
        diff(parse("x*t"), "t")


def test_mixed_partials_symmetric(rng):
    ast = parse(GROWTH)
    dxy = compile_ast(diff(diff(ast, "x"), "y"))
    dyx = compile_ast(diff(diff(ast, "y"), "x"))
    x = rng.uniform(0.01, 0.99, 1000)
    y = rng.uniform(0.0, 0.99, 1000) * np.sqrt(x)
    for xi, yi, ti in zip(x, y, rng.integers(0, 50, 1000)):
        a, b = dxy(xi, yi, ti, {}), dyx(xi, yi, ti, {})
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def check_diff_against_fd(ast, points, params=None):
    """Compare symbolic partials with central differences; return points checked."""
    params = params or {}
    f = compile_ast(ast)
    fx, fy = compile_ast(diff(ast, "x")), compile_ast(diff(ast, "y"))
    checked = 0
    for x, y, t in points:
        try:
            sym = (fx(x, y, t, params), fy(x, y, t, params))
            num = (
                central_diff(lambda s: f(s, y, t, params), x),
                central_diff(lambda s: f(x, s, t, params), y),
            )
        except (ExprDomainError, StencilError):
            continue
        for a, b in zip(sym, num):
            assert abs(a - b) <= 1e-6 * max(1.0, abs(a)), (to_string(ast), x, y, t, a, b)
        checked += 1
    return checked


def test_builtin_expressions_diff_vs_fd(rng):
    x = rng.uniform(0.05, 0.95, 1000)
    pts = zip(x, rng.uniform(0.0, 0.9, 1000) * np.sqrt(x), rng.integers(0, 30, 1000))
    assert check_diff_against_fd(parse(GROWTH), pts) == 1000
    pts = zip(*rng.uniform(-5, 5, (2, 1000)), rng.integers(0, 30, 1000))
    assert check_diff_against_fd(parse(COUNTER), pts, AB) == 1000


# ---------------------------------------------------------------------------
# fuzzed expressions
# ---------------------------------------------------------------------------


def random_ast(r: random.Random, depth: int):
    """Random expression whose ln/sqrt/division arguments stay away from zero."""
    if depth == 0 or r.random() < 0.25:
        pick = r.random()
        if pick < 0.35:
            return Var("x")
        if pick < 0.7:
            return Var("y")
        if pick < 0.8:
            return Var("t")
        if pick < 0.9:
            return Var("c")
        return Const(round(r.uniform(-2, 2), 3))
    sub = lambda: random_ast(r, depth - 1)  # noqa: E731
    positive = lambda e: Bin("+", Const(round(r.uniform(0.5, 2), 3)), Bin("^", e, Const(2.0)))  # noqa: E731
    kind = r.randrange(9)
    if kind == 0:
        return Bin("+", sub(), sub())
    if kind == 1:
        return Bin("-", sub(), sub())
    if kind == 2:
        return Bin("*", sub(), sub())
    if kind == 3:
        return Bin("/", sub(), positive(sub()))
    if kind == 4:
        return Bin("^", sub(), Const(float(r.randint(0, 3))))
    if kind == 5:
        return Bin("^", positive(sub()), Const(round(r.uniform(-1.5, 1.5), 2)))
    if kind == 6:
        return Func("ln", positive(sub()))
    if kind == 7:
        return Func("sqrt", positive(sub()))
    return Neg(Func("exp", Bin("/", sub(), positive(sub()))))


def _fuzz_corpus(n: int) -> list:
    out, seed = [], 0
    while len(out) < n:
        ast = random_ast(random.Random(seed), 4)
        seed += 1
        if depends_on(ast, "x") and depends_on(ast, "y") and not isinstance(ast, Var):
            out.append(ast)
    return out


FUZZ = _fuzz_corpus(100)


@pytest.mark.parametrize("i", range(len(FUZZ)))
def test_fuzzed_diff_vs_fd(i):
    ast = FUZZ[i]
    rng = np.random.default_rng(i)
    pts = zip(*rng.uniform(-1.5, 1.5, (2, 1000)), rng.integers(0, 5, 1000))
    assert check_diff_against_fd(ast, pts, {"c": 0.7}) >= 900


@pytest.mark.parametrize("i", range(len(FUZZ)))
def test_fuzzed_print_parse_roundtrip(i):
    ast = FUZZ[i]
    back = parse(to_string(ast))
    f, g = compile_ast(ast), compile_ast(back)
    rng = np.random.default_rng(1000 + i)
    for x, y in rng.uniform(-1.5, 1.5, (200, 2)):
        try:
            a = f(x, y, 2, {"c": 0.7})
        except ExprDomainError:
            continue
        assert g(x, y, 2, {"c": 0.7}) == a
    for d in (diff(ast, "x"), diff(ast, "y", simplified=False)):
        assert to_string(parse(to_string(d))) == to_string(d)


@pytest.mark.parametrize("i", range(len(FUZZ)))
def test_simplification_preserves_values(i):
    ast = FUZZ[i]
    rng = np.random.default_rng(2000 + i)
    for var in ("x", "y"):
        raw = compile_ast(diff(ast, var, simplified=False))
        simp = compile_ast(diff(ast, var))
        for x, y in rng.uniform(-1.5, 1.5, (200, 2)):
            try:
                a = raw(x, y, 1, {"c": 0.7})
            except ExprDomainError:
                continue
            assert simp(x, y, 1, {"c": 0.7}) == a


_leaf = st.sampled_from([Var("x"), Var("y"), Var("t"), Const(0.0), Const(1.0), Const(-1.0), Const(2.5), Const(-0.125)])
_trees = st.recursive(
    _leaf,
    lambda kids: st.one_of(
        st.builds(Bin, st.sampled_from("+-*/^"), kids, kids),
        st.builds(Neg, kids),
        st.builds(Func, st.sampled_from(["ln", "exp", "sqrt"]), kids),
    ),
    max_leaves=12,
)


@settings(max_examples=300, deadline=None)
@given(ast=_trees, x=st.floats(-3, 3), y=st.floats(-3, 3))
def test_roundtrip_and_simplify_any_tree(ast, x, y):
    back = parse(to_string(ast))
    f, g, s = compile_ast(ast), compile_ast(back), compile_ast(simplify(ast))
    try:
        a = f(x, y, 1.0, {})
    except ExprDomainError:
        return
    assert g(x, y, 1.0, {}) == a or (math.isnan(a) and math.isnan(g(x, y, 1.0, {})))
    if math.isfinite(a):
        assert s(x, y, 1.0, {}) == a


# ---------------------------------------------------------------------------
# conditions and problems
# ---------------------------------------------------------------------------


def test_condition():
    cond = parse_condition("y < x^0.5 and x > 0")
    assert cond(0.25, 0.1, 0)
    assert not cond(0.25, 0.6, 0)
    assert not cond(-1.0, -5.0, 0)
    with pytest.raises(ExprSyntaxError):
        parse_condition("x + 1")


def test_expression_growth_matches_builtin():
    pr = expression_problem(GROWTH, x0=0.25, bounds=(0.0, 1.0))
    ref = growth_problem(GrowthParams(0.5, 0.9, 0.25))
    a = solve_finite(pr, 12).path.values
    b = solve_finite(ref, 12).path.values
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_expression_feasibility():
    rf = expression_return_function(GROWTH)
    assert rf.feasible(0.25, 0.1, 0)
    assert not rf.feasible(0.25, 0.5, 0)
    rf = expression_return_function("x - y", feasible_if="y < x")
    assert not rf.feasible(1.0, 2.0, 0)
