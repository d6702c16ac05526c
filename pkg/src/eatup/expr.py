"""A tiny expression language for user-defined return functions ``v(x, y, t)``.

Grammar (``^`` binds tighter than unary minus, and is right-associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

``x``, ``y`` and ``t`` are the current state, next state and time; any other
name is a parameter bound at evaluation time. Functions: ``ln``, ``exp``,
``sqrt``. Derivatives are symbolic, so second partials come from applying
:func:`diff` twice.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .errors import ExprDomainError, ExprSyntaxError, ParameterError, UnboundParameterError

STATE_VARS = ("x", "y", "t")
FUNCTIONS = ("ln", "exp", "sqrt")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Ast"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Ast"


Ast = Union[Const, Var, Neg, Bin, Func]

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Ast) -> int:
    if isinstance(node, Bin):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Const) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return _PREC_NEG
    return _PREC_ATOM


def to_string(node: Ast) -> str:
    """Print ``node`` so that :func:`parse` rebuilds the same tree shape."""
    if isinstance(node, Const):
        if not math.isfinite(node.value):
            raise ValueError("non-finite constants cannot be printed")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Func):
        return f"{node.name}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.arg)
        return f"-({inner})" if _prec(node.arg) < _PREC_NEG else f"-{inner}"

    def wrap(child, parens):
        s = to_string(child)
        return f"({s})" if parens else s

    p = _prec(node)
    if node.op == "^":
        left = wrap(node.left, _prec(node.left) <= _PREC_POW)
        right = wrap(node.right, _prec(node.right) < _PREC_NEG)
        return f"{left}^{right}"
    left = wrap(node.left, _prec(node.left) < p)
    right = wrap(node.right, _prec(node.right) <= p)
    return f"{left} {node.op} {right}"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|<=|>=|[-+*/^()<>]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    raw = text.encode()
    while pos < len(text):
        if text[pos:].strip() == "":
            pos = len(text)
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", len(text[:start].encode()))
        kind = m.lastgroup
        tok = m.group(kind)
        start = m.start(kind)
        if kind == "op" and tok == "**":
            tok = "^"
        out.append(_Tok(kind, tok, len(text[:start].encode())))
        pos = m.end()
    out.append(_Tok("eof", "", len(raw)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        if self.cur.text != text or self.cur.kind == "eof":
            found = "end of input" if self.cur.kind == "eof" else repr(self.cur.text)
            raise ExprSyntaxError(f"unexpected {found}", self.cur.offset, repr(text))
        self.take()

    def expr(self) -> Ast:
        node = self.term()
        while self.cur.kind == "op" and self.cur.text in "+-":
            op = self.take().text
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.unary()
        while self.cur.kind == "op" and self.cur.text in ("*", "/"):
            op = self.take().text
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Ast:
        if self.cur.kind == "op" and self.cur.text == "-":
            self.take()
            return Neg(self.unary())
        if self.cur.kind == "op" and self.cur.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Ast:
        base = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Ast:
        tok = self.cur
        if tok.kind == "num":
            self.take()
            return Const(float(tok.text))
        if tok.kind == "name":
            self.take()
            if self.cur.kind == "op" and self.cur.text == "(":
                if tok.text not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {tok.text!r}", tok.offset, " or ".join(FUNCTIONS))
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(tok.text, arg)
            if tok.text in FUNCTIONS:
                raise ExprSyntaxError(f"function {tok.text!r} needs an argument", self.cur.offset, "'('")
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {found}", tok.offset, "number, name, function or '('")

    def finish(self) -> None:
        if self.cur.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.cur.text!r}", self.cur.offset, "operator or end of input")


def parse(text: str) -> Ast:
    p = _Parser(text)
    node = p.expr()
    p.finish()
    return node


# ---------------------------------------------------------------------------
# conditions (feasible_if)
# ---------------------------------------------------------------------------

_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Condition:
    """Conjunction of comparisons such as ``y < x^0.5 and x > 0``."""

    clauses: tuple

    def __call__(self, x, y, t, params: Mapping[str, float] | None = None) -> bool:
        params = params or {}
        for lhs, op, rhs in self.clauses:
            try:
                if not _CMP[op](evaluate(lhs, x, y, t, params), evaluate(rhs, x, y, t, params)):
                    return False
            except ExprDomainError:
                return False
        return True


def parse_condition(text: str) -> Condition:
    p = _Parser(text)
    clauses = []
    while True:
        lhs = p.expr()
        if not (p.cur.kind == "op" and p.cur.text in _CMP):
            raise ExprSyntaxError("missing comparison", p.cur.offset, "one of < <= > >=")
        op = p.take().text
        clauses.append((lhs, op, p.expr()))
        if p.cur.kind == "name" and p.cur.text == "and":
            p.take()
            continue
        p.finish()
        return Condition(tuple(clauses))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

Compiled = Callable[[float, float, float, Mapping[str, float]], float]


def _domain(msg, node):
    return ExprDomainError(msg, to_string(node))


def compile_ast(node: Ast) -> Compiled:
    """Turn an AST into a closure ``f(x, y, t, params) -> float``."""
    if isinstance(node, Const):
        c = float(node.value)
        return lambda x, y, t, p: c
    if isinstance(node, Var):
        if node.name == "x":
            return lambda x, y, t, p: x
        if node.name == "y":
            return lambda x, y, t, p: y
        if node.name == "t":
            return lambda x, y, t, p: t
        name = node.name

        def param(x, y, t, p):
            try:
                return float(p[name])
            except KeyError:
                raise UnboundParameterError(name) from None

        return param
    if isinstance(node, Neg):
        a = compile_ast(node.arg)
        return lambda x, y, t, p: -a(x, y, t, p)
    if isinstance(node, Func):
        a = compile_ast(node.arg)
        if node.name == "ln":

            def ln(x, y, t, p):
                u = a(x, y, t, p)
                if not u > 0:
                    raise _domain("ln of a nonpositive value", node)
                return math.log(u)

            return ln
        if node.name == "sqrt":

            def sqrt(x, y, t, p):
                u = a(x, y, t, p)
                if not u > 0:
                    raise _domain("sqrt of a nonpositive value", node)
                return math.sqrt(u)

            return sqrt

        def exp(x, y, t, p):
            try:
                return math.exp(a(x, y, t, p))
            except OverflowError:
                raise _domain("exp overflow", node) from None

        return exp

    a, b = compile_ast(node.left), compile_ast(node.right)
    op = node.op
    if op == "+":
        return lambda x, y, t, p: a(x, y, t, p) + b(x, y, t, p)
    if op == "-":
        return lambda x, y, t, p: a(x, y, t, p) - b(x, y, t, p)
    if op == "*":
        return lambda x, y, t, p: a(x, y, t, p) * b(x, y, t, p)
    if op == "/":

        def div(x, y, t, p):
            den = b(x, y, t, p)
            if den == 0:
                raise _domain("division by zero", node)
            return a(x, y, t, p) / den

        return div

    def power(x, y, t, p):
        base, e = a(x, y, t, p), b(x, y, t, p)
        if base == 0 and e < 0:
            raise _domain("division by zero", node)
        if base < 0 and e != int(e):
            raise _domain("fractional power of a negative value", node)
        try:
            return math.pow(base, e)
        except (OverflowError, ValueError):
            raise _domain("power out of range", node) from None

    return power


def evaluate(node: Ast, x: float, y: float, t: float = 0, params: Mapping[str, float] | None = None) -> float:
    val = compile_ast(node)(x, y, t, params or {})
    if not math.isfinite(val):
        raise _domain("non-finite result", node)
    return val


# ---------------------------------------------------------------------------
# differentiation and simplification
# ---------------------------------------------------------------------------


def depends_on(node: Ast, var: str) -> bool:
    if isinstance(node, Const):
        return False
    if isinstance(node, Var):
        return node.name == var
    if isinstance(node, (Neg, Func)):
        return depends_on(node.arg, var)
    return depends_on(node.left, var) or depends_on(node.right, var)


def _is(node: Ast, value: float) -> bool:
    return isinstance(node, Const) and node.value == value


def _fold(op: str, a: float, b: float):
    try:
        val = compile_ast(Bin(op, Const(a), Const(b)))(0.0, 0.0, 0.0, {})
    except (ExprDomainError, OverflowError):
        return None
    return val if math.isfinite(val) else None


def simplify(node: Ast) -> Ast:
    """Light algebraic cleanup: ``0*e -> 0``, ``1*e -> e``, ``e+0 -> e`` and friends."""
    if isinstance(node, (Const, Var)):
        return node
    if isinstance(node, Neg):
        arg = simplify(node.arg)
        if isinstance(arg, Const):
            return Const(-arg.value)
        if isinstance(arg, Neg):
            return arg.arg
        return Neg(arg)
    if isinstance(node, Func):
        return Func(node.name, simplify(node.arg))

    a, b, op = simplify(node.left), simplify(node.right), node.op
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(op, a.value, b.value)
        if folded is not None:
            return Const(folded)
    if op == "+":
        if _is(a, 0):
            return b
        if _is(b, 0):
            return a
    elif op == "-":
        if _is(b, 0):
            return a
        if _is(a, 0):
            return simplify(Neg(b))
    elif op == "*":
        if _is(a, 0) or _is(b, 0):
            return Const(0.0)
        if _is(a, 1):
            return b
        if _is(b, 1):
            return a
        if _is(a, -1):
            return simplify(Neg(b))
        if _is(b, -1):
            return simplify(Neg(a))
    elif op == "/":
        if _is(a, 0):
            return Const(0.0)
        if _is(b, 1):
            return a
    elif op == "^":
        if _is(b, 1):
            return a
        if _is(b, 0) or _is(a, 1):
            return Const(1.0)
    return Bin(op, a, b)


def _d(node: Ast, var: str) -> Ast:
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Var):
        return Const(1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        return Neg(_d(node.arg, var))
    if isinstance(node, Func):
        u, du = node.arg, _d(node.arg, var)
        if node.name == "ln":
            return Bin("/", du, u)
        if node.name == "exp":
            return Bin("*", node, du)
        return Bin("/", du, Bin("*", Const(2.0), node))

    u, v, op = node.left, node.right, node.op
    if op in "+-":
        return Bin(op, _d(u, var), _d(v, var))
    if op == "*":
        return Bin("+", Bin("*", _d(u, var), v), Bin("*", u, _d(v, var)))
    if op == "/":
        num = Bin("-", Bin("*", _d(u, var), v), Bin("*", u, _d(v, var)))
        return Bin("/", num, Bin("^", v, Const(2.0)))
    # power
    if not depends_on(v, var):
        return Bin("*", Bin("*", v, Bin("^", u, Bin("-", v, Const(1.0)))), _d(u, var))
    if not depends_on(u, var):
        return Bin("*", Bin("*", node, Func("ln", u)), _d(v, var))
    inner = Bin("+", Bin("*", _d(v, var), Func("ln", u)), Bin("/", Bin("*", v, _d(u, var)), u))
    return Bin("*", node, inner)


def diff(node: Ast, var: str, simplified: bool = True) -> Ast:
    """Exact symbolic derivative of ``node`` with respect to ``x`` or ``y``."""
    if var not in ("x", "y"):
        raise ValueError("differentiate with respect to 'x' or 'y' only")
    out = _d(node, var)
    return simplify(out) if simplified else out


def free_parameters(node: Ast) -> set[str]:
    if isinstance(node, Const):
        return set()
    if isinstance(node, Var):
        return set() if node.name in STATE_VARS else {node.name}
    if isinstance(node, (Neg, Func)):
        return free_parameters(node.arg)
    return free_parameters(node.left) | free_parameters(node.right)


# ---------------------------------------------------------------------------
# problems from expressions
# ---------------------------------------------------------------------------


def expression_return_function(text: str, params: Mapping[str, float] | None = None, feasible_if: str | None = None):
    """Wire an expression string into a :class:`~eatup.core.ReturnFunction`.

    Without ``feasible_if`` a point is feasible exactly when ``v`` evaluates
    to a finite number.
    """
    from .core import ReturnFunction

    params = dict(params or {})
    ast = parse(text)
    missing = free_parameters(ast) - set(params)
    if missing:
        raise ParameterError(f"unbound expression parameter(s): {', '.join(sorted(missing))}")

    def bind(node):
        f = compile_ast(node)
        return lambda x, y, t: f(x, y, t, params)

    d1, d2 = diff(ast, "x"), diff(ast, "y")
    value_fn = bind(ast)

    def value(x, y, t):
        val = value_fn(x, y, t)
        if not math.isfinite(val):
            raise _domain("non-finite result", ast)
        return val

    if feasible_if:
        cond = parse_condition(feasible_if)

        def feasible(x, y, t):
            return cond(x, y, t, params)

    else:

        def feasible(x, y, t):
            try:
                return math.isfinite(value_fn(x, y, t))
            except ExprDomainError:
                return False

    return ReturnFunction(
        value,
        bind(d1),
        bind(d2),
        bind(diff(d1, "x")),
        bind(diff(d1, "y")),
        bind(diff(d2, "x")),
        bind(diff(d2, "y")),
        feasible,
        vectorized=False,
    )


def expression_problem(text, params=None, *, x0, bounds=(-math.inf, math.inf), feasible_if=None, name=None):
    from .core import Problem

    rf = expression_return_function(text, params, feasible_if)
    return Problem(rf, float(x0), float(bounds[0]), float(bounds[1]), name=name or f"custom({text})")
