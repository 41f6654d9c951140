"""Scalar-field expressions over chart coordinates.

Grammar (whitespace-insensitive)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' exponent)?
    exponent := '-' exponent | primary ('^' exponent)?      # must fold to an integer
    primary  := number | identifier | func '(' expr ')' | '(' expr ')'

Functions: ``sin cos exp ln sqrt``.  The named constant ``pi`` is accepted.
Real charts use the variables ``x y z t``; complex charts use
``x1 y1 x2 y2`` and additionally accept ``z1 = x1 + i y1`` and
``z2 = x2 + i y2``, which :func:`lower` rewrites into real coordinates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    ArityError,
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from .jets import Jet

REAL_CHART = ("x", "y", "z", "t")
COMPLEX_CHART = ("x1", "y1", "x2", "y2")
COMPLEX_ALIASES = {"z1": ("x1", "y1"), "z2": ("x2", "y2")}
FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")
NAMED_CONSTANTS = {"pi": math.pi}


# ---------------------------------------------------------------------------
# AST

class Expr:
    """Base class of expression nodes; nodes are immutable and hashable."""

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Union[float, complex]

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


Expression = Expr
ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    toks.append(_Tok("eof", "", _byte_offset(text, n)))
    return toks


def _byte_offset(text: str, idx: int) -> int:
    return len(text[:idx].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = set(variables)
        if set(variables) >= set(COMPLEX_CHART):
            self.variables |= set(COMPLEX_ALIASES)
        self.open_parens: list[int] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        if tok.kind == "eof" and self.open_parens:
            raise ExpressionSyntaxError("unbalanced '('", self.open_parens[-1])
        raise ExpressionSyntaxError(message, tok.offset)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            start = self.tok
            n = _fold_integer(self.exponent())
            if n is None:
                raise ExpressionSyntaxError("exponent must be an integer constant", start.offset)
            return Pow(base, n)
        return base

    def exponent(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.exponent())
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            start = self.tok
            n = _fold_integer(self.exponent())
            if n is None:
                raise ExpressionSyntaxError("exponent must be an integer constant", start.offset)
            return Pow(base, n)
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "id":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifierError(tok.text, tok.offset)
                args = self.call_args()
                if len(args) != 1:
                    raise ArityError(tok.text, len(args), tok.offset)
                return Call(tok.text, args[0])
            if tok.text in FUNCTIONS:
                raise ArityError(tok.text, 0, tok.offset)
            if tok.text in NAMED_CONSTANTS:
                return Var(tok.text)
            if tok.text not in self.variables:
                raise UnknownIdentifierError(tok.text, tok.offset)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            self.open_parens.append(tok.offset)
            e = self.expr()
            if not (self.tok.kind == "op" and self.tok.text == ")"):
                self.fail("expected ')'")
            self.advance()
            self.open_parens.pop()
            return e
        if tok.kind == "eof":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {tok.text!r}")

    def call_args(self) -> list[Expr]:
        open_tok = self.advance()
        self.open_parens.append(open_tok.offset)
        args: list[Expr] = []
        if self.tok.kind == "op" and self.tok.text == ")":
            self.advance()
            self.open_parens.pop()
            return args
        while True:
            args.append(self.expr())
            if self.tok.kind == "op" and self.tok.text == ",":
                self.advance()
                continue
            if self.tok.kind == "op" and self.tok.text == ")":
                self.advance()
                self.open_parens.pop()
                return args
            self.fail("expected ',' or ')'")


def _fold_integer(e: Expr):
    try:
        v = _fold_const(e)
    except (TypeError, ZeroDivisionError, OverflowError):
        return None
    if v is None or not float(v).is_integer():
        return None
    return int(v)


def _fold_const(e: Expr):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        v = _fold_const(e.arg)
        return None if v is None else -v
    if isinstance(e, Pow):
        v = _fold_const(e.base)
        return None if v is None else v**e.exponent
    return None


def parse(text: str, variables: Sequence[str] = REAL_CHART) -> Expr:
    """Parse ``text`` into an expression tree over the given chart variables."""
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Const) and (isinstance(e.value, complex) or e.value < 0):
        return 0
    return _PREC.get(type(e), 5)


def _fmt_number(v) -> str:
    if isinstance(v, complex):
        return repr(v)
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def to_text(e: Expr) -> str:
    """Canonical text form; ``parse(to_text(e)) == e`` for every parsed tree."""
    if isinstance(e, Const):
        s = _fmt_number(e.value)
        return f"({s})" if _prec(e) == 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    if isinstance(e, Pow):
        b = to_text(e.base)
        if _prec(e.base) < 5:
            b = f"({b})"
        return f"{b}^{e.exponent}"
    p = _PREC[type(e)]
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    left = to_text(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_text(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left}{op}{right}"


# ---------------------------------------------------------------------------
# construction helpers with constant folding

def _c(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return Var(x)
    return Const(x if isinstance(x, complex) else float(x))


def _is(e: Expr, v) -> bool:
    return isinstance(e, Const) and e.value == v


def add(a, b) -> Expr:
    a, b = _c(a), _c(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(b, Neg):
        return Sub(a, b.arg)
    return Add(a, b)


def sub(a, b) -> Expr:
    a, b = _c(a), _c(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return Sub(a, b)


def neg(a) -> Expr:
    a = _c(a)
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a, b) -> Expr:
    a, b = _c(a), _c(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a, b) -> Expr:
    a, b = _c(a), _c(b)
    if _is(b, 1):
        return a
    if _is(a, 0) and not _is(b, 0):
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def power(a, n: int) -> Expr:
    a = _c(a)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and not (a.value == 0 and n < 0):
        return Const(a.value**n)
    return Pow(a, n)


def call(func: str, a) -> Expr:
    return Call(func, _c(a))


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    return type(e)(substitute(e.left, mapping), substitute(e.right, mapping))


def lower(e: Expr) -> Expr:
    """Rewrite complex coordinates z1, z2 and named constants into real terms."""
    mapping = {"pi": Const(math.pi)}
    for name, (re_, im_) in COMPLEX_ALIASES.items():
        mapping[name] = Add(Var(re_), Mul(Const(1j), Var(im_)))
    return substitute(e, mapping)


def free_variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return set() if e.name in NAMED_CONSTANTS else {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Neg,)):
        return free_variables(e.arg)
    if isinstance(e, Pow):
        return free_variables(e.base)
    if isinstance(e, Call):
        return free_variables(e.arg)
    return free_variables(e.left) | free_variables(e.right)


# ---------------------------------------------------------------------------
# symbolic differentiation

def diff(e: Expr, var: str) -> Expr:
    """Partial derivative of ``e`` with respect to ``var`` (constants folded)."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        if e.name in COMPLEX_ALIASES:
            re_, im_ = COMPLEX_ALIASES[e.name]
            return ONE if var == re_ else Const(1j) if var == im_ else ZERO
        return ONE if e.name == var else ZERO
    if isinstance(e, Neg):
        return neg(diff(e.arg, var))
    if isinstance(e, Add):
        return add(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Sub):
        return sub(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, var), e.right), mul(e.left, diff(e.right, var)))
    if isinstance(e, Div):
        du, dv = diff(e.left, var), diff(e.right, var)
        if _is(dv, 0):
            return div(du, e.right)
        return div(sub(mul(du, e.right), mul(e.left, dv)), power(e.right, 2))
    if isinstance(e, Pow):
        du = diff(e.base, var)
        if _is(du, 0):
            return ZERO
        return mul(mul(Const(float(e.exponent)), power(e.base, e.exponent - 1)), du)
    if isinstance(e, Call):
        du = diff(e.arg, var)
        if _is(du, 0):
            return ZERO
        u = e.arg
        if e.func == "sin":
            outer = call("cos", u)
        elif e.func == "cos":
            outer = neg(call("sin", u))
        elif e.func == "exp":
            outer = e
        elif e.func == "ln":
            return div(du, u)
        elif e.func == "sqrt":
            return div(du, mul(Const(2.0), e))
        else:  # pragma: no cover - parser rejects other names
            raise ValueError(e.func)
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def eval_jets(e: Expr, env: Mapping[str, Jet]) -> Jet:
    """Evaluate ``e`` with variables bound to jets (all of one batch shape)."""
    return _Evaluator(env).run(e)


class _Evaluator:
    def __init__(self, env: Mapping[str, Jet]):
        self.env = dict(env)
        some = next(iter(self.env.values()))
        self.shape = some.val.shape
        self.cache: dict[Expr, Jet] = {}

    def const(self, v) -> Jet:
        return Jet.constant(np.full(self.shape, v, dtype=complex if isinstance(v, complex) else float))

    def run(self, e: Expr) -> Jet:
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        out = self._eval(e)
        self.cache[e] = out
        return out

    def _eval(self, e: Expr) -> Jet:
        if isinstance(e, Const):
            return self.const(e.value)
        if isinstance(e, Var):
            if e.name in self.env:
                return self.env[e.name]
            if e.name in NAMED_CONSTANTS:
                return self.const(NAMED_CONSTANTS[e.name])
            if e.name in COMPLEX_ALIASES:
                re_, im_ = COMPLEX_ALIASES[e.name]
                return self.env[re_] + 1j * self.env[im_]
            raise UnknownIdentifierError(e.name, -1)
        if isinstance(e, Neg):
            return -self.run(e.arg)
        if isinstance(e, Add):
            return self.run(e.left) + self.run(e.right)
        if isinstance(e, Sub):
            return self.run(e.left) - self.run(e.right)
        if isinstance(e, Mul):
            return self.run(e.left) * self.run(e.right)
        if isinstance(e, Div):
            den = self.run(e.right)
            if np.any(den.val == 0):
                raise DomainError("division by zero", to_text(e))
            return self.run(e.left) * den.reciprocal()
        if isinstance(e, Pow):
            base = self.run(e.base)
            if e.exponent < 0 and np.any(base.val == 0):
                raise DomainError("division by zero", to_text(e))
            return base**e.exponent
        if isinstance(e, Call):
            u = self.run(e.arg)
            try:
                return getattr(u, _JET_METHOD[e.func])()
            except DomainError as err:
                if err.subexpression is None:
                    raise DomainError(str(err), to_text(e)) from None
                raise
        raise TypeError(f"not an expression node: {e!r}")


_JET_METHOD = {"sin": "sin", "cos": "cos", "exp": "exp", "ln": "log", "sqrt": "sqrt"}


def chart_env(pts, variables: Sequence[str] = REAL_CHART) -> dict[str, Jet]:
    coords = Jet.coordinates(pts)
    return dict(zip(variables, coords))


def eval_batch(e: Expr, pts, variables: Sequence[str] = REAL_CHART) -> Jet:
    """Jets of ``e`` at points ``pts`` of shape (N, 4)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return eval_jets(e, chart_env(pts, variables))


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar expression at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


def eval_jet2(e: Expr, p, variables: Sequence[str] = REAL_CHART) -> Jet2:
    j = eval_batch(e, np.asarray(p, dtype=float)[None, :], variables)
    val = j.val[0]
    if np.iscomplexobj(val) and val.imag == 0 and not np.any(j.grad.imag) and not np.any(j.hess.imag):
        return Jet2(float(val.real), j.grad[0].real, j.hess[0].real)
    value = val.item()
    return Jet2(value, j.grad[0], j.hess[0])
