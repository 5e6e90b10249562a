"""Expression language for sprays, metrics and scalar fields.

Grammar (whitespace is insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" ["-"] INT)?
    atom    := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Identifiers are coordinates ``x1..xn`` / ``y1..yn``, scalar parameters, the
sugar ``dot_xx``, ``dot_xy``, ``dot_yy`` and ``dot_<v>_x`` / ``dot_<v>_y`` for
a vector parameter ``v``, template locals (used by catalog entries that plug
one expression into another), and the functions ``sqrt exp ln atan sin cos``.

Parameters and sugar are expanded at parse time, so a parsed expression is
closed: it only refers to coordinates, locals and numeric literals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from . import jet as _jet
from .errors import DivisionByZero, ExprSyntaxError, IndexOutOfRange, SingularJet, UnknownIdentifier
from .jet import Jet

FUNCTIONS = ("sqrt", "exp", "ln", "atan", "sin", "cos")


# AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    """Coordinate reference; index 0..n-1 are x, n..2n-1 are y."""
    index: int
    n: int

    @property
    def name(self) -> str:
        return f"x{self.index + 1}" if self.index < self.n else f"y{self.index - self.n + 1}"


@dataclass(frozen=True)
class Local:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Local, BinOp, Neg, Pow, Call]


# tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            pos = len(src)
            break
        m = _TOKEN.match(src, pos)
        if m is None:
            bad = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", bad)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(src)))
    return toks


# parser -------------------------------------------------------------------

_COORD = re.compile(r"([xy])(\d+)$")
_DOTVEC = re.compile(r"dot_([A-Za-z][A-Za-z0-9]*)_([xy])$")


def _num(v: float) -> Expr:
    v = float(v)
    if math.copysign(1.0, v) < 0:
        return Neg(Num(-v))
    return Num(v)


def _sum(terms: list[Expr]) -> Expr:
    out = terms[0]
    for t in terms[1:]:
        out = BinOp("+", out, t)
    return out


class _Parser:
    def __init__(self, src: str, n: int, params: Mapping, locals_: Sequence[str]):
        self.toks = _tokenize(src)
        self.i = 0
        self.n = n
        self.params = dict(params)
        self.locals = set(locals_)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "eof":
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", self.tok.pos)
        self.advance()

    def parse(self) -> Expr:
        if self.tok.kind == "eof":
            raise ExprSyntaxError("empty expression", 0)
        e = self.expr()
        if self.tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ExprSyntaxError("exponent must be an integer literal", t.pos)
            self.advance()
            return Pow(base, sign * int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            return self.identifier(t)
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {found}", t.pos)

    def identifier(self, t: _Tok) -> Expr:
        name, n = t.text, self.n
        if name in self.locals:
            return Local(name)
        m = _COORD.match(name)
        if m:
            k = int(m.group(2))
            if not 1 <= k <= n:
                raise IndexOutOfRange(f"{name} at offset {t.pos}: dimension is {n}")
            return Var(k - 1 if m.group(1) == "x" else n + k - 1, n)
        if name in ("dot_xx", "dot_xy", "dot_yy"):
            a, b = name[4], name[5]
            off = {"x": 0, "y": n}
            return _sum([BinOp("*", Var(off[a] + i, n), Var(off[b] + i, n)) for i in range(n)])
        m = _DOTVEC.match(name)
        if m:
            vec = self.params.get(m.group(1))
            if vec is None or isinstance(vec, (int, float)):
                raise UnknownIdentifier(f"{name} at offset {t.pos}: no vector parameter {m.group(1)!r}")
            if len(vec) != n:
                raise IndexOutOfRange(f"{name}: vector {m.group(1)!r} has {len(vec)} entries, dimension is {n}")
            off = 0 if m.group(2) == "x" else n
            return _sum([BinOp("*", _num(vec[i]), Var(off + i, n)) for i in range(n)])
        if name in self.params:
            v = self.params[name]
            if not isinstance(v, (int, float)):
                raise UnknownIdentifier(f"{name} at offset {t.pos} is a vector parameter")
            return _num(v)
        raise UnknownIdentifier(f"unknown identifier {name!r} at offset {t.pos}")


def parse(src: str, n: int, params: Mapping | None = None, locals: Sequence[str] = ()) -> Expr:
    """Parse ``src`` over dimension ``n`` with parameters bound to values."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return _Parser(src, n, params or {}, locals).parse()


# printer ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_string(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_string(e)) == e``."""
    return _fmt(e, 0)


def _fmt(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        s = repr(e.value)
        if s in ("inf", "-inf", "nan"):
            raise ValueError("non-finite literal cannot be printed")
        return f"({s})" if e.value < 0 or s.startswith("-") else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Local):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_fmt(e.arg, 0)})"
    if isinstance(e, Pow):
        # ^ does not chain, so a power base is always parenthesized
        base = f"({_fmt(e.base, 0)})" if isinstance(e.base, Pow) else _fmt(e.base, 4)
        return f"{base}^{e.exponent}" if e.exponent >= 0 else f"{base}^-{-e.exponent}"
    if isinstance(e, Neg):
        s = "-" + _fmt(e.operand, 3)
        return f"({s})" if ctx > 3 else s
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        s = f"{_fmt(e.left, p)} {e.op} {_fmt(e.right, p + 1)}"
        return f"({s})" if ctx > p else s
    raise TypeError(f"not an expression node: {e!r}")


# evaluation ---------------------------------------------------------------

# the float path repeats the jet operation order (multiply by a reciprocal,
# square-and-multiply powers) so a jet's value equals plain evaluation bit for bit

def _float_div(a: float, b: float) -> float:
    if b == 0:
        raise DivisionByZero("division by zero in plain evaluation")
    return a * (1.0 / b)


def _float_pow(a: float, k: int) -> float:
    if k < 0:
        if a == 0:
            raise DivisionByZero("negative power of zero")
        a, k = 1.0 / a, -k
    result = 1.0
    while k:
        if k & 1:
            result = result * a
        k >>= 1
        if k:
            a = a * a
    return result


def _fsqrt(a: float) -> float:
    if a < 0:
        raise SingularJet(f"sqrt of {a!r}")
    return math.sqrt(a)


def _fln(a: float) -> float:
    if a <= 0:
        raise SingularJet(f"ln of {a!r}")
    return math.log(a)


_FLOAT_FUNCS: dict[str, Callable[[float], float]] = {
    "sqrt": _fsqrt, "exp": math.exp, "ln": _fln,
    "atan": math.atan, "sin": math.sin, "cos": math.cos,
}

_JET_FUNCS: dict[str, Callable[[Jet], Jet]] = {
    "sqrt": _jet.sqrt, "exp": _jet.exp, "ln": _jet.log,
    "atan": _jet.atan, "sin": _jet.sin, "cos": _jet.cos,
}


def _evaluate(e: Expr, env: Sequence, funcs, div, pw):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.index]
    if isinstance(e, BinOp):
        a = _evaluate(e.left, env, funcs, div, pw)
        b = _evaluate(e.right, env, funcs, div, pw)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return div(a, b)
    if isinstance(e, Neg):
        return -_evaluate(e.operand, env, funcs, div, pw)
    if isinstance(e, Pow):
        return pw(_evaluate(e.base, env, funcs, div, pw), e.exponent)
    if isinstance(e, Call):
        return funcs[e.func](_evaluate(e.arg, env, funcs, div, pw))
    if isinstance(e, Local):
        raise UnknownIdentifier(f"unbound template local {e.name!r}")
    raise TypeError(f"not an expression node: {e!r}")


def _jet_div(a, b):
    if isinstance(b, Jet):
        return a * _jet.reciprocal(b)
    if abs(b) <= _jet.singular_floor():
        raise SingularJet(f"division by {b!r}")
    return a * (1.0 / b)


def _jet_pow(a, k):
    return a ** k if isinstance(a, Jet) else _float_pow(a, k)


def evaluate(e: Expr, point: Sequence[float]) -> float:
    """Plain float value of ``e`` at ``point`` = (x^1..x^n, y^1..y^n)."""
    return float(_evaluate(e, [float(v) for v in point], _FLOAT_FUNCS, _float_div, _float_pow))


def evaluate_jet(e: Expr, jets: Sequence[Jet]) -> Jet:
    """Jet of ``e`` when the coordinates are the given jets."""
    out = _evaluate(e, jets, _JET_FUNCS, _jet_div, _jet_pow)
    if not isinstance(out, Jet):
        return Jet.constant(out, jets[0].nvars, jets[0].order)
    return out


# rewriting ----------------------------------------------------------------

def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace template locals by expressions."""
    if isinstance(e, Local):
        if e.name not in mapping:
            return e
        return mapping[e.name]
    return _map_children(e, lambda c: substitute(c, mapping))


def reverse_field(e: Expr) -> Expr:
    """Expression for (x, y) -> e(x, -y)."""
    if isinstance(e, Var):
        return Neg(e) if e.index >= e.n else e
    return _map_children(e, reverse_field)


def _map_children(e: Expr, f: Callable[[Expr], Expr]) -> Expr:
    if isinstance(e, BinOp):
        return BinOp(e.op, f(e.left), f(e.right))
    if isinstance(e, Neg):
        return Neg(f(e.operand))
    if isinstance(e, Pow):
        return Pow(f(e.base), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, f(e.arg))
    return e


def max_coordinate_dim(e: Expr) -> int | None:
    """Dimension recorded on the coordinate nodes of ``e`` (None if constant)."""
    if isinstance(e, Var):
        return e.n
    for child in _children(e):
        d = max_coordinate_dim(child)
        if d is not None:
            return d
    return None


def _children(e: Expr):
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, (Neg,)):
        return (e.operand,)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Call):
        return (e.arg,)
    return ()


def uses_y(e: Expr) -> bool:
    if isinstance(e, Var):
        return e.index >= e.n
    return any(uses_y(c) for c in _children(e))
