"""
Tiny arithmetic language for the components of F.

Grammar (precedence from loose to tight)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' expo)?          # right-associative
    expo   := '-' expo | power
    atom   := NUMBER | 'x' DIGITS | '(' expr ')'

Exponents must be constant nonnegative integers. Only polynomial and
rational forms are supported; add function calls in ``_atom`` if ever needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprError, ExprSyntaxError, NegativeExponent, UnknownVariable


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    pos = 0
    out = []
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            col = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[col]!r}", col)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, dim: int):
        self.toks = _tokenize(src)
        self.i = 0
        self.dim = dim

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {value!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            expo = self.expo()
            _check_exponent(expo, pos)
            return Bin("^", base, expo)
        return base

    def expo(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.expo())
        return self.power()

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            m = re.fullmatch(r"x(\d+)", text)
            if not m or not 1 <= int(m.group(1)) <= self.dim:
                raise UnknownVariable(
                    f"unknown variable {text!r}; expected x1..x{self.dim}", pos
                )
            return Var(int(m.group(1)))
        if text == "(":
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def _check_exponent(expo, pos):
    if variables(expo):
        raise ExprSyntaxError("exponent must be a constant", pos)
    value = float(evaluate(expo, np.zeros((1, 0)))[0])
    if value < 0:
        raise NegativeExponent(f"negative exponent {value:g}", pos)
    if value != int(value):
        raise ExprSyntaxError(f"exponent {value:g} is not an integer", pos)


def parse_expr(src: str, dim: int):
    """Parse ``src`` over variables x1..x{dim}."""
    return _Parser(src, dim).parse()


def print_expr(node) -> str:
    """Canonical form with every operation parenthesized; parses back to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{print_expr(node.arg)})"
    return f"({print_expr(node.left)} {node.op} {print_expr(node.right)})"


def variables(node) -> set:
    if isinstance(node, Num):
        return set()
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Neg):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


def evaluate(node, points) -> np.ndarray:
    """Evaluate at each row of ``points`` (shape (N, dim)); returns shape (N,)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    n = pts.shape[0]

    def ev(nd):
        if isinstance(nd, Num):
            return np.full(n, nd.value)
        if isinstance(nd, Var):
            if nd.index > pts.shape[1]:
                raise UnknownVariable(f"x{nd.index} is not defined for {pts.shape[1]}-d points")
            return pts[:, nd.index - 1]
        if isinstance(nd, Neg):
            return -ev(nd.arg)
        a = ev(nd.left)
        if nd.op == "^":
            return a ** int(ev(nd.right)[0]) if n else a
        b = ev(nd.right)
        if nd.op == "+":
            return a + b
        if nd.op == "-":
            return a - b
        if nd.op == "*":
            return a * b
        if np.any(b == 0):
            raise ExprError("division by zero")
        return a / b

    return ev(node)
