"""Arithmetic expressions in the index variable ``n``.

Grammar (precedence low to high)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right associative
    atom   := NUMBER | NUMBER "i" | "i" | "n" | "abs" "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus, so ``-2^2`` is ``-4`` and
``4^-n`` is ``4^(-n)``. A number immediately followed by ``i`` (``3i``,
``2.5i``) is an imaginary literal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import EvaluationError, ParseError

Number = Union[float, complex]


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: float
    imaginary: bool = False
    line: int = field(default=1, compare=False)
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Var(Node):
    name: str
    line: int = field(default=1, compare=False)
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    line: int = field(default=1, compare=False)
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Abs(Node):
    operand: Node
    line: int = field(default=1, compare=False)
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node
    line: int = field(default=1, compare=False)
    column: int = field(default=1, compare=False)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    column: int
    imaginary: bool = False


def _tokenize(text, line, col0):
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        if m.lastgroup != "ws":
            kind = "num" if m.group("num") else m.lastgroup
            tok_text = m.group("num") or m.group(m.lastgroup)
            toks.append(_Tok(kind, tok_text, col0 + pos, bool(m.group("imag"))))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(text)))
    return toks


class _Parser:
    def __init__(self, text, line, col0):
        self.line = line
        self.toks = _tokenize(text, line, col0)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok.column)

    def expect(self, text):
        tok = self.peek()
        if tok.text != text:
            what = repr(tok.text) if tok.kind != "end" else "end of expression"
            self.fail(f"expected {text!r}, found {what}")
        return self.take()

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            tok = self.take()
            node = BinOp(tok.text, node, self.term(), self.line, tok.column)
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            tok = self.take()
            node = BinOp(tok.text, node, self.unary(), self.line, tok.column)
        return node

    def unary(self):
        if self.peek().text == "-":
            tok = self.take()
            return Neg(self.unary(), self.line, tok.column)
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek().text == "^":
            tok = self.take()
            node = BinOp("^", node, self.unary(), self.line, tok.column)
        return node

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text), tok.imaginary, self.line, tok.column)
        if tok.kind == "name":
            if tok.text == "i":
                return Num(1.0, True, self.line, tok.column)
            if tok.text == "n":
                return Var("n", self.line, tok.column)
            if tok.text == "abs":
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return Abs(inner, self.line, tok.column)
            self.fail(f"unknown name {tok.text!r}", tok)
        if tok.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "end":
            self.fail("unexpected end of expression", tok)
        self.fail(f"unexpected {tok.text!r}", tok)


def parse_expr(text: str, line: int = 1, column: int = 1) -> Node:
    """Parse ``text``; ``line``/``column`` locate it inside a larger file."""
    p = _Parser(text, line, column)
    node = p.expr()
    if p.peek().kind != "end":
        p.fail(f"unexpected {p.peek().text!r}")
    return node


def uses_n(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, (Neg, Abs)):
        return uses_n(node.operand)
    if isinstance(node, BinOp):
        return uses_n(node.left) or uses_n(node.right)
    return False


def _real(x):
    return isinstance(x, float) or (isinstance(x, complex) and x.imag == 0)


def _pow(base, exp, node):
    if base == 0 and _real(exp) and exp.real < 0:
        raise EvaluationError("0 raised to a negative power", node.line, node.column)
    if _real(exp) and float(exp.real).is_integer() and abs(exp.real) <= 2 ** 31:
        k = int(exp.real)
        if _real(base):
            return float(base.real) ** k
        return complex(base) ** k
    if _real(base) and _real(exp) and base.real > 0:
        return float(base.real) ** float(exp.real)
    return complex(base) ** complex(exp)


def evaluate(node: Node, n: Optional[int] = None) -> Number:
    """Evaluate ``node`` at index ``n``; result is float or complex."""
    try:
        return _eval(node, n)
    except OverflowError:
        raise EvaluationError("arithmetic overflow", node.line, node.column) from None


def _eval(node, n):
    if isinstance(node, Num):
        return complex(0.0, node.value) if node.imaginary else node.value
    if isinstance(node, Var):
        if n is None:
            raise EvaluationError("'n' is not defined here", node.line, node.column)
        return float(n)
    if isinstance(node, Neg):
        return -_eval(node.operand, n)
    if isinstance(node, Abs):
        return float(abs(_eval(node.operand, n)))
    left, right = _eval(node.left, n), _eval(node.right, n)
    if node.op == "+":
        out = left + right
    elif node.op == "-":
        out = left - right
    elif node.op == "*":
        out = left * right
    elif node.op == "/":
        if right == 0:
            raise EvaluationError("division by zero", node.line, node.column)
        out = left / right
    else:
        out = _pow(left, right, node)
    if isinstance(out, complex) and out.imag == 0 and _real(left) and _real(right):
        out = out.real
    return out


def eval_expr(node: Node, n: Optional[int] = None) -> complex:
    return complex(evaluate(node, n))


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def format_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_text(node: Node) -> str:
    """Canonical text that parses back to a structurally equal tree."""
    if isinstance(node, Num):
        if node.imaginary:
            return "i" if node.value == 1 else format_number(node.value) + "i"
        return format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Abs):
        return f"abs({to_text(node.operand)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < _NEG_PREC:
            inner = f"({inner})"
        return "-" + inner
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) < _ATOM_PREC:
            left = f"({left})"
        if _prec(node.right) < _NEG_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


def literal(value: float) -> Node:
    """Expression node for a real constant (negative values get a Neg)."""
    value = float(value)
    if value < 0 or (value == 0 and math.copysign(1, value) < 0):
        return Neg(Num(-value))
    return Num(value)
