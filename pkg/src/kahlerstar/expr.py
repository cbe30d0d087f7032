"""Expression language for potentials and test functions.

Grammar (whitespace is insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom ("^" integer)?
    integer := ("-" | "+")? DIGITS | "(" ("-" | "+")? DIGITS ")"
    atom    := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"
    NUMBER  := DIGITS ("." DIGITS?)? (("e" | "E") ("+" | "-")? DIGITS)? ("i" | "j")?
    IDENT   := "z" INDEX | "zb" INDEX | "i"
    FUNC    := "log" | "exp"

``zK`` is the K-th holomorphic coordinate, ``zbK`` its conjugate, ``i`` the
imaginary unit and a trailing ``i``/``j`` makes a literal imaginary. Exponents
are integer literals. Expressions evaluate to jets by propagating truncated
Taylor series through the tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

from .jets import Jet


class ParseError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
        self.offset = offset


# -- tree -----------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 0-based
    conj: bool


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: object


@dataclass(frozen=True)
class Poly:
    """Explicit polynomial: ``((alpha, beta), coefficient)`` pairs."""

    terms: tuple


Node = Const | Var | BinOp | Neg | Pow | Func | Poly


# -- tokenizer ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?[ij]?|\.\d+(?:[eE][+-]?\d+)?[ij]?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = mt.lastgroup
        if kind != "ws":
            tokens.append((kind, mt.group(), pos))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, m: int | None):
        self.text = text
        self.m = m
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2])

    def expect(self, value: str):
        tok = self.peek()
        if tok[1] != value:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            self.error(f"expected {value!r}, found {found}")
        return self.take()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return Pow(base, self.integer())
        return base

    def integer(self) -> int:
        paren = self.peek()[1] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        tok = self.peek()
        if tok[0] != "num" or not tok[1].isdigit():
            self.error("exponent must be an integer literal")
        self.take()
        if paren:
            self.expect(")")
        return sign * int(tok[1])

    def atom(self):
        tok = self.peek()
        kind, value, _ = tok
        if kind == "num":
            self.take()
            if value[-1] in "ij":
                return Const(complex(0, float(value[:-1])))
            return Const(complex(float(value)))
        if kind == "name":
            self.take()
            if value in ("log", "exp"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(value, arg)
            if value == "i":
                return Const(1j)
            mt = re.fullmatch(r"(zb|z)([1-9]\d*)", value)
            if mt is None:
                self.error(f"unknown identifier {value!r}", tok)
            index = int(mt.group(2))
            if self.m is not None and index > self.m:
                self.error(f"unknown identifier {value!r} (dimension is {self.m})", tok)
            return Var(index - 1, mt.group(1) == "zb")
        if value == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        self.error(f"unexpected {found}")


# -- fields -----------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """A function of ``z_1..z_m`` and their conjugates given by an expression tree."""

    node: Node
    text: str = ""

    def __str__(self) -> str:
        return self.text or render(self.node)

    @property
    def dimension(self) -> int:
        return _max_index(self.node) + 1

    def jet(self, point, depth: int, m: int | None = None) -> Jet:
        """Taylor coefficients at ``point`` up to total degree ``depth``."""
        if isinstance(point, (int, float, complex)):
            point = (point,) * (m or 1)
        point = tuple(complex(x) for x in point)
        m = m or len(point)
        return _field_jet(self.node, point, depth, m)

    def degrees(self) -> tuple[int, int] | None:
        """``(holomorphic, anti-holomorphic)`` degree if polynomial, else ``None``."""
        return _degrees(self.node)

    def is_zero(self) -> bool:
        return _degrees(self.node) == (-1, -1)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(BinOp("+", self.node, as_field(other).node))

    def __neg__(self) -> "ScalarField":
        return ScalarField(Neg(self.node))


def as_field(f) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    if isinstance(f, str):
        return parse_expression(f)
    if isinstance(f, (int, float, complex)):
        return ScalarField(Const(complex(f)))
    raise TypeError(f"cannot interpret {type(f).__name__} as a scalar field")


def parse_expression(text: str, m: int | None = None) -> ScalarField:
    """Parse ``text`` into a field; ``m`` bounds the coordinate indices."""
    return ScalarField(_Parser(text, m).parse(), text)


def polynomial(terms: dict, m: int) -> ScalarField:
    """Field from ``{(alpha, beta): coefficient}`` with exponent m-tuples."""
    items = tuple(sorted(((tuple(a), tuple(b)), complex(c)) for (a, b), c in terms.items()
                         if c != 0))
    node = Poly(items)
    return ScalarField(node, render(node))


def _max_index(node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Poly):
        return max((len(a) - 1 for (a, _), _ in node.terms), default=-1)
    children = [getattr(node, f) for f in ("left", "right", "arg", "base") if hasattr(node, f)]
    return max((_max_index(c) for c in children), default=-1)


def _degrees(node):
    """Polynomial bidegree; ``(-1, -1)`` for the zero constant, ``None`` if not polynomial."""
    if isinstance(node, Const):
        return (-1, -1) if node.value == 0 else (0, 0)
    if isinstance(node, Var):
        return (0, 1) if node.conj else (1, 0)
    if isinstance(node, Poly):
        if not node.terms:
            return (-1, -1)
        return (max(sum(a) for (a, _), _ in node.terms), max(sum(b) for (_, b), _ in node.terms))
    if isinstance(node, Neg):
        return _degrees(node.arg)
    if isinstance(node, BinOp):
        left, right = _degrees(node.left), _degrees(node.right)
        if node.op in "+-":
            if left is None or right is None:
                return None
            return (max(left[0], right[0]), max(left[1], right[1]))
        if node.op == "*":
            if left == (-1, -1) or right == (-1, -1):
                return (-1, -1)
            if left is None or right is None:
                return None
            return (left[0] + right[0], left[1] + right[1])
        if right == (0, 0) and left is not None:
            return left
        if left == (-1, -1):
            return (-1, -1)
        return None
    if isinstance(node, Pow):
        base = _degrees(node.base)
        if node.exponent == 0:
            return (0, 0)
        if base is None:
            return None
        if base == (-1, -1):
            return (-1, -1)
        if node.exponent > 0:
            return (base[0] * node.exponent, base[1] * node.exponent)
        return (0, 0) if base == (0, 0) else None
    if isinstance(node, Func):
        inner = _degrees(node.arg)
        return (0, 0) if inner in ((0, 0), (-1, -1)) else None
    raise TypeError(f"unknown node {node!r}")


@lru_cache(maxsize=4096)
def _field_jet(node, point: tuple, depth: int, m: int) -> Jet:
    return _eval(node, point, depth, m)


def _eval(node, point, depth, m) -> Jet:
    if isinstance(node, Const):
        return Jet.constant(m, depth, node.value)
    if isinstance(node, Var):
        if node.index >= m:
            raise ValueError(f"coordinate z{node.index + 1} exceeds dimension {m}")
        centre = point[node.index]
        if node.conj:
            return Jet.variable(m, depth, m + node.index, centre.conjugate())
        return Jet.variable(m, depth, node.index, centre)
    if isinstance(node, Poly):
        zs = [Jet.variable(m, depth, k, point[k]) for k in range(m)]
        zbs = [Jet.variable(m, depth, m + k, point[k].conjugate()) for k in range(m)]
        acc = Jet(m, depth)
        for (alpha, beta), c in node.terms:
            term = Jet.constant(m, depth, c)
            for k, a in enumerate(alpha):
                if a:
                    term = term * zs[k] ** a
            for k, b in enumerate(beta):
                if b:
                    term = term * zbs[k] ** b
            acc = acc + term
        return acc
    if isinstance(node, Neg):
        return -_field_jet(node.arg, point, depth, m)
    if isinstance(node, BinOp):
        left = _field_jet(node.left, point, depth, m)
        right = _field_jet(node.right, point, depth, m)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right
    if isinstance(node, Pow):
        return _field_jet(node.base, point, depth, m) ** node.exponent
    if isinstance(node, Func):
        arg = _field_jet(node.arg, point, depth, m)
        return arg.log() if node.name == "log" else arg.exp()
    raise TypeError(f"unknown node {node!r}")


def field_jet(f: ScalarField, point, depth: int, m: int | None = None) -> Jet:
    return f.jet(point, depth, m)


def _fmt_number(c: complex) -> str:
    def real(x):
        return repr(float(x)) if not float(x).is_integer() else str(int(x))
    if c.imag == 0:
        return real(c.real)
    if c.real == 0:
        return f"{real(c.imag)}i"
    return f"({real(c.real)} + {real(c.imag)}i)"


def render(node) -> str:
    """Render a tree back into the expression grammar."""
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return f"{'zb' if node.conj else 'z'}{node.index + 1}"
    if isinstance(node, Poly):
        if not node.terms:
            return "0"
        parts = []
        for (alpha, beta), c in node.terms:
            factors = [_fmt_number(c)]
            for k, a in enumerate(alpha):
                if a:
                    factors.append(f"z{k + 1}" + (f"^{a}" if a > 1 else ""))
            for k, b in enumerate(beta):
                if b:
                    factors.append(f"zb{k + 1}" + (f"^{b}" if b > 1 else ""))
            parts.append("*".join(factors))
        return " + ".join(parts)
    if isinstance(node, Neg):
        return f"-({render(node.arg)})"
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    if isinstance(node, Pow):
        return f"({render(node.base)})^{node.exponent}" if node.exponent >= 0 \
            else f"({render(node.base)})^({node.exponent})"
    if isinstance(node, Func):
        return f"{node.name}({render(node.arg)})"
    raise TypeError(f"unknown node {node!r}")


def random_polynomial(rng, m: int, max_degree: int = 4) -> ScalarField:
    """Complex polynomial in z, zb of total degree <= ``max_degree``, coefficients in the unit disc."""
    terms = {}
    for total in range(max_degree + 1):
        for exps in _exponents(2 * m, total):
            radius = math.sqrt(rng.random())
            angle = 2 * math.pi * rng.random()
            terms[(exps[:m], exps[m:])] = complex(radius * math.cos(angle), radius * math.sin(angle))
    return polynomial(terms, m)


def _exponents(nvars: int, total: int):
    if nvars == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _exponents(nvars - 1, total - first):
            yield (first,) + rest
