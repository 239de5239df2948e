"""A small expression language for writing chart maps in configuration files.

Grammar (LL(1), whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" INTEGER)*
    primary := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Exponents are nonnegative integer literals only, so every expression stays
smooth wherever its elementary functions are.  Evaluation is generic: the same
tree evaluates over plain floats or over :class:`~liegroupoid.jets.Jet` values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from . import jets
from .errors import DomainError, ParseError, UnboundVariableError

FUNCTIONS = jets.ELEMENTARY_NAMES


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class VariableEnv:
    """Ordered variable names; position in ``names`` is the jet direction index."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if name in FUNCTIONS:
                raise ValueError(f"variable name {name!r} shadows a function")

    @classmethod
    def for_chart(cls, n: int, m: int, with_w: bool = False) -> "VariableEnv":
        names = [f"u{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(m)]
        if with_w:
            names += [f"w{i + 1}" for i in range(m)]
        return cls(tuple(names))

    @classmethod
    def for_base(cls, n: int) -> "VariableEnv":
        return cls(tuple(f"u{i + 1}" for i in range(n)))

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        return self.names.index(name)


# tokenizer ---------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", byte_pos, source)
        text = m.group()
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, text, byte_pos))
        pos = m.end()
        byte_pos += len(text.encode("utf-8"))
    tokens.append(_Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, source: str, env: Optional[VariableEnv]) -> None:
        self.source = source
        self.env = env
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[_Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.offset, self.source)

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind != "op":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.primary()
        while self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            tok = self.tok
            if tok.kind != "number" or not tok.text.isdigit():
                raise self.error("exponent must be a nonnegative integer literal", tok)
            self.advance()
            node = Pow(node, int(tok.text))
        return node

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(tok)
            if tok.text in FUNCTIONS:
                raise self.error(f"function {tok.text!r} used without arguments", tok)
            if self.env is not None and tok.text not in self.env:
                raise self.error(f"unknown identifier {tok.text!r}", tok)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected token {found!r}")

    def call(self, name_tok: _Token) -> Expr:
        if name_tok.text not in FUNCTIONS:
            raise self.error(f"unknown identifier {name_tok.text!r}", name_tok)
        self.expect("(")
        if self.tok.kind == "op" and self.tok.text == ")":
            raise self.error(f"{name_tok.text} expects 1 argument, got 0", name_tok)
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise self.error(f"{name_tok.text} expects 1 argument, got {len(args)}", name_tok)
        return Call(name_tok.text, args[0])


def parse(source: str, env: Optional[VariableEnv] = None) -> Expr:
    """Parse ``source``; with ``env`` given, every identifier must be declared in it."""
    return _Parser(source, env).parse()


# evaluation --------------------------------------------------------------------


def evaluate(e: Expr, bindings: Mapping[str, jets.Scalar]) -> jets.Scalar:
    """Evaluate over floats or jets (uniformly), following one arithmetic path."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, BinOp):
        a = evaluate(e.left, bindings)
        b = evaluate(e.right, bindings)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return jets.divide(a, b)
    if isinstance(e, Neg):
        return -evaluate(e.operand, bindings)
    if isinstance(e, Pow):
        return jets.integer_power(evaluate(e.base, bindings), e.exponent)
    if isinstance(e, Call):
        return jets.elementary(e.func, evaluate(e.arg, bindings))
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.arg)


# printing ----------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_source(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_source(e)) == e``."""
    if isinstance(e, Num):
        if e.value < 0:
            raise ValueError("negative literals have no concrete syntax; use Neg")
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        return f"-{inner}" if _prec(e.operand) >= 3 else f"-({inner})"
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) < 4:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    p = _PREC[e.op]
    left = to_source(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_source(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def parse_all(sources: Iterable[str], env: Optional[VariableEnv] = None) -> tuple[Expr, ...]:
    return tuple(parse(s, env) for s in sources)


__all__ = [
    "BinOp",
    "Call",
    "DomainError",
    "Expr",
    "FUNCTIONS",
    "Neg",
    "Num",
    "Pow",
    "Var",
    "VariableEnv",
    "evaluate",
    "parse",
    "parse_all",
    "to_source",
    "variables",
]
