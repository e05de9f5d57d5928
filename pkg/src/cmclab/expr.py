"""A small infix expression language for surface maps, evaluated on jets.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Identifiers are the surface parameters ``x`` and ``y`` or declared parameter
names.  Exponents must not depend on ``x`` or ``y``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import jets
from .jets import Jet, JetDomainError

FUNCTIONS = {
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
    "sinh": jets.sinh,
    "cosh": jets.cosh,
    "tanh": jets.tanh,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "atan": jets.atan,
}
VARIABLES = ("x", "y")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at byte {offset}")
        self.name = name
        self.offset = offset


class ArityError(ExprError):
    def __init__(self, func: str, nargs: int, offset: int):
        super().__init__(f"{func}() takes 1 argument, got {nargs} (byte {offset})")
        self.func = func
        self.nargs = nargs
        self.offset = offset


class EvalDomainError(ExprError):
    """Evaluation left the natural domain of a sub-expression."""

    def __init__(self, node: "Node", reason: str):
        super().__init__(f"{reason} in {to_source(node)}")
        self.node = node
        self.reason = reason


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Param, Neg, Call, BinOp]


# -- lexer --------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, params):
        self.tokens = _tokenize(source)
        self.i = 0
        self.params = frozenset(params)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, offset = self.take()
        if value != text or kind != "op":
            where = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {where}", offset)

    def parse(self) -> Node:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and value == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, offset = self.take()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                return self.call(value, offset)
            if value in FUNCTIONS:
                raise ExprSyntaxError(f"expected '(' after {value}", self.peek()[2])
            if value in VARIABLES:
                return Var(value)
            if value in self.params:
                return Param(value)
            raise UnknownIdentifierError(value, offset)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        where = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {where}", offset)

    def call(self, name, offset):
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(name, offset)
        self.expect("(")
        args = []
        if self.peek()[:2] != ("op", ")"):
            args.append(self.expr())
            while self.peek()[:2] == ("op", ","):
                self.take()
                args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise ArityError(name, len(args), offset)
        return Call(name, args[0])


def parse(source: str, params=()) -> Node:
    """Parse ``source`` into an immutable AST.

    ``params`` lists the parameter names that may appear besides ``x`` and ``y``.
    """
    clash = set(params) & (set(VARIABLES) | set(FUNCTIONS))
    if clash:
        raise ExprError(f"parameter names shadow built-ins: {sorted(clash)}")
    return _Parser(source, params).parse()


def to_source(node: Node) -> str:
    """Fully parenthesised source text; ``parse(to_source(n)) == n``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Param)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def free_names(node: Node) -> set[str]:
    if isinstance(node, (Var, Param)):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg,)):
        return free_names(node.operand)
    if isinstance(node, Call):
        return free_names(node.arg)
    return free_names(node.left) | free_names(node.right)


def substitute(node: Node, mapping: Mapping[str, Node]) -> Node:
    """Replace variables ``x``/``y`` by sub-expressions."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, (Num, Param)):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, mapping))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, mapping))
    return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))


# -- evaluation ---------------------------------------------------------------


def _const_value(node: Node, bindings) -> float:
    if VARIABLES[0] in free_names(node) or VARIABLES[1] in free_names(node):
        raise ExprError(f"exponent depends on the surface parameters: {to_source(node)}")
    out = _eval(node, None, None, bindings)
    return float(np.asarray(out))


def _eval(node: Node, xj, yj, bindings):
    try:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return xj if node.name == "x" else yj
        if isinstance(node, Param):
            return float(bindings[node.name])
        if isinstance(node, Neg):
            return -_eval(node.operand, xj, yj, bindings)
        if isinstance(node, Call):
            return FUNCTIONS[node.func](_eval(node.arg, xj, yj, bindings))
        left = _eval(node.left, xj, yj, bindings)
        if node.op == "^":
            e = _const_value(node.right, bindings)
            if float(e).is_integer():
                if isinstance(left, Jet):
                    return left ** int(e)
                if e < 0 and np.any(np.asarray(left) == 0):
                    raise JetDomainError("division by zero")
                return np.asarray(left, dtype=float) ** int(e)
            # non-integer exponent: b^e = exp(e * log(b))
            return jets.exp(e * jets.log(left))
        right = _eval(node.right, xj, yj, bindings)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if isinstance(right, Jet):
            return left / right
        if np.any(np.asarray(right) == 0):
            raise JetDomainError("division by zero")
        return left / np.asarray(right, dtype=float)
    except JetDomainError as exc:
        raise EvalDomainError(node, str(exc)) from None
    except KeyError as exc:
        raise ExprError(f"unbound parameter {exc.args[0]!r}") from None


def eval_jet(node: Node, at, bindings: Mapping[str, float] | None = None, order: int = 3) -> Jet:
    """Jet of the expression at ``at = (x0, y0)`` (scalars or equal-shape arrays)."""
    x0 = np.asarray(at[0], dtype=float)
    y0 = np.asarray(at[1], dtype=float)
    x0, y0 = np.broadcast_arrays(x0, y0)
    xj = Jet.variable(x0, 0, order)
    yj = Jet.variable(y0, 1, order)
    return as_jet(evaluate(node, xj, yj, bindings), x0.shape, order)


def evaluate(node: Node, xj, yj, bindings=None):
    """Evaluate on caller-supplied jets (or plain arrays) for ``x`` and ``y``."""
    missing = {n for n in free_names(node) if n not in VARIABLES} - set(bindings or {})
    if missing:
        raise ExprError(f"unbound parameters: {sorted(missing)}")
    return _eval(node, xj, yj, dict(bindings or {}))


def as_jet(value, batch_shape, order) -> Jet:
    if isinstance(value, Jet):
        return value
    return Jet.constant(np.broadcast_to(np.asarray(value, dtype=float), batch_shape), order)
