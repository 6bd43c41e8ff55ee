"""Small expression language for user-supplied fields.

Grammar (whitespace insignificant, ASCII only):

    expr   := term  (('+'|'-') term)*          left associative
    term   := factor (('*'|'/') factor)*       left associative
    factor := '-' factor | power
    power  := atom ('^' factor)?               right associative, binds tightest
    atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Identifiers: variables x1..xm, y0, t (where permitted); functions sin, cos,
tan, exp, log, sqrt, abs, pow; constants pi, e.  ``pow(a, b)`` parses to the
same node as ``a ^ b``.  Parsed trees compile once into closures that run the
same arithmetic path on float and Jet coordinates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .calculus import (
    EvaluationDomainError,
    Jet,
    SmoothField,
    fabs_,
    fcos,
    fexp,
    flog,
    fpow,
    fsin,
    fsqrt,
    ftan,
)

__all__ = ["ParseError", "Expr", "Num", "Var", "BinOp", "Neg", "Call",
           "parse", "pretty", "eval_field", "compile_expr", "curve_function"]

UNARY_FUNCS = {"sin": fsin, "cos": fcos, "tan": ftan, "exp": fexp,
               "log": flog, "sqrt": fsqrt, "abs": fabs_}
CONSTANTS = {"pi": math.pi, "e": math.e}


class ParseError(ValueError):
    """Malformed expression; carries the byte offset and what was expected."""

    def __init__(self, offset: int, expected: str):
        super().__init__(f"parse error at offset {offset}: expected {expected}")
        self.offset = offset
        self.expected = expected


class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    kind: str          # "x", "y" or "t"
    index: int = 0     # 0-based base-coordinate index, only for kind "x"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str            # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    child: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        mobj = _TOKEN_RE.match(src, pos)
        if mobj is None:
            # skip pure whitespace tail
            if src[pos:].strip() == "":
                break
            offset = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ParseError(offset, "a number, identifier or operator")
        if mobj.group("num") is not None:
            tokens.append(("num", float(mobj.group("num")), mobj.start("num")))
        elif mobj.group("ident") is not None:
            tokens.append(("ident", mobj.group("ident"), mobj.start("ident")))
        else:
            tokens.append(("op", mobj.group("op"), mobj.start("op")))
        pos = mobj.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens, m, allow_y, allow_t):
        self.tokens = tokens
        self.i = 0
        self.m = m
        self.allow_y = allow_y
        self.allow_t = allow_t

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op, expected):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ParseError(offset, expected)
        return self.advance()

    def parse_expr(self):
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.parse_term())
            else:
                return node

    def parse_term(self):
        node = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.parse_factor())
            else:
                return node

    def parse_factor(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self):
        node = self.parse_atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp("^", node, self.parse_factor())
        return node

    def parse_atom(self):
        kind, value, offset = self.advance()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect_op(")", "')'")
            return node
        if kind == "ident":
            return self.parse_ident(value, offset)
        raise ParseError(offset, "an operand")

    def parse_ident(self, name, offset):
        nkind, nvalue, _ = self.peek()
        if nkind == "op" and nvalue == "(":
            return self.parse_call(name, offset)
        if name in CONSTANTS:
            return Num(CONSTANTS[name])
        if name == "y0":
            if not self.allow_y:
                raise ParseError(offset, "a base-only expression (y0 not allowed here)")
            return Var("y")
        if name == "t":
            if not self.allow_t:
                raise ParseError(offset, "an identifier (t only allowed in curve expressions)")
            return Var("t")
        if re.fullmatch(r"x\d+", name):
            index = int(name[1:])
            if not 1 <= index <= self.m:
                raise ParseError(offset, f"a variable index in 1..{self.m}")
            return Var("x", index - 1)
        raise ParseError(offset, f"a known identifier (got {name!r})")

    def parse_call(self, name, offset):
        self.expect_op("(", "'('")
        args = [self.parse_expr()]
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == ",":
                self.advance()
                args.append(self.parse_expr())
            else:
                break
        self.expect_op(")", "')' or ','")
        if name == "pow":
            if len(args) != 2:
                raise ParseError(offset, "pow with exactly two arguments")
            return BinOp("^", args[0], args[1])
        if name in UNARY_FUNCS:
            if len(args) != 1:
                raise ParseError(offset, f"{name} with exactly one argument")
            return Call(name, args[0])
        raise ParseError(offset, f"a known function (got {name!r})")


def parse(src: str, m: int, *, allow_y: bool = True, allow_t: bool = False) -> Expr:
    """Parse ``src`` against base dimension ``m``; raises ParseError on bad input."""
    tokens = _tokenize(src)
    parser = _Parser(tokens, m, allow_y, allow_t)
    node = parser.parse_expr()
    kind, _, offset = parser.peek()
    if kind != "end":
        raise ParseError(offset, "end of input or an operator")
    return node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 9


def pretty(node: Expr) -> str:
    """Render with just enough parentheses that re-parsing rebuilds the tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return {"x": f"x{node.index + 1}", "y": "y0", "t": "t"}[node.kind]
    if isinstance(node, Neg):
        inner = pretty(node.child)
        if _prec(node.child) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.func}({pretty(node.arg)})"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = pretty(node.left)
        right = pretty(node.right)
        if node.op == "^":
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < p:
                right = f"({right})"
        else:
            if _prec(node.left) < p:
                left = f"({left})"
            if _prec(node.right) <= p:
                right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an Expr node: {node!r}")


def _codegen(node: Expr) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return {"x": f"X[{node.index}]", "y": "Y", "t": "T"}[node.kind]
    if isinstance(node, Neg):
        return f"(-{_codegen(node.child)})"
    if isinstance(node, Call):
        return f"f{node.func}({_codegen(node.arg)})" if node.func != "abs" \
            else f"fabs_({_codegen(node.arg)})"
    if isinstance(node, BinOp):
        a, b = _codegen(node.left), _codegen(node.right)
        if node.op == "^":
            return f"fpow({a}, {b})"
        if node.op == "/":
            return f"_div({a}, {b})"
        return f"({a}{node.op}{b})"
    raise TypeError(f"not an Expr node: {node!r}")


def _div(a, b):
    if isinstance(a, Jet) or isinstance(b, Jet):
        if not isinstance(a, Jet):
            a = Jet(a, (0.0,) * len(b.dx), 0.0)
        return a / b
    if b == 0.0:
        raise EvaluationDomainError("division by zero")
    return a / b


_ENV = {"fsin": fsin, "fcos": fcos, "ftan": ftan, "fexp": fexp, "flog": flog,
        "fsqrt": fsqrt, "fabs_": fabs_, "fpow": fpow, "_div": _div,
        "__builtins__": {}}


def compile_expr(node: Expr):
    """Compile to a closure (X, Y, T) -> scalar; X indexable, Y/T scalars."""
    src = f"lambda X, Y, T: {_codegen(node)}"
    return eval(src, dict(_ENV))


def eval_field(node: Expr, m: int, name: str = "") -> SmoothField:
    """Wrap a parsed expression as a field on E (the t variable stays unbound)."""
    fn = compile_expr(node)
    return SmoothField(lambda xs, y: fn(xs, y, 0.0), m, name=name or pretty(node))


def curve_function(node: Expr):
    """Compile a curve-component expression of t into a scalar function of t."""
    fn = compile_expr(node)
    return lambda t: fn((), 0.0, t)
