"""Recursive-descent parser for the expression grammar.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # right-associative, binds tighter than unary minus
    atom   := number | ident primes? | fn '(' expr ')' | '(' expr ')'

``**`` is accepted as a synonym for ``^``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .nodes import (
    ELEMENTARY,
    FUNCTION_NAMES,
    Call,
    Expr,
    Func,
    Num,
    Param,
    X,
    add,
    mul,
    neg,
    power,
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text!r}")


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)(?P<primes>'*)
      | (?P<op>\*\*|[-+*/^()])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", text, start)
        start = m.start(m.lastgroup if m.lastgroup != "primes" else "ident")
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), start))
        elif m.group("ident") is not None:
            tokens.append(("ident", (m.group("ident"), len(m.group("primes"))), start))
        else:
            op = m.group("op")
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, pos=None):
        raise ParseError(message, self.text, self.tok[2] if pos is None else pos)

    def accept(self, op):
        kind, value, _ = self.tok
        if kind == "op" and value == op:
            self.i += 1
            return True
        return False

    def expect(self, op):
        if not self.accept(op):
            self.error(f"expected {op!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "end":
            self.error(f"unexpected token {self.text[self.tok[2]:].split()[0]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = add(e, self.term())
            elif self.accept("-"):
                e = add(e, neg(self.term()))
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            if self.accept("*"):
                e = mul(e, self.unary())
            elif self.accept("/"):
                e = mul(e, power(self.unary(), -1))
            else:
                return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return power(base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            return Num(Fraction(value))
        if kind == "ident":
            self.i += 1
            name, primes = value
            if name in ELEMENTARY:
                if primes:
                    self.error(f"primes on elementary function {name!r}", pos)
                if not self.accept("("):
                    self.error(f"{name!r} must be called with parentheses")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name in FUNCTION_NAMES:
                return Func(name, primes)
            if primes:
                self.error(f"unknown function symbol {name!r}", pos)
            if name == "x":
                return X()
            return Param(name)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected token {self.text[self.tok[2]:].split()[0]!r}")


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Identifiers outside the function-symbol set become scalar parameters;
    ``x`` is the coordinate and ``pi`` a parameter with a default value.
    """
    return _Parser(text).parse()
