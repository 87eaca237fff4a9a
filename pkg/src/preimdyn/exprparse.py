"""Small recursive-descent parser for maps and polynomials typed on the CLI.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom (('^'|'**') integer)?
    atom   := integer | variable | '(' expr ')'

Juxtaposition such as ``2x`` is accepted as multiplication.
"""

from __future__ import annotations

import re
from fractions import Fraction

from preimdyn.poly import Poly, RatFunc

_TOKEN = re.compile(r"\s*(?:(\d+)|(\*\*|[-+*/^()])|([A-Za-z_]\w*))")


class ParseError(ValueError):
    pass


def _tokenize(s: str):
    pos, out = 0, []
    s = s.rstrip()
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ParseError(f"unexpected character {s[pos]!r} at {pos}")
        num, op, name = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif op is not None:
            out.append(("op", "^" if op == "**" else op))
        else:
            out.append(("name", name))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, var: str, params: dict):
        self.toks = tokens
        self.i = 0
        self.var = var
        self.params = params

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}")

    def parse(self) -> RatFunc:
        r = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input at token {self.i}")
        return r

    def expr(self):
        acc = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self):
        acc = self.unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "*":
                    acc = acc * rhs
                else:
                    if rhs.is_zero():
                        raise ParseError("division by zero")
                    acc = acc / rhs
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                acc = acc * self.unary()
            else:
                return acc

    def unary(self):
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            u = self.unary()
            return -u if val == "-" else u
        return self.power()

    def power(self):
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            neg = False
            k2, v2 = self.peek()
            if k2 == "op" and v2 == "-":
                self.take()
                neg = True
            k, n = self.take()
            if k != "num":
                raise ParseError("exponent must be an integer literal")
            return base ** (-n if neg else n)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return RatFunc(Poly.const(val))
        if kind == "name":
            if val == self.var:
                return RatFunc(Poly.x())
            if val in self.params:
                return RatFunc(Poly.const(self.params[val]))
            raise ParseError(f"unknown symbol {val!r}")
        if kind == "op" and val == "(":
            r = self.expr()
            self.expect(")")
            return r
        raise ParseError("unexpected end of input" if kind is None else f"unexpected {val!r}")


def parse_ratfunc(s: str, var: str = "x", params: dict | None = None) -> RatFunc:
    """Parse ``s`` as a rational function in ``var``.

    ``params`` binds other names to rational constants, e.g. ``{"t": 3}``.
    """
    params = {k: Fraction(v) for k, v in (params or {}).items()}
    return _Parser(_tokenize(s), var, params).parse()


def parse_poly(s: str, var: str = "x", params: dict | None = None) -> Poly:
    r = parse_ratfunc(s, var, params)
    if not r.den.is_constant():
        raise ParseError(f"{s!r} is not a polynomial in {var}")
    return r.num.scale(1 / r.den.coeffs[0]) if r.den.coeffs[0] != 1 else r.num
