"""Recursive-descent parser for the small expression language used on the
command line.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('+' | '-') factor | base ('^' integer)?
    base   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | tan | exp | abs

The unary sign in ``factor`` is a convenience beyond the documented grammar.
Expressions are built as sympy trees so that derivatives come for free.
"""

import re

import sympy

from ..errors import ParseError

X = sympy.Symbol("x", real=True)

FUNCTIONS = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "tan": sympy.tan,
    "exp": sympy.exp,
    "abs": sympy.Abs,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def tokenize(text):
    """Split ``text`` into ``(kind, value, offset)`` triples, terminated by
    an ``("end", None, len(text))`` sentinel."""
    tokens = []
    pos = 0
    stripped_end = len(text.rstrip())
    while pos < stripped_end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip()) if pos < len(text) else pos
            raise ParseError(bad, f"unexpected character {text[bad]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected=None):
        kind, value, pos = self.tok
        if kind == "end":
            msg = "unexpected end of input"
        else:
            msg = f"unexpected token {value!r}"
        if expected:
            msg += f", expected {expected}"
        raise ParseError(pos, msg)

    def expect_op(self, op):
        if self.tok[0] == "op" and self.tok[1] == op:
            return self.advance()
        self.fail(repr(op))

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            self.fail("end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            rhs = self.factor()
            node = node * rhs if op == "*" else node / rhs
        return node

    def factor(self):
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = self.factor()
            return -node if op == "-" else node
        node = self.base()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            sign = 1
            if self.tok[0] == "op" and self.tok[1] == "-":
                self.advance()
                sign = -1
            kind, value, _ = self.tok
            if kind != "number" or not value.isdigit():
                self.fail("an integer exponent")
            self.advance()
            node = node ** (sign * int(value))
        return node

    def base(self):
        kind, value, _ = self.tok
        if kind == "number":
            self.advance()
            return sympy.Rational(value)
        if kind == "name":
            if value == "x":
                self.advance()
                return X
            if value == "pi":
                self.advance()
                return sympy.pi
            if value in FUNCTIONS:
                self.advance()
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return FUNCTIONS[value](arg)
            self.fail("a number, 'x', 'pi', a function or '('")
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail("a number, 'x', 'pi', a function or '('")


def parse_to_sympy(text):
    """Parse ``text`` into a sympy expression in the symbol ``x``.

    Raises
    ------
    ParseError
        With the character offset of the offending token.
    """
    return _Parser(text).parse()
