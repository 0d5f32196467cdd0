"""Tiny arithmetic-expression evaluator for config files.

Grammar: numbers, the variables t and x, the constant pi, parentheses,
unary minus, binary + - * / and right-associative ^, and the functions
sin, cos, exp.  Compiled expressions are picklable and vectorize over x.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ConfigurationError


class ExpressionError(ConfigurationError):
    """Malformed expression string."""


_NUMBER = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_CONSTANTS = {"pi": np.pi}


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(("num", float(m.group(0))))
            pos = m.end()
            continue
        m = re.match(r"[A-Za-z_]\w*", text[pos:])
        if m:
            tokens.append(("name", m.group(0)))
            pos += m.end()
            continue
        two = text[pos:pos + 2]
        if two == "**":
            tokens.append(("op", "^"))
            pos += 2
            continue
        ch = text[pos]
        if ch in "+-*/^()":
            tokens.append(("op", ch))
            pos += 1
            continue
        raise ExpressionError(f"unexpected character {ch!r} at position {pos} in {text!r}")
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}, found {val!r}")

    # additive <- multiplicative (('+'|'-') multiplicative)*
    def additive(self):
        node = self.multiplicative()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            node = (op, node, self.multiplicative())
        return node

    def multiplicative(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    # power is right-associative: a ^ b ^ c = a ^ (b ^ c)
    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", val)
        if kind == "name":
            if val in _FUNCTIONS:
                self.expect_op("(")
                arg = self.additive()
                self.expect_op(")")
                return ("call", val, arg)
            if val in ("t", "x"):
                return ("var", val)
            if val in _CONSTANTS:
                return ("num", _CONSTANTS[val])
            raise ExpressionError(f"unknown name {val!r} (variables: t, x; functions: sin, cos, exp)")
        if (kind, val) == ("op", "("):
            node = self.additive()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {val!r}")


def _evaluate(node, t, x):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return t if node[1] == "t" else x
    if tag == "neg":
        return -_evaluate(node[1], t, x)
    if tag == "call":
        return _FUNCTIONS[node[1]](_evaluate(node[2], t, x))
    a = _evaluate(node[1], t, x)
    b = _evaluate(node[2], t, x)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    if tag == "*":
        return a * b
    if tag == "/":
        return a / b
    if tag == "^":
        return a ** b
    raise ExpressionError(f"corrupt expression node {tag!r}")


class Expression:
    """A compiled expression in the variables t and x."""

    def __init__(self, text: str):
        self.text = text
        parser = _Parser(_tokenize(text))
        self.ast = parser.additive()
        if parser.peek()[0] != "end":
            raise ExpressionError(f"trailing input after expression in {text!r}")

    def __call__(self, t, x):
        with np.errstate(divide="raise", invalid="raise"):
            try:
                out = _evaluate(self.ast, t, x)
            except FloatingPointError as exc:
                raise ExpressionError(f"expression {self.text!r} failed: {exc}") from exc
        return np.broadcast_to(out, np.shape(x)).astype(float) if np.shape(x) else out

    def __repr__(self):
        return f"Expression({self.text!r})"

    # pickling ships the source; the AST is rebuilt on load
    def __reduce__(self):
        return (Expression, (self.text,))


def compile_expression(text: str) -> Expression:
    return Expression(text)
