"""Recursive-descent parser for ``.pga`` program text.

Grammar (whitespace and ``//`` line comments are ignored)::

    program  := seq
    seq      := elem (';' elem)*
    elem     := primary '*'*
    primary  := '(' seq ')' | '[' seq ']' | '{' seq '}' '+_' '(' expr ')' '{' seq '}'
              | instr
    instr    := '!' | '#' jump | ('+' | '-')? action
    jump     := NAT | '(' expr ')' | 'H{' expr '}' | 'G{' expr? '}{' expr '}'
              | 'GU{' expr? '}{' expr '}'
    action   := 'prb' ('(' expr ')')? | name ('.' name)?
    name     := IDENT ('(' expr ')')?

``expr`` is a meadow expression, evaluated to a rational on the spot.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..meadow import ExpressionError, ExpressionReader, as_natural, evaluate, format_short
from .ast import (
    BasicAction, Halt, Jump, JumpG, JumpGU, JumpH, NegTest, Plain, PosTest, PrbNeg,
    PrbPlain, PrbPos, PrChoice, Rep, Term, Unit, concat,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        # >0 while inside a unit or a choice operand
        self.finite_depth = 0

    # -- low level ---------------------------------------------------------

    def error(self, message: str, pos: Optional[int] = None) -> ParseError:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return ParseError(message, line, column)

    def skip_from(self, pos: int) -> int:
        text = self.text
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
            elif text.startswith("//", pos):
                end = text.find("\n", pos)
                pos = len(text) if end < 0 else end + 1
            else:
                break
        return pos

    def peek(self, n: int = 1) -> str:
        self.pos = self.skip_from(self.pos)
        return self.text[self.pos:self.pos + n]

    def accept(self, token: str) -> bool:
        if self.peek(len(token)) == token:
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.accept(token):
            found = self.peek() or "end of input"
            raise self.error(f"expected {token!r}, found {found!r}")

    def rational(self) -> Fraction:
        reader = ExpressionReader(self.text, self.pos, skip=self.skip_from)
        try:
            value = evaluate(reader.expression())
        except ExpressionError as exc:
            raise self.error(str(exc), exc.offset) from None
        self.pos = reader.pos
        return value

    def natural(self, what: str) -> int:
        start = self.skip_from(self.pos)
        n = as_natural(self.rational())
        if n is None:
            raise self.error(f"{what} must be a natural number", start)
        return n

    def identifier(self) -> str:
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and _is_ident_char(self.text[self.pos]):
            self.pos += 1
        if start == self.pos:
            found = self.text[start:start + 1] or "end of input"
            raise self.error(f"expected an instruction, found {found!r}", start)
        return self.text[start:self.pos]

    # -- grammar -----------------------------------------------------------

    def program(self) -> Term:
        if not self.peek():
            raise self.error("empty program")
        term = self.seq()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}")
        return term

    def seq(self) -> Term:
        parts = [self.elem()]
        while self.accept(";"):
            parts.append(self.elem())
        return concat(*parts)

    def elem(self) -> Term:
        start = self.skip_from(self.pos)
        node = self.primary()
        while self.accept("*"):
            if self.finite_depth:
                raise self.error("repetition is not allowed inside a unit instruction or choice", start)
            node = Rep(node)
        return node

    def finite_seq(self) -> Term:
        self.finite_depth += 1
        try:
            return self.seq()
        finally:
            self.finite_depth -= 1

    def primary(self) -> Term:
        if self.accept("("):
            node = self.seq()
            self.expect(")")
            return node
        if self.accept("["):
            node = self.finite_seq()
            self.expect("]")
            return Unit(node)
        if self.accept("{"):
            left = self.finite_seq()
            self.expect("}")
            self.expect("+_")
            self.expect("(")
            p = self.rational()
            self.expect(")")
            self.expect("{")
            right = self.finite_seq()
            self.expect("}")
            return PrChoice(left, p, right)
        return self.instruction()

    def instruction(self) -> Term:
        if self.accept("!"):
            return Halt()
        if self.accept("#"):
            return self.jump()
        sign = ""
        if self.peek() in ("+", "-"):
            sign = self.peek()
            self.pos += 1
        return self.action(sign)

    def jump(self) -> Term:
        # no whitespace between '#' and its argument
        text, pos = self.text, self.pos
        if text.startswith("GU", pos):
            self.pos += 2
            q, n = self.braced_pair("#GU stride")
            return JumpGU(q, n)
        if text.startswith("G", pos):
            self.pos += 1
            q, n = self.braced_pair("#G bound")
            return JumpG(q, n)
        if text.startswith("H", pos):
            self.pos += 1
            self.expect("{")
            k = self.natural("#H bound")
            self.expect("}")
            return JumpH(k)
        if pos < len(text) and text[pos].isdigit():
            end = pos
            while end < len(text) and text[end].isdigit():
                end += 1
            self.pos = end
            return Jump(int(text[pos:end]))
        if pos < len(text) and text[pos] == "(":
            self.pos += 1
            n = self.natural("jump distance")
            self.expect(")")
            return Jump(n)
        raise self.error("expected a jump distance after '#'")

    def braced_pair(self, what: str):
        self.expect("{")
        q = None
        if not self.accept("}"):
            q = self.rational()
            self.expect("}")
        self.expect("{")
        n = self.natural(what)
        self.expect("}")
        return q, n

    def name(self) -> str:
        ident = self.identifier()
        if self.peek() == "(":
            self.pos += 1
            q = self.rational()
            self.expect(")")
            ident = f"{ident}({format_short(q)})"
        return ident

    def action(self, sign: str) -> Term:
        start = self.skip_from(self.pos)
        first = self.identifier()
        q = None
        if first == "prb" and self.peek() != ".":
            if self.accept("("):
                q = self.rational()
                self.expect(")")
            if self.peek() == ".":
                raise self.error("'prb(q)' cannot carry a method", start)
            return {"": PrbPlain, "+": PrbPos, "-": PrbNeg}[sign](q)
        if self.peek() == "(":
            self.pos += 1
            arg = self.rational()
            self.expect(")")
            first = f"{first}({format_short(arg)})"
        if self.accept("."):
            act = BasicAction(self.name(), first)
        else:
            act = BasicAction(first)
        return {"": Plain, "+": PosTest, "-": NegTest}[sign](act)


def parse(text: str) -> Term:
    """Parse program text into a :class:`Term`; raises :class:`ParseError`."""
    return _Parser(text).program()


def parse_file(path) -> Term:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_action(text: str) -> BasicAction:
    """Parse a single basic action such as ``a`` or ``random(2/3).get``."""
    p = _Parser(text)
    term = p.action("")
    if p.peek() or not isinstance(term, Plain):
        raise p.error(f"not a basic action: {text!r}", 0)
    return term.action
