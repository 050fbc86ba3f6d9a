"""Exact arithmetic in the signed cancellation meadow of the rationals.

Values are :class:`fractions.Fraction` instances, which are already kept in
lowest terms with a positive denominator, so equal values compare and hash
identically.  The meadow makes division total: the inverse of zero is zero.

Meadow expressions (:class:`MeadowExpr` subclasses) are small immutable trees
evaluated eagerly by :func:`evaluate`; the concrete grammar lives in
:func:`parse_expression`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def minv(x: Fraction) -> Fraction:
    """Total multiplicative inverse: ``minv(0) == 0``."""
    x = as_rational(x)
    if x == 0:
        return ZERO
    return 1 / x


def signum(x: Fraction) -> Fraction:
    x = as_rational(x)
    if x > 0:
        return ONE
    if x < 0:
        return -ONE
    return ZERO


def rmin(x: Fraction, y: Fraction) -> Fraction:
    return x if x <= y else y


def rmax(x: Fraction, y: Fraction) -> Fraction:
    return x if x >= y else y


def mkprob(q: Fraction) -> Fraction:
    """Clamp ``q`` into ``[0, 1]``, i.e. ``max(0, min(1, q))``."""
    return rmax(ZERO, rmin(ONE, as_rational(q)))


def as_natural(q: Fraction) -> Optional[int]:
    """Return ``n`` when ``q`` is the numeral of the natural ``n``, else ``None``."""
    q = as_rational(q)
    if q.denominator == 1 and q.numerator >= 0:
        return q.numerator
    return None


def numeral(n: int) -> Fraction:
    if n < 0:
        raise ValueError(f"numerals are defined for naturals only, got {n}")
    return Fraction(n)


def power(x: Fraction, n: int) -> Fraction:
    if n < 0:
        raise ValueError(f"exponent must be a natural number, got {n}")
    result = ONE
    for _ in range(n):
        result *= x
    return result


def format_rational(q: Fraction) -> str:
    """Canonical ``num/den`` rendering (denominator always shown)."""
    return f"{q.numerator}/{q.denominator}"


def format_short(q: Fraction) -> str:
    """Rendering used inside programs: integers without a denominator."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# -- expression trees -------------------------------------------------------


class MeadowExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Zero(MeadowExpr):
    pass


@dataclass(frozen=True)
class One(MeadowExpr):
    pass


@dataclass(frozen=True)
class Add(MeadowExpr):
    left: MeadowExpr
    right: MeadowExpr


@dataclass(frozen=True)
class Mul(MeadowExpr):
    left: MeadowExpr
    right: MeadowExpr


@dataclass(frozen=True)
class Neg(MeadowExpr):
    operand: MeadowExpr


@dataclass(frozen=True)
class Inv(MeadowExpr):
    operand: MeadowExpr


@dataclass(frozen=True)
class Signum(MeadowExpr):
    operand: MeadowExpr


@dataclass(frozen=True)
class Sub(MeadowExpr):
    left: MeadowExpr
    right: MeadowExpr


@dataclass(frozen=True)
class Div(MeadowExpr):
    left: MeadowExpr
    right: MeadowExpr


@dataclass(frozen=True)
class Numeral(MeadowExpr):
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("numerals are naturals")


@dataclass(frozen=True)
class PowNat(MeadowExpr):
    base: MeadowExpr
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("exponent must be a natural number")


def evaluate(e: MeadowExpr) -> Fraction:
    if isinstance(e, Zero):
        return ZERO
    if isinstance(e, One):
        return ONE
    if isinstance(e, Numeral):
        # 0-underline = 0 and (n+1)-underline = n-underline + 1
        return numeral(e.n)
    if isinstance(e, Add):
        return evaluate(e.left) + evaluate(e.right)
    if isinstance(e, Mul):
        return evaluate(e.left) * evaluate(e.right)
    if isinstance(e, Neg):
        return -evaluate(e.operand)
    if isinstance(e, Inv):
        return minv(evaluate(e.operand))
    if isinstance(e, Signum):
        return signum(evaluate(e.operand))
    if isinstance(e, Sub):
        return evaluate(e.left) + -evaluate(e.right)
    if isinstance(e, Div):
        return evaluate(e.left) * minv(evaluate(e.right))
    if isinstance(e, PowNat):
        return power(evaluate(e.base), e.exponent)
    raise TypeError(f"not a meadow expression: {e!r}")


# -- concrete syntax --------------------------------------------------------

# Names that would denote non-rational quantities.
IRRATIONAL_NAMES = frozenset({"sqrt", "root", "pi", "e", "exp", "log", "ln", "sin", "cos"})


class ExpressionError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


class ExpressionReader:
    """Recursive-descent reader for meadow expressions over a shared buffer.

    The program parser hands over its text and current offset, so errors are
    reported relative to the whole input.  Grammar::

        expr   := term (('+' | '-') term)*
        term   := unary (('*' | '/') unary)*
        unary  := '-' unary | power
        power  := atom ('^' unary)?
        atom   := INT | '(' expr ')' | 'sgn' '(' expr ')' | 'inv' '(' expr ')'
    """

    def __init__(self, text: str, pos: int = 0, skip=None):
        self.text = text
        self.pos = pos
        self._skip = skip

    def skip(self) -> None:
        if self._skip is not None:
            self.pos = self._skip(self.pos)
            return
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise ExpressionError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def expression(self) -> MeadowExpr:
        node = self.term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                node = Add(node, self.term())
            elif ch == "-":
                self.pos += 1
                node = Sub(node, self.term())
            else:
                return node

    def term(self) -> MeadowExpr:
        node = self.unary()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                node = Mul(node, self.unary())
            elif ch == "/" and not self.text.startswith("//", self.pos):
                self.pos += 1
                node = Div(node, self.unary())
            else:
                return node

    def unary(self) -> MeadowExpr:
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> MeadowExpr:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            start = self.pos
            n = as_natural(evaluate(self.unary()))
            if n is None:
                raise ExpressionError("exponent must be a natural number", start)
            return PowNat(base, n)
        return base

    def atom(self) -> MeadowExpr:
        ch = self.peek()
        start = self.pos
        if ch.isdigit():
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return Numeral(int(self.text[start:self.pos]))
        if ch == "(":
            self.pos += 1
            node = self.expression()
            self.expect(")")
            return node
        if ch.isalpha() or ch == "_":
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name in ("sgn", "inv"):
                self.expect("(")
                inner = self.expression()
                self.expect(")")
                return Signum(inner) if name == "sgn" else Inv(inner)
            if name in IRRATIONAL_NAMES:
                raise ExpressionError(
                    f"{name!r} would denote an irrational quantity; only rational probabilities are supported",
                    start,
                )
            raise ExpressionError(f"unknown name {name!r} in expression", start)
        found = ch or "end of input"
        raise ExpressionError(f"expected a number or '(', found {found!r}", start)


def parse_expression(text: str) -> MeadowExpr:
    reader = ExpressionReader(text)
    node = reader.expression()
    if reader.peek():
        raise ExpressionError(f"unexpected {reader.peek()!r} after expression", reader.pos)
    return node


def parse_rational(text: str) -> Fraction:
    return evaluate(parse_expression(text))
