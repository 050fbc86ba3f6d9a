"""Syntax trees for probabilistic instruction sequences.

Probability arguments are ``Fraction`` values, or ``None`` for the bare
(default) forms ``prb`` / ``#G{}{k}`` / ``#GU{}{l}``.  The default keeps its
own identity in syntax and only collapses to 1/2 in :func:`probability`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from ..meadow import HALF, format_short, mkprob

_IDENT = re.compile(r"[A-Za-z0-9_]+(\(-?\d+(/\d+)?\))?\Z")


@dataclass(frozen=True, order=True)
class BasicAction:
    """A basic instruction ``focus.method`` (or a bare ``method``).

    Focus and method are identifiers, optionally carrying one canonical
    rational argument, e.g. ``random(2/3)`` or ``get(1/2)``.
    """

    method: str
    focus: Optional[str] = None

    def __post_init__(self):
        for part in (self.method, self.focus):
            if part is not None and not _IDENT.match(part):
                raise ValueError(f"malformed identifier {part!r}")

    @property
    def service(self) -> str:
        """Name of the service that processes this action."""
        return self.focus if self.focus is not None else self.method

    def __str__(self) -> str:
        if self.focus is None:
            return self.method
        return f"{self.focus}.{self.method}"


class Instruction:
    """Base class of primitive instructions."""

    __slots__ = ()


@dataclass(frozen=True)
class Plain(Instruction):
    action: BasicAction


@dataclass(frozen=True)
class PosTest(Instruction):
    action: BasicAction


@dataclass(frozen=True)
class NegTest(Instruction):
    action: BasicAction


@dataclass(frozen=True)
class Jump(Instruction):
    distance: int

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError("jump distance must be natural")


@dataclass(frozen=True)
class Halt(Instruction):
    pass


@dataclass(frozen=True)
class PrbPlain(Instruction):
    q: Optional[Fraction] = None


@dataclass(frozen=True)
class PrbPos(Instruction):
    q: Optional[Fraction] = None


@dataclass(frozen=True)
class PrbNeg(Instruction):
    q: Optional[Fraction] = None


@dataclass(frozen=True)
class JumpH(Instruction):
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("#H bound must be natural")


@dataclass(frozen=True)
class JumpG(Instruction):
    q: Optional[Fraction]
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("#G bound must be natural")


@dataclass(frozen=True)
class JumpGU(Instruction):
    q: Optional[Fraction]
    l: int

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("#GU stride must be natural")


@dataclass(frozen=True)
class Unit(Instruction):
    """Unit instruction: a finite subsequence acting as one instruction."""

    body: "Term"

    def __post_init__(self):
        if contains(self.body, Rep):
            raise ValueError("repetition is not allowed inside a unit instruction")


class Compound:
    __slots__ = ()


@dataclass(frozen=True)
class Concat(Compound):
    """Concatenation; nested concatenations are flattened on construction."""

    parts: Tuple["Term", ...]

    def __post_init__(self):
        flat = []
        for part in self.parts:
            if isinstance(part, Concat):
                flat.extend(part.parts)
            else:
                flat.append(part)
        if len(flat) < 2:
            raise ValueError("a concatenation needs at least two parts; use concat()")
        object.__setattr__(self, "parts", tuple(flat))


@dataclass(frozen=True)
class Rep(Compound):
    body: "Term"


@dataclass(frozen=True)
class PrChoice(Compound):
    """Sugar ``{left}+_(p){right}``: take ``left`` with probability ``p``."""

    left: "Term"
    p: Fraction
    right: "Term"

    def __post_init__(self):
        if contains(self.left, Rep) or contains(self.right, Rep):
            raise ValueError("repetition is not allowed inside a probabilistic choice")


Term = Union[Instruction, Concat, Rep, PrChoice]

PROBABILISTIC = (PrbPlain, PrbPos, PrbNeg, JumpH, JumpG, JumpGU)
PROBABILISTIC_JUMPS = (JumpH, JumpG, JumpGU)
TESTS = (PosTest, NegTest, PrbPos, PrbNeg)


def concat(*parts: Term) -> Term:
    if not parts:
        raise ValueError("empty instruction sequence")
    if len(parts) == 1:
        return parts[0]
    return Concat(tuple(parts))


def probability(q: Optional[Fraction]) -> Fraction:
    """Effective probability of an argument: default 1/2, otherwise clamped."""
    return HALF if q is None else mkprob(q)


def children(t: Term):
    if isinstance(t, Concat):
        return t.parts
    if isinstance(t, Rep):
        return (t.body,)
    if isinstance(t, PrChoice):
        return (t.left, t.right)
    if isinstance(t, Unit):
        return (t.body,)
    return ()


def contains(t: Term, kinds) -> bool:
    if isinstance(t, kinds):
        return True
    return any(contains(c, kinds) for c in children(t))


def instructions(t: Term):
    """Yield the instruction leaves of ``t`` (unit payloads included)."""
    if isinstance(t, Instruction) and not isinstance(t, Unit):
        yield t
        return
    for c in children(t):
        yield from instructions(c)


def term_size(t: Term) -> int:
    """Instruction count of a term as written (units counted by payload,
    a choice by the three-part gadget it abbreviates)."""
    if isinstance(t, PrChoice):
        return 2 + term_size(t.left) + term_size(t.right)
    if isinstance(t, Instruction) and not isinstance(t, Unit):
        return 1
    return sum(term_size(c) for c in children(t))


def qtext(q: Optional[Fraction]) -> str:
    return "" if q is None else format_short(q)
