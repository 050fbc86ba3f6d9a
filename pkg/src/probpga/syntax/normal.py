"""First canonical form: a finite prefix followed by an optional period."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .ast import Concat, Instruction, PrChoice, Rep, Term, Unit, concat, contains
from .printer import render_list


@dataclass(frozen=True)
class InstructionSequence:
    """Denotes ``prefix`` followed by ``period`` repeated forever.

    An empty period means the sequence is finite.  Instances built through
    :meth:`canonical` (and everything returned by :func:`normalize`) have a
    primitive period and a minimal prefix, so two sequences denote the same
    instruction stream exactly when they compare equal.
    """

    prefix: Tuple[Instruction, ...]
    period: Tuple[Instruction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "period", tuple(self.period))
        if not self.prefix and not self.period:
            raise ValueError("an instruction sequence is non-empty")

    @classmethod
    def canonical(cls, prefix: Sequence[Instruction], period: Sequence[Instruction] = ()) -> "InstructionSequence":
        prefix, period = list(prefix), list(period)
        if period:
            period = _primitive_root(period)
            while prefix and prefix[-1] == period[-1]:
                period.insert(0, prefix.pop())
                period.pop()
        return cls(tuple(prefix), tuple(period))

    @property
    def size(self) -> int:
        """Instruction count with the period counted once."""
        return len(self.prefix) + len(self.period)

    @property
    def is_finite(self) -> bool:
        return not self.period

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> Instruction:
        """Instruction at absolute position ``i`` of the denoted stream."""
        if i < len(self.prefix):
            return self.prefix[i]
        if not self.period:
            raise IndexError(i)
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def position(self, i: int):
        """Fold an absolute stream position onto a state index, or ``None``
        when it lies past the end of a finite sequence."""
        n = len(self.prefix)
        if i < n:
            return i
        if not self.period:
            return None
        return n + (i - n) % len(self.period)

    def instructions(self) -> Tuple[Instruction, ...]:
        return self.prefix + self.period

    def to_term(self) -> Term:
        parts = list(self.prefix)
        if self.period:
            parts.append(Rep(concat(*self.period)))
        return concat(*parts)

    def __str__(self) -> str:
        text = render_list(self.prefix)
        if self.period:
            rep = f"({render_list(self.period)})*"
            text = f"{text};{rep}" if text else rep
        return text


def _primitive_root(word: List[Instruction]) -> List[Instruction]:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def stream(t: Term) -> Tuple[List[Instruction], List[Instruction]]:
    """Prefix and period of the stream denoted by ``t``, without minimising.

    Unit instructions are kept as opaque items; choice sugar is rejected.
    """
    if isinstance(t, PrChoice):
        raise ValueError("probabilistic choice must be desugared first")
    if isinstance(t, Concat):
        prefix: List[Instruction] = []
        for part in t.parts:
            p, q = stream(part)
            prefix.extend(p)
            if q:
                # X*;Y = X*
                return prefix, q
        return prefix, []
    if isinstance(t, Rep):
        p, q = stream(t.body)
        if q:
            # body already infinite: X* = X
            return p, q
        return [], p
    return [t], []


def normalize(t: Term) -> InstructionSequence:
    """Canonical prefix/period form of a unit-free term."""
    if contains(t, Unit):
        raise ValueError("unit instructions must be eliminated before normalizing")
    prefix, period = stream(t)
    return InstructionSequence.canonical(prefix, period)


def expand(s: InstructionSequence, n: int) -> List[Instruction]:
    """First ``n`` instructions of the stream (fewer if it is shorter)."""
    if s.is_finite:
        return list(s.prefix[:n])
    return [s[i] for i in range(n)]
