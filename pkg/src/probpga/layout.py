"""Symbolic control-flow form of an instruction sequence, and its linker.

Rewrite passes never compute jump distances by hand.  A sequence is lifted
into a list of :class:`Op` records whose successors are *labels* (op keys),
passes splice gadgets in or out, and :func:`link` lays the ops out again as
PGA: it picks the shortest encoding of every op that still reaches the right
labels, and grows encodings (explicit jumps, flipped test polarity, jump
trampolines) until every successor resolves.

PGA only jumps forward.  A label behind the jump is reachable only when both
lie in the repeating period, by jumping forward around it.  When a gadget
needs a backward edge into the prefix, the linker falls back to laying the
whole program out as one period (finite programs then reach inaction
through explicit ``#0`` instructions instead of running off the end).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .syntax.ast import (
    Halt, Instruction, Jump, JumpG, JumpGU, JumpH, NegTest, Plain, PosTest, PrbNeg,
    PrbPlain, PrbPos, Unit,
)
from .syntax.normal import InstructionSequence, stream


class _Inaction:
    __slots__ = ()

    def __repr__(self) -> str:
        return "INACTION"


INACTION = _Inaction()

Label = Hashable


class LayoutError(ValueError):
    """No forward-only encoding exists for the requested layout."""


@dataclass(eq=False)
class Op:
    key: Label
    kind: str  # plain | test | goto | halt | fanout | stride
    instr: Optional[Instruction] = None
    targets: Tuple[Label, ...] = ()
    # test ops: the opposite-polarity form of ``instr``
    neg: Optional[Instruction] = None
    # stride ops: landing label of the j-th candidate, plus a bound on the
    # pre-period and period (in j) of that label sequence
    landing: Optional[Callable[[int], Label]] = None
    horizon: Tuple[int, int] = (0, 1)

    def __repr__(self) -> str:
        return f"Op({self.key!r}, {self.kind}, {self.instr!r}, {self.targets!r})"


def plain(key, instr, nxt) -> Op:
    return Op(key, "plain", instr, (nxt,))


def goto(key, target) -> Op:
    return Op(key, "goto", None, (target,))


def halt(key) -> Op:
    return Op(key, "halt", Halt())


_POLARITY = {
    PosTest: (PosTest, NegTest),
    NegTest: (PosTest, NegTest),
    PrbPos: (PrbPos, PrbNeg),
    PrbNeg: (PrbPos, PrbNeg),
}


def test(key, instr, on_true, on_false) -> Op:
    """Branch on the reply of ``instr``, whatever polarity it was written in."""
    pos_cls, neg_cls = _POLARITY[type(instr)]
    payload = instr.action if isinstance(instr, (PosTest, NegTest)) else instr.q
    return Op(key, "test", pos_cls(payload), (on_true, on_false), neg=neg_cls(payload))


@dataclass
class Gadget:
    inline: List[Op]
    loops: List[Op] = field(default_factory=list)
    entry: Optional[Label] = None


@dataclass
class Program:
    prefix: List[Op]
    period: List[Op]
    entry: Label
    aliases: Dict[Label, Label] = field(default_factory=dict)
    loops: List[Op] = field(default_factory=list)

    def ops(self) -> List[Op]:
        return self.prefix + self.period + self.loops

    def resolve(self, label: Label) -> Label:
        seen = 0
        while label in self.aliases:
            label = self.aliases[label]
            seen += 1
            if seen > len(self.aliases):
                raise LayoutError("cyclic label aliases")
        return label

    def rewrite(self, build: Callable[[Op], Optional[Gadget]]) -> Tuple["Program", int]:
        """Replace ops for which ``build`` returns a gadget; returns the new
        program and the number of replaced ops."""
        aliases = dict(self.aliases)
        loops = list(self.loops)
        count = 0

        def region(ops):
            nonlocal count
            out = []
            for op in ops:
                g = build(op)
                if g is None:
                    out.append(op)
                    continue
                count += 1
                out.extend(g.inline)
                entry = g.entry if g.entry is not None else (g.inline[0].key if g.inline else None)
                if entry is not None and entry != op.key:
                    aliases[op.key] = entry
                loops.extend(g.loops)
            return out

        prefix = region(self.prefix)
        period = region(self.period)
        return Program(prefix, period, self.entry, aliases, loops), count


# -- lifting -----------------------------------------------------------------


def _op_for(instr: Instruction, key: Label, rel: Callable[[int], Label], horizon) -> Op:
    if isinstance(instr, (Plain, PrbPlain)):
        return plain(key, instr, rel(1))
    if isinstance(instr, (PosTest, PrbPos)):
        return test(key, instr, rel(1), rel(2))
    if isinstance(instr, (NegTest, PrbNeg)):
        return test(key, instr, rel(2), rel(1))
    if isinstance(instr, Jump):
        return goto(key, INACTION if instr.distance == 0 else rel(instr.distance))
    if isinstance(instr, Halt):
        return halt(key)
    if isinstance(instr, JumpH):
        return Op(key, "fanout", instr, tuple(rel(j) for j in range(1, instr.k + 1)))
    if isinstance(instr, JumpG):
        return Op(key, "fanout", instr, tuple(rel(j) for j in range(1, instr.k + 1)))
    if isinstance(instr, JumpGU):
        if instr.l == 0:
            return Op(key, "fanout", instr, ())
        step = instr.l
        return Op(key, "stride", instr, landing=lambda j: rel(step * j), horizon=horizon)
    raise TypeError(f"cannot lift {instr!r}")


def _finite_items(body) -> List[Instruction]:
    prefix, period = stream(body)
    if period:
        raise ValueError("repetition is not allowed inside a unit instruction")
    return prefix


def lift_items(prefix: Sequence[Instruction], period: Sequence[Instruction]) -> Program:
    """Lift a (possibly unit-containing) prefix/period stream.

    A unit counts as one instruction for every control transfer around it;
    a transfer that leaves a unit payload ``k`` places past its end lands on
    the ``k``-th instruction after the unit.
    """
    P, Q = len(prefix), len(period)
    items = list(prefix) + list(period)
    horizon = (P, max(Q, 1))

    def top(t: int) -> Label:
        if t < P:
            return ("o", t)
        if Q == 0:
            return INACTION
        return ("o", P + (t - P) % Q)

    def emit(item, key, path, p, res, out):
        if isinstance(item, Unit):
            body = _finite_items(item.body)
            # the payload's first instruction takes over the unit's label;
            # the rest are named by their structural path
            keys = [key] + [path + (j,) for j in range(1, len(body))]
            inner = _body_resolver(keys, p, res)
            for j, sub in enumerate(body):
                emit(sub, keys[j], path + (j,), j, inner, out)
        else:
            out.append(_op_for(item, key, lambda d, p=p, res=res: res(p + d), horizon))

    ops_prefix: List[Op] = []
    ops_period: List[Op] = []
    for i, item in enumerate(items):
        emit(item, ("o", i), ("o", i), i, top, ops_prefix if i < P else ops_period)
    return Program(ops_prefix, ops_period, ("o", 0))


def _body_resolver(keys, p, res):
    m = len(keys)

    def inner(t: int) -> Label:
        if t < m:
            return keys[t]
        return res(p + 1 + (t - m))

    return inner


def lift(s: InstructionSequence) -> Program:
    return lift_items(s.prefix, s.period)


# -- linking -----------------------------------------------------------------


def _size_options(op: Op) -> Tuple[int, ...]:
    if op.kind == "plain":
        return (1, 2)
    if op.kind == "test":
        return (1, 2, 3)
    if op.kind == "fanout":
        return (1,) if not op.targets else (1, 1 + len(op.targets))
    return (1,)


class _Layout:
    def __init__(self, program: Program, prefix: List[Op], period: List[Op], sizes: Dict[int, int]):
        self.program = program
        self.prefix = prefix
        self.period = period
        self.addr: Dict[Label, int] = {}
        self.starts: Dict[int, Label] = {}
        a = 0
        for op in prefix:
            self.addr[op.key] = a
            self.starts[a] = op.key
            a += sizes[id(op)]
        self.pre = a
        for op in period:
            self.addr[op.key] = a
            self.starts[a] = op.key
            a += sizes[id(op)]
        self.total = a
        self.per = a - self.pre

    def lands(self, a: int) -> Optional[Label]:
        if a >= self.total:
            if self.per == 0:
                return INACTION
            a = self.pre + (a - self.pre) % self.per
        return self.starts.get(a)

    def at(self, a: int, label: Label) -> bool:
        return self.lands(a) == self.program.resolve(label)

    def distance(self, y: int, label: Label) -> int:
        label = self.program.resolve(label)
        if label is INACTION:
            return 0
        try:
            a = self.addr[label]
        except KeyError:
            raise LayoutError(f"unknown label {label!r}") from None
        if y < self.pre:
            if a > y:
                return a - y
            raise LayoutError(f"backward reference to {label!r} outside the period")
        if a < self.pre:
            raise LayoutError(f"period cannot reach prefix label {label!r}")
        return (a - y) % self.per or self.per

    def jump(self, y: int, label: Label) -> Jump:
        return Jump(self.distance(y, label))

    def encode(self, op: Op, x: int, size: int) -> Optional[List[Instruction]]:
        kind = op.kind
        if kind == "halt":
            return [op.instr]
        if kind == "goto":
            return [self.jump(x, op.targets[0])]
        if kind == "plain":
            (nxt,) = op.targets
            if size == 1:
                return [op.instr] if self.at(x + 1, nxt) else None
            return [op.instr, self.jump(x + 1, nxt)]
        if kind == "test":
            t, f = op.targets
            if size == 1:
                if self.at(x + 1, t) and self.at(x + 2, f):
                    return [op.instr]
                if self.at(x + 1, f) and self.at(x + 2, t):
                    return [op.neg]
                return None
            if size == 2:
                if self.at(x + 2, f):
                    return [op.instr, self.jump(x + 1, t)]
                if self.at(x + 2, t):
                    return [op.neg, self.jump(x + 1, f)]
                return None
            return [op.instr, self.jump(x + 1, t), self.jump(x + 2, f)]
        if kind == "fanout":
            if size == 1:
                if all(self.at(x + j, lab) for j, lab in enumerate(op.targets, 1)):
                    return [op.instr]
                return None
            return [op.instr] + [self.jump(x + j, lab) for j, lab in enumerate(op.targets, 1)]
        if kind == "stride":
            return [self._stride(op, x)]
        raise TypeError(kind)

    def _stride(self, op: Op, x: int) -> Instruction:
        first = self.program.resolve(op.landing(1))
        if first is INACTION:
            if self.per:
                raise LayoutError("unbounded jump past the end cannot be placed in a period")
            step = self.total - x
        else:
            step = self.distance(x, first)
        pre, cyc = op.horizon
        per = self.per or 1
        bound = pre + self.pre + 2 + cyc * per // gcd(cyc, per)
        for j in range(1, bound + 1):
            if not self.at(x + step * j, op.landing(j)):
                raise LayoutError(
                    f"landing sites of {op.instr!r} are no longer evenly spaced after relocation"
                )
        return JumpGU(op.instr.q, step)


def _arrange(program: Program, prefix: List[Op], period: List[Op]) -> InstructionSequence:
    entry = program.resolve(program.entry)
    ordered = prefix + period
    if not ordered or ordered[0].key != entry:
        jump_in = goto(("entry",), entry)
        if prefix or not period:
            prefix = [jump_in] + prefix
        else:
            # keep the period intact; enter it from a one-instruction prefix
            prefix = [jump_in]
    sizes = {id(op): _size_options(op)[0] for op in prefix + period}
    while True:
        lay = _Layout(program, prefix, period, sizes)
        grown = False
        for op in prefix + period:
            x = lay.addr[op.key]
            if lay.encode(op, x, sizes[id(op)]) is None:
                options = _size_options(op)
                sizes[id(op)] = options[options.index(sizes[id(op)]) + 1]
                grown = True
        if not grown:
            break
    flat_prefix: List[Instruction] = []
    flat_period: List[Instruction] = []
    for op in prefix:
        flat_prefix.extend(lay.encode(op, lay.addr[op.key], sizes[id(op)]))
    for op in period:
        flat_period.extend(lay.encode(op, lay.addr[op.key], sizes[id(op)]))
    return InstructionSequence.canonical(flat_prefix, flat_period)


def link(program: Program) -> InstructionSequence:
    """Lay the program out as PGA, keeping the prefix/period split when
    possible and otherwise folding everything into a single period."""
    _check_keys(program)
    try:
        return _arrange(program, list(program.prefix), list(program.period) + list(program.loops))
    except LayoutError as first:
        try:
            return _arrange(program, [], program.ops())
        except LayoutError:
            raise first from None


def _check_keys(program: Program) -> None:
    seen = set()
    for op in program.ops():
        if op.key in seen:
            raise ValueError(f"duplicate op key {op.key!r}")
        seen.add(op.key)
