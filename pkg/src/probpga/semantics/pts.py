"""Reactive probabilistic transition systems built from canonical sequences.

One state per instruction position of the canonical form, plus a shared
inaction sink.  Reply-dependent branching stays in :class:`ActionNode` until
an :class:`Environment` resolves it; probabilistic instructions and jumps
become :class:`ChanceNode` distributions with exact rational masses.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from ..meadow import ONE, ZERO, mkprob, power
from ..syntax.ast import (
    BasicAction, Halt, Instruction, Jump, JumpG, JumpGU, JumpH, NegTest, Plain,
    PosTest, PrbNeg, PrbPlain, PrbPos, Unit, probability,
)
from ..syntax.normal import InstructionSequence

Dist = Tuple[Tuple[int, Fraction], ...]


@dataclass(frozen=True)
class ActionNode:
    label: BasicAction
    on_true: int
    on_false: int


@dataclass(frozen=True)
class ChanceNode:
    """Probabilistic step; ``label`` is set when the step performs a
    visible action whose reply has been resolved by an environment."""

    dist: Dist
    label: Optional[BasicAction] = None


@dataclass(frozen=True)
class Terminated:
    pass


@dataclass(frozen=True)
class Inaction:
    pass


Node = Union[ActionNode, ChanceNode, Terminated, Inaction]


def make_dist(pairs: Iterable[Tuple[int, Fraction]]) -> Dist:
    """Merge masses per state, drop zeros, and check they sum to one."""
    acc: Dict[int, Fraction] = {}
    for state, mass in pairs:
        if mass:
            acc[state] = acc.get(state, ZERO) + mass
    if sum(acc.values()) != 1:
        raise ValueError(f"masses sum to {sum(acc.values())}, not 1")
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class ReactivePTS:
    nodes: Tuple[Node, ...]
    initial: int = 0
    # instruction each state was built from (None for the inaction sink)
    origins: Tuple[Optional[Instruction], ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.nodes)

    def successors(self, s: int) -> Dist:
        node = self.nodes[s]
        if isinstance(node, ChanceNode):
            return node.dist
        if isinstance(node, ActionNode):
            if node.on_true == node.on_false:
                return ((node.on_true, ONE),)
            raise ValueError(f"state {s} branches on the reply to {node.label}; apply an environment")
        return ()

    def reachable(self) -> list:
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            s = stack.pop()
            node = self.nodes[s]
            if isinstance(node, ActionNode):
                nxt = (node.on_true, node.on_false)
            elif isinstance(node, ChanceNode):
                nxt = tuple(t for t, _ in node.dist)
            else:
                nxt = ()
            for t in nxt:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return sorted(seen)


def unbounded_landing(s: InstructionSequence, pos: int, q: Optional[Fraction], stride: int) -> Dict[Optional[int], Fraction]:
    """Closed-form landing distribution of ``#GU{q}{stride}`` at ``pos``.

    Key ``None`` collects the mass that lands past the end of a finite
    sequence (or never lands, when the success probability is zero).
    Candidate ``j`` (j >= 1) lands on ``pos + stride*j`` with mass
    ``p*(1-p)^(j-1)``.  Inside the period the candidates cycle through
    ``c = len(period)/gcd(len(period), stride)`` residue classes, and class
    ``m`` collects the geometric series ``p*r^(j0+m-1) / (1 - r^c)``.
    """
    p = probability(q)
    if stride == 0 or p == 0:
        return {None: ONE}
    r = 1 - p
    P, Q = len(s.prefix), len(s.period)
    out: Dict[Optional[int], Fraction] = {}
    j = 1
    while pos + stride * j < P:
        t = pos + stride * j
        out[t] = out.get(t, ZERO) + p * power(r, j - 1)
        j += 1
    if Q == 0:
        tail = power(r, j - 1)
        if tail:
            out[None] = out.get(None, ZERO) + tail
        return out
    cycle = Q // gcd(Q, stride)
    denom = 1 - power(r, cycle)
    for m in range(cycle):
        t = s.position(pos + stride * (j + m))
        mass = p * power(r, j + m - 1) / denom
        if mass:
            out[t] = out.get(t, ZERO) + mass
    return out


def build_pts(s: InstructionSequence) -> ReactivePTS:
    """Transition system of a canonical, unit-free sequence."""
    n = s.size
    sink = n

    def at(i: int) -> int:
        p = s.position(i)
        return sink if p is None else p

    nodes = []
    for pos, ins in enumerate(s.instructions()):
        nodes.append(_node(s, pos, ins, at, sink))
    nodes.append(Inaction())
    return ReactivePTS(tuple(nodes), 0, tuple(s.instructions()) + (None,))


def _node(s, pos, ins, at, sink) -> Node:
    if isinstance(ins, Plain):
        return ActionNode(ins.action, at(pos + 1), at(pos + 1))
    if isinstance(ins, PosTest):
        return ActionNode(ins.action, at(pos + 1), at(pos + 2))
    if isinstance(ins, NegTest):
        return ActionNode(ins.action, at(pos + 2), at(pos + 1))
    if isinstance(ins, Jump):
        target = sink if ins.distance == 0 else at(pos + ins.distance)
        return ChanceNode(((target, ONE),))
    if isinstance(ins, Halt):
        return Terminated()
    if isinstance(ins, PrbPlain):
        return ChanceNode(((at(pos + 1), ONE),))
    if isinstance(ins, (PrbPos, PrbNeg)):
        p = probability(ins.q)
        yes, no = at(pos + 1), at(pos + 2)
        if isinstance(ins, PrbNeg):
            yes, no = no, yes
        return ChanceNode(make_dist([(yes, p), (no, 1 - p)]))
    if isinstance(ins, JumpH):
        if ins.k == 0:
            return ChanceNode(((sink, ONE),))
        share = Fraction(1, ins.k)
        return ChanceNode(make_dist((at(pos + j), share) for j in range(1, ins.k + 1)))
    if isinstance(ins, JumpG):
        p = probability(ins.q)
        masses = [(at(pos + j), p * power(1 - p, j - 1)) for j in range(1, ins.k + 1)]
        # mass left over after k failed candidates deadlocks
        masses.append((sink, power(1 - p, ins.k)))
        return ChanceNode(make_dist(masses))
    if isinstance(ins, JumpGU):
        landing = unbounded_landing(s, pos, ins.q, ins.l)
        return ChanceNode(make_dist((sink if t is None else t, m) for t, m in landing.items()))
    if isinstance(ins, Unit):
        raise ValueError("unit instructions must be eliminated before building a transition system")
    raise TypeError(f"unknown instruction {ins!r}")


# -- environments ---------------------------------------------------------------


@dataclass(frozen=True)
class AlwaysTrue:
    def probability(self) -> Fraction:
        return ONE


@dataclass(frozen=True)
class AlwaysFalse:
    def probability(self) -> Fraction:
        return ZERO


@dataclass(frozen=True)
class Bernoulli:
    q: Fraction

    def __post_init__(self):
        if not 0 <= self.q <= 1:
            raise ValueError(f"Bernoulli parameter {self.q} outside [0, 1]")

    def probability(self) -> Fraction:
        return self.q


ReplyModel = Union[AlwaysTrue, AlwaysFalse, Bernoulli]

_PER_Q = re.compile(r"random\((-?\d+(?:/\d+)?)\)\Z")
_SINGLE = re.compile(r"get\((-?\d+(?:/\d+)?)\)\Z")


def random_service_probability(action: BasicAction) -> Optional[Fraction]:
    """Reply probability when ``action`` is a call on a random service:
    ``random(q).get`` or ``random.get(q)``."""
    if action.focus is None:
        return None
    m = _PER_Q.match(action.focus)
    if m and action.method == "get":
        return mkprob(Fraction(m.group(1)))
    if action.focus == "random":
        m = _SINGLE.match(action.method)
        if m:
            return mkprob(Fraction(m.group(1)))
    return None


@dataclass(frozen=True)
class Environment:
    """Memoryless reply models for basic actions.

    Calls on the probabilistic ``random`` services resolve to their own
    reply law unless overridden; with ``hide_random`` they also count as
    internal steps, so a projected program is compared with its source on
    the actions both of them perform.
    """

    default: ReplyModel = AlwaysTrue()
    overrides: Mapping[BasicAction, ReplyModel] = field(default_factory=dict)
    hide_random: bool = True

    def model(self, action: BasicAction) -> ReplyModel:
        if action in self.overrides:
            return self.overrides[action]
        q = random_service_probability(action)
        if q is not None:
            return Bernoulli(q)
        return self.default

    def is_hidden(self, action: BasicAction) -> bool:
        return self.hide_random and action not in self.overrides and random_service_probability(action) is not None


def apply_environment(p: ReactivePTS, env: Environment) -> ReactivePTS:
    nodes = []
    for node in p.nodes:
        if isinstance(node, ActionNode):
            q = env.model(node.label).probability()
            dist = make_dist([(node.on_true, q), (node.on_false, 1 - q)])
            label = None if env.is_hidden(node.label) else node.label
            nodes.append(ChanceNode(dist, label))
        elif isinstance(node, ChanceNode) and node.label is not None and env.is_hidden(node.label):
            nodes.append(ChanceNode(node.dist))
        else:
            nodes.append(node)
    return ReactivePTS(tuple(nodes), p.initial, p.origins)


def resolve_random(p: ReactivePTS) -> ReactivePTS:
    """Resolve only calls on random services, as internal chance steps;
    every other action keeps its reply-dependent branching."""
    nodes = []
    for node in p.nodes:
        q = random_service_probability(node.label) if isinstance(node, ActionNode) else None
        if q is None:
            nodes.append(node)
        else:
            nodes.append(ChanceNode(make_dist([(node.on_true, q), (node.on_false, 1 - q)])))
    return ReactivePTS(tuple(nodes), p.initial, p.origins)


def parse_reply_model(text: str) -> ReplyModel:
    words = text.split()
    if words == ["true"]:
        return AlwaysTrue()
    if words == ["false"]:
        return AlwaysFalse()
    if len(words) == 2 and words[0] == "bernoulli":
        return Bernoulli(Fraction(words[1]))
    raise ValueError(f"unknown reply model {text!r}")


def parse_environment(text: str) -> Environment:
    """Read the line-based environment format (``#`` starts a comment)::

        default = true | false | bernoulli NUM/DEN
        focus.method = true | false | bernoulli NUM/DEN
    """
    from ..syntax.parser import parse_action

    default: ReplyModel = AlwaysTrue()
    overrides: Dict[BasicAction, ReplyModel] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'name = model'")
        name, model = (part.strip() for part in line.split("=", 1))
        try:
            reply = parse_reply_model(model)
            if name == "default":
                default = reply
            else:
                overrides[parse_action(name)] = reply
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return Environment(default, overrides)


def load_environment(path) -> Environment:
    with open(path, encoding="utf-8") as fh:
        return parse_environment(fh.read())
