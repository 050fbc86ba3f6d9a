"""Probabilistic bisimilarity by partition refinement.

Unlabelled chance steps (jumps, coin flips, hidden service calls) are
internal: each visible state is judged by where its successors end up after
closing over internal steps, so ``#1;a`` and ``a`` agree.  Mass that never
leaves internal steps goes to a divergence pseudo-state.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from ..meadow import ZERO, format_rational
from ..syntax.normal import InstructionSequence
from .analysis import DIVERGE, internal_closure, is_visible, trace_distribution
from .pts import (
    ActionNode, ChanceNode, Environment, ReactivePTS, Terminated, apply_environment, build_pts,
    resolve_random,
)


@dataclass(frozen=True)
class BisimResult:
    equivalent: bool
    witness: Optional[str] = None

    def __bool__(self) -> bool:
        return self.equivalent


def _union(p1: ReactivePTS, p2: ReactivePTS) -> Tuple[ReactivePTS, int]:
    off = len(p1.nodes)

    def shift(node):
        if isinstance(node, ActionNode):
            return ActionNode(node.label, node.on_true + off, node.on_false + off)
        if isinstance(node, ChanceNode):
            return ChanceNode(tuple((t + off, m) for t, m in node.dist), node.label)
        return node

    nodes = tuple(p1.nodes) + tuple(shift(n) for n in p2.nodes)
    return ReactivePTS(nodes, p1.initial), off


def _kind(node) -> tuple:
    if isinstance(node, ActionNode):
        return ("action", node.label)
    if isinstance(node, ChanceNode):
        return ("chance", node.label)
    if isinstance(node, Terminated):
        return ("terminated",)
    return ("inaction",)


def _describe_kind(kind) -> str:
    if kind[0] == "diverge":
        return "divergence"
    if kind[0] in ("action", "chance"):
        return f"action {kind[1]}"
    return kind[0]


def bisimilar(p1: ReactivePTS, p2: ReactivePTS) -> BisimResult:
    """Decide bisimilarity of the initial states of ``p1`` and ``p2``.

    Action states must carry equal labels and move equal mass into every
    class on each reply; resolved (labelled) chance states must move equal
    mass into every class.  On failure the witness names the refinement
    round and the class that tells the two systems apart.
    """
    u, off = _union(p1, p2)
    closure = internal_closure(u)
    init1, init2 = p1.initial, p2.initial + off
    visible = [s for s, n in enumerate(u.nodes) if is_visible(n)] + [DIVERGE]

    def kind(s):
        return ("diverge",) if s == DIVERGE else _kind(u.nodes[s])

    # initial partition: node kind and label
    ids: Dict[tuple, int] = {}
    cls: Dict[int, int] = {}
    for s in visible:
        cls[s] = ids.setdefault(kind(s), len(ids))

    def lift(dist) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for t, m in dist:
            for v, w in closure[t].items():
                c = cls[v]
                out[c] = out.get(c, ZERO) + m * w
        return out

    def frozen(d: Dict[int, Fraction]):
        return tuple(sorted((c, m) for c, m in d.items() if m))

    def signature(s):
        if s == DIVERGE:
            return ()
        node = u.nodes[s]
        if isinstance(node, ActionNode):
            return (frozen(lift([(node.on_true, 1)])), frozen(lift([(node.on_false, 1)])))
        if isinstance(node, ChanceNode):
            return (frozen(lift(node.dist)),)
        return ()

    def start_dist(init):
        return frozen(lift([(init, 1)]))

    rounds = 0
    while True:
        d1, d2 = start_dist(init1), start_dist(init2)
        if d1 != d2:
            return BisimResult(False, _witness(rounds, d1, d2, cls, kind, visible, off))
        sigs = {s: (cls[s], signature(s)) for s in visible}
        new_ids: Dict[tuple, int] = {}
        new_cls = {s: new_ids.setdefault(sigs[s], len(new_ids)) for s in visible}
        if len(new_ids) == len(set(cls.values())):
            return BisimResult(True)
        cls = new_cls
        rounds += 1


def _witness(rounds, d1, d2, cls, kind, visible, off) -> str:
    m1, m2 = dict(d1), dict(d2)
    for c in sorted(set(m1) | set(m2)):
        a, b = m1.get(c, ZERO), m2.get(c, ZERO)
        if a != b:
            members = [s for s in visible if cls[s] == c]
            rep = members[0]
            where = "divergence" if rep == DIVERGE else (
                f"left state {rep}" if rep < off else f"right state {rep - off}")
            return (
                f"after {rounds} refinement round(s): the class of {_describe_kind(kind(rep))} "
                f"({where}) is reached with mass {format_rational(a)} on the left "
                f"but {format_rational(b)} on the right"
            )
    return f"after {rounds} refinement round(s): initial states separated"


def bisimilar_sequences(s1: InstructionSequence, s2: InstructionSequence,
                        env: Optional[Environment] = None) -> BisimResult:
    """Bisimilarity of two sequences.  Without an environment only calls on
    random services are resolved; other actions keep both replies open."""
    p1, p2 = build_pts(s1), build_pts(s2)
    if env is None:
        p1, p2 = resolve_random(p1), resolve_random(p2)
    else:
        p1, p2 = apply_environment(p1, env), apply_environment(p2, env)
    return bisimilar(p1, p2)


def equivalent_under(s1: InstructionSequence, s2: InstructionSequence,
                     env: Environment, depth: int) -> bool:
    """Exact equality of depth-bounded trace distributions."""
    return trace_distribution(build_pts(s1), env, depth) == trace_distribution(build_pts(s2), env, depth)
