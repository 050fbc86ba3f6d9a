"""Exact absorbing-chain analysis over rational transition systems."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from ..meadow import ONE, ZERO, format_rational
from ..syntax.ast import BasicAction, PrbNeg, PrbPlain, PrbPos
from .pts import ActionNode, ChanceNode, Environment, Inaction, ReactivePTS, Terminated, apply_environment

INFINITE = math.inf

Vector = Dict[Hashable, Fraction]


def _add_scaled(acc: Vector, vec: Mapping, factor: Fraction) -> None:
    for k, v in vec.items():
        nv = acc.get(k, ZERO) + factor * v
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)


def _sccs(states: Sequence[int], succ: Callable[[int], Sequence[Tuple[int, Fraction]]]) -> List[List[int]]:
    """Tarjan's algorithm, iterative; components come out sinks first."""
    index: Dict[int, int] = {}
    low: Dict[int, int] = {}
    on_stack = set()
    stack: List[int] = []
    out: List[List[int]] = []
    counter = 0
    for root in states:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w, _ in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def solve(
    states: Sequence[int],
    succ: Callable[[int], Sequence[Tuple[int, Fraction]]],
    const: Callable[[int], Mapping],
) -> Dict[int, Vector]:
    """Least solution of ``x[s] = const(s) + sum_t P(s,t) * x[t]``.

    Strongly connected components are solved one at a time, sinks first;
    inside a component the system is eliminated exactly, variable by
    variable (``I - P`` restricted to a component with an exit is a
    non-singular M-matrix, so no pivoting is needed).  A component with no
    exit and no constant term gets the zero vector.
    """
    x: Dict[int, Vector] = {}
    for comp in _sccs(states, succ):
        members = set(comp)
        rows: Dict[int, Vector] = {}
        rhs: Dict[int, Vector] = {}
        leaves = False
        for s in comp:
            row: Vector = {s: ONE}
            b: Vector = dict(const(s))
            if any(b.values()):
                leaves = True
            for t, p in succ(s):
                if t in members:
                    row[t] = row.get(t, ZERO) - p
                else:
                    leaves = True
                    _add_scaled(b, x[t], p)
            rows[s] = {k: v for k, v in row.items() if v}
            rhs[s] = b
        if len(comp) == 1 and comp[0] in rows[comp[0]] and rows[comp[0]][comp[0]] == 1:
            x[comp[0]] = rhs[comp[0]]
            continue
        if not leaves:
            for s in comp:
                x[s] = {}
            continue
        x.update(_eliminate(comp, rows, rhs))
    return x


def _eliminate(order: List[int], rows: Dict[int, Vector], rhs: Dict[int, Vector]) -> Dict[int, Vector]:
    cols: Dict[int, set] = {}
    for s, row in rows.items():
        for v in row:
            cols.setdefault(v, set()).add(s)
    for v in order:
        row_v = rows[v]
        d = row_v[v]
        if d != 1:
            inv = 1 / d
            rows[v] = row_v = {k: c * inv for k, c in row_v.items()}
            rhs[v] = {k: c * inv for k, c in rhs[v].items()}
        for u in list(cols.get(v, ())):
            if u == v:
                continue
            row_u = rows[u]
            f = row_u.get(v)
            if not f:
                continue
            for k, c in row_v.items():
                nv = row_u.get(k, ZERO) - f * c
                if nv:
                    if k not in row_u:
                        cols.setdefault(k, set()).add(u)
                    row_u[k] = nv
                else:
                    row_u.pop(k, None)
                    cols.get(k, set()).discard(u)
            _add_scaled(rhs[u], rhs[v], -f)
    return {s: rhs[s] for s in order}


# -- absorption --------------------------------------------------------------------


@dataclass(frozen=True)
class Absorption:
    terminated: Fraction
    inaction: Fraction
    divergence: Fraction


def _require_resolved(p: ReactivePTS) -> None:
    for s, node in enumerate(p.nodes):
        if isinstance(node, ActionNode) and node.on_true != node.on_false:
            raise ValueError(f"state {s} still branches on the reply to {node.label}; apply an environment first")


def absorption(p: ReactivePTS) -> Absorption:
    """Probabilities of termination, inaction, and running forever."""
    _require_resolved(p)
    states = p.reachable()

    def const(s):
        node = p.nodes[s]
        if isinstance(node, Terminated):
            return {"terminated": ONE}
        if isinstance(node, Inaction):
            return {"inaction": ONE}
        return {}

    x = solve(states, p.successors, const)[p.initial]
    t = x.get("terminated", ZERO)
    i = x.get("inaction", ZERO)
    return Absorption(t, i, 1 - t - i)


def _is_coin(instr) -> bool:
    return isinstance(instr, (PrbPlain, PrbPos, PrbNeg))


def expected_steps(p: ReactivePTS, counts: Optional[Callable[[object], bool]] = None):
    """Expected number of executed instructions before absorption.

    Every instruction state counts one step (halting included; the inaction
    sink is not an instruction).  ``counts`` restricts the count to states
    whose originating instruction satisfies the predicate.  Returns
    :data:`INFINITE` when the run fails to be absorbed with probability one.
    """
    if absorption(p).divergence > 0:
        return INFINITE
    states = p.reachable()

    def weight(s):
        if isinstance(p.nodes[s], Inaction):
            return {}
        origin = p.origins[s] if s < len(p.origins) else None
        if counts is None or counts(origin):
            return {"steps": ONE}
        return {}

    return solve(states, p.successors, weight)[p.initial].get("steps", ZERO)


def expected_coin_flips(p: ReactivePTS):
    return expected_steps(p, _is_coin)


# -- visible closure ---------------------------------------------------------------

DIVERGE = -1


def is_visible(node) -> bool:
    if isinstance(node, ChanceNode):
        return node.label is not None
    return True


def internal_closure(p: ReactivePTS) -> Dict[int, Vector]:
    """For every state, the distribution over the first visible state
    reached through internal (unlabelled chance) steps.  Mass that stays
    internal forever is assigned to :data:`DIVERGE`."""
    states = list(range(len(p.nodes)))

    def succ(s):
        node = p.nodes[s]
        if is_visible(node):
            return ()
        return node.dist

    def const(s):
        return {s: ONE} if is_visible(p.nodes[s]) else {}

    x = solve(states, succ, const)
    out = {}
    for s, vec in x.items():
        missing = 1 - sum(vec.values(), ZERO)
        if missing:
            vec = dict(vec)
            vec[DIVERGE] = missing
        out[s] = vec
    return out


# -- trace distributions ------------------------------------------------------------


class Marker(enum.Enum):
    TERMINATED = "!"
    INACTION = "#0"
    OPEN = "..."
    DIVERGED = "~"


Trace = Tuple[BasicAction, ...]


@dataclass(frozen=True)
class TraceDistribution:
    entries: Mapping[Tuple[Trace, Marker], Fraction] = field(default_factory=dict)

    def total(self) -> Fraction:
        return sum(self.entries.values(), ZERO)

    def mass(self, labels, marker: Marker = Marker.TERMINATED) -> Fraction:
        key = (tuple(_as_action(a) for a in labels), marker)
        return self.entries.get(key, ZERO)

    def open_mass(self) -> Fraction:
        return sum((m for (_, mk), m in self.entries.items() if mk is Marker.OPEN), ZERO)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TraceDistribution):
            return NotImplemented
        return dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def lines(self) -> List[str]:
        rows = []
        for (trace, marker), mass in sorted(self.entries.items(), key=lambda kv: (-kv[1], render_trace(*kv[0]))):
            rows.append(f"{render_trace(trace, marker)} : {format_rational(mass)}  ({float(mass):.6f})")
        return rows

    def __str__(self) -> str:
        return "\n".join(self.lines())


def render_trace(trace: Trace, marker: Marker) -> str:
    return ";".join([str(a) for a in trace] + [marker.value])


def _as_action(a) -> BasicAction:
    if isinstance(a, BasicAction):
        return a
    focus, _, method = a.rpartition(".")
    return BasicAction(method, focus or None)


def trace_distribution(p: ReactivePTS, env: Optional[Environment], depth: int) -> TraceDistribution:
    """Exact distribution over visible action traces of at most ``depth``
    actions.  A run still about to perform an action at the bound is
    recorded as :attr:`Marker.OPEN`."""
    if env is not None:
        p = apply_environment(p, env)
    _require_resolved_for_traces(p)
    closure = internal_closure(p)
    result: Dict[Tuple[Trace, Marker], Fraction] = {}
    frontier: Dict[Tuple[Trace, int], Fraction] = {}
    for v, m in closure[p.initial].items():
        frontier[((), v)] = frontier.get(((), v), ZERO) + m
    while frontier:
        nxt: Dict[Tuple[Trace, int], Fraction] = {}
        for (trace, v), mass in frontier.items():
            if v == DIVERGE:
                _bump(result, (trace, Marker.DIVERGED), mass)
                continue
            node = p.nodes[v]
            if isinstance(node, Terminated):
                _bump(result, (trace, Marker.TERMINATED), mass)
            elif isinstance(node, Inaction):
                _bump(result, (trace, Marker.INACTION), mass)
            elif len(trace) >= depth:
                _bump(result, (trace, Marker.OPEN), mass)
            else:
                longer = trace + (node.label,)
                for t, pt in _visible_dist(node):
                    for w, pw in closure[t].items():
                        _bump(nxt, (longer, w), mass * pt * pw)
        frontier = nxt
    return TraceDistribution(result)


def _visible_dist(node):
    if isinstance(node, ChanceNode):
        return node.dist
    # plain action: both replies continue at the same place
    return ((node.on_true, ONE),)


def _require_resolved_for_traces(p: ReactivePTS) -> None:
    _require_resolved(p)


def _bump(acc, key, mass) -> None:
    acc[key] = acc.get(key, ZERO) + mass
