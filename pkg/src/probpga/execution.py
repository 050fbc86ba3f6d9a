"""Seeded step-by-step execution against a registry of services.

Randomness comes from SplitMix64, and Bernoulli draws compare one 64-bit
output against an exact integer threshold, so a run is fully determined by
(program, registry, seed, step bound) on every platform.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .semantics.pts import random_service_probability
from .syntax.ast import (
    BasicAction, Halt, Jump, JumpG, JumpGU, JumpH, NegTest, Plain, PosTest, PrbNeg, PrbPlain,
    PrbPos, Unit, probability,
)
from .syntax.normal import InstructionSequence

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def rng_next(state: int) -> Tuple[int, int]:
    """One SplitMix64 step: returns (next state, 64-bit output)."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def threshold(q: Fraction) -> int:
    q = Fraction(q)
    return (q.numerator << 64) // q.denominator


def bernoulli(state: int, q: Fraction) -> Tuple[int, bool]:
    if not 0 <= q <= 1:
        raise ValueError(f"probability {q} outside [0, 1]")
    state, draw = rng_next(state)
    return state, draw < threshold(q)


class Rng:
    """Mutable wrapper around a SplitMix64 state, owned by one run."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state, out = rng_next(self.state)
        return out

    def bernoulli(self, q: Fraction) -> bool:
        self.state, reply = bernoulli(self.state, q)
        return reply


# -- services ---------------------------------------------------------------------


def _check_prob(q: Fraction) -> Fraction:
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValueError(f"service probability {q} outside [0, 1]")
    return q


@dataclass(frozen=True)
class RandomPerQ:
    """Replies to ``get`` with True with probability ``q``."""

    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q", _check_prob(self.q))

    def respond(self, method: str, rng: Rng, calls: int) -> Optional[bool]:
        if method != "get":
            return None
        return rng.bernoulli(self.q)


@dataclass(frozen=True)
class RandomSingle:
    """Replies to ``get(q)`` with True with probability ``mkprob(q)``."""

    def respond(self, method: str, rng: Rng, calls: int) -> Optional[bool]:
        q = random_service_probability(BasicAction(method, "random"))
        if q is None:
            return None
        return rng.bernoulli(q)


@dataclass(frozen=True)
class Constant:
    reply: bool

    def respond(self, method: str, rng: Rng, calls: int) -> Optional[bool]:
        return self.reply


@dataclass(frozen=True)
class Scripted:
    """Replies from a fixed list; once exhausted it either deadlocks
    (``inaction``) or starts over (``repeat``)."""

    replies: Tuple[bool, ...]
    policy: str = "inaction"

    def __post_init__(self):
        object.__setattr__(self, "replies", tuple(bool(r) for r in self.replies))
        if self.policy not in ("inaction", "repeat"):
            raise ValueError(f"unknown exhaustion policy {self.policy!r}")
        if self.policy == "repeat" and not self.replies:
            raise ValueError("a repeating script needs at least one reply")

    def respond(self, method: str, rng: Rng, calls: int) -> Optional[bool]:
        if calls < len(self.replies):
            return self.replies[calls]
        if self.policy == "repeat":
            return self.replies[calls % len(self.replies)]
        return None


Service = Union[RandomPerQ, RandomSingle, Constant, Scripted]


@dataclass(frozen=True)
class ServiceRegistry:
    """Services by focus.  With ``auto_random`` an unregistered focus of the
    form ``random(q)`` gets a :class:`RandomPerQ`, and ``random`` a
    :class:`RandomSingle`, following the projection's naming convention."""

    services: Mapping[str, Service] = field(default_factory=dict)
    default: Optional[Service] = None
    auto_random: bool = True

    def lookup(self, action: BasicAction) -> Optional[Service]:
        name = action.service
        if name in self.services:
            return self.services[name]
        if self.auto_random:
            q = random_service_probability(action)
            if q is not None:
                return RandomSingle() if action.focus == "random" else RandomPerQ(q)
        return self.default


# -- runs ---------------------------------------------------------------------------


class Outcome(enum.Enum):
    TERMINATED = "terminated"
    INACTION = "inaction"
    STEP_LIMIT = "step-limit"


@dataclass(frozen=True)
class RunResult:
    trace: Tuple[Tuple[BasicAction, bool], ...]
    outcome: Outcome
    steps: int
    diagnostic: Optional[str] = None


def run(s: InstructionSequence, reg: ServiceRegistry, seed: int, max_steps: int) -> RunResult:
    """Execute ``s`` from its first instruction for at most ``max_steps``
    instructions.  Probabilistic instructions draw from the run's own
    generator; basic instructions are processed by ``reg``."""
    if any(isinstance(i, Unit) for i in s.instructions()):
        raise ValueError("unit instructions must be eliminated before execution")
    rng = Rng(seed)
    calls: Dict[str, int] = {}
    trace: List[Tuple[BasicAction, bool]] = []
    instrs = s.instructions()
    pos: Optional[int] = 0
    steps = 0

    def stop(outcome, note=None):
        return RunResult(tuple(trace), outcome, steps, note)

    while steps < max_steps:
        ins = instrs[pos]
        steps += 1
        if isinstance(ins, (Plain, PosTest, NegTest)):
            action = ins.action
            service = reg.lookup(action)
            if service is None:
                return stop(Outcome.INACTION, f"no service for focus {action.service!r}")
            reply = service.respond(action.method, rng, calls.get(action.service, 0))
            calls[action.service] = calls.get(action.service, 0) + 1
            if reply is None:
                return stop(Outcome.INACTION, f"service {action.service!r} cannot process {action}")
            trace.append((action, reply))
            if isinstance(ins, Plain):
                d = 1
            elif isinstance(ins, PosTest):
                d = 1 if reply else 2
            else:
                d = 2 if reply else 1
        elif isinstance(ins, Halt):
            return stop(Outcome.TERMINATED)
        elif isinstance(ins, Jump):
            d = ins.distance
        elif isinstance(ins, PrbPlain):
            rng.bernoulli(probability(ins.q))
            d = 1
        elif isinstance(ins, PrbPos):
            d = 1 if rng.bernoulli(probability(ins.q)) else 2
        elif isinstance(ins, PrbNeg):
            d = 2 if rng.bernoulli(probability(ins.q)) else 1
        elif isinstance(ins, JumpH):
            d = _uniform_jump(rng, ins.k)
        elif isinstance(ins, JumpG):
            d = _geometric_jump(rng, probability(ins.q), ins.k)
        elif isinstance(ins, JumpGU):
            d = _unbounded_jump(rng, s, pos, probability(ins.q), ins.l)
        else:
            raise TypeError(f"cannot execute {ins!r}")
        if d == 0:
            return stop(Outcome.INACTION)
        pos = s.position(pos + d)
        if pos is None:
            return stop(Outcome.INACTION)
    return stop(Outcome.STEP_LIMIT)


def _uniform_jump(rng: Rng, k: int) -> int:
    # same cascade as the bounded-jump elimination: keep j with 1/(k-j+1)
    for j in range(1, k):
        if rng.bernoulli(Fraction(1, k - j + 1)):
            return j
    return k


def _geometric_jump(rng: Rng, p: Fraction, k: int) -> int:
    for j in range(1, k + 1):
        if rng.bernoulli(p):
            return j
    return 0


def _unbounded_jump(rng: Rng, s: InstructionSequence, pos: int, p: Fraction, l: int) -> int:
    if l == 0 or p == 0:
        return 0
    j = 1
    while True:
        if s.is_finite and pos + l * j >= s.size:
            # every remaining candidate lies past the end
            return 0
        if rng.bernoulli(p):
            return l * j
        j += 1


def visible_shape(result: RunResult, hide_random: bool = True) -> Tuple[str, ...]:
    return tuple(
        str(a) for a, _ in result.trace
        if not (hide_random and random_service_probability(a) is not None)
    )


def sample_many(s: InstructionSequence, reg: ServiceRegistry, seed: int, n: int, max_steps: int,
                hide_random: bool = True) -> Counter:
    """Frequencies of (visible trace, outcome) over ``n`` runs seeded
    ``seed``, ``seed+1``, ... (mod 2^64)."""
    if n < 1:
        raise ValueError("need at least one run")
    counts: Counter = Counter()
    for i in range(n):
        r = run(s, reg, (seed + i) & MASK64, max_steps)
        counts[(visible_shape(r, hide_random), r.outcome)] += 1
    return counts


_MARK = {Outcome.TERMINATED: "!", Outcome.INACTION: "#0", Outcome.STEP_LIMIT: "..."}


def render_counts(counts: Counter) -> List[str]:
    total = sum(counts.values())
    rows = []
    for (shape, outcome), c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1].value)):
        label = ";".join(list(shape) + [_MARK[outcome]])
        rows.append(f"{label} : {c}  ({c / total:.6f})")
    return rows


# -- registry files ------------------------------------------------------------------


def _parse_bool(word: str) -> bool:
    w = word.strip().lower()
    if w in ("true", "t"):
        return True
    if w in ("false", "f"):
        return False
    raise ValueError(f"expected true or false, got {word!r}")


def parse_service(spec: str) -> Service:
    words = spec.split()
    if not words:
        raise ValueError("missing service description")
    kind = words[0]
    if kind == "constant" and len(words) == 2:
        return Constant(_parse_bool(words[1]))
    if kind == "random" and len(words) == 2:
        return RandomPerQ(Fraction(words[1]))
    if kind == "single" and len(words) == 1:
        return RandomSingle()
    if kind == "script" and len(words) in (2, 3):
        replies = tuple(_parse_bool(w) for w in words[1].split(",") if w)
        policy = words[2] if len(words) == 3 else "inaction"
        return Scripted(replies, policy)
    raise ValueError(f"unknown service description {spec!r}")


def parse_registry(text: str) -> ServiceRegistry:
    """Read the line-based registry format::

        focus = constant true|false
        focus = random NUM/DEN
        random = single
        focus = script T,F,T [repeat|inaction]
        default = constant true|false
    """
    services: Dict[str, Service] = {}
    default: Optional[Service] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'focus = service'")
        name, spec = (part.strip() for part in line.split("=", 1))
        try:
            service = parse_service(spec)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if name == "default":
            default = service
        else:
            services[name] = service
    return ServiceRegistry(services, default)


def load_registry(path) -> ServiceRegistry:
    with open(path, encoding="utf-8") as fh:
        return parse_registry(fh.read())


def default_registry() -> ServiceRegistry:
    return ServiceRegistry({}, Constant(True))
