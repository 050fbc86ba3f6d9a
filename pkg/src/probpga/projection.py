"""Rewrite passes from probabilistic to deterministic instruction sequences.

Each pass lifts a canonical sequence into labelled ops (see :mod:`layout`),
replaces the ops it eliminates by small test gadgets, and links the result
back into PGA.  Gadgets only ever branch forward; the loops a gadget needs
(periodic binary expansions, geometric retries) are placed in the period.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from .layout import INACTION, Gadget, LayoutError, Op, goto, lift, link, plain, test
from .meadow import HALF, format_short
from .syntax.ast import (
    PROBABILISTIC_JUMPS, BasicAction, Instruction, Jump, JumpG, JumpGU, JumpH,
    NegTest, Plain, PosTest, PrbNeg, PrbPlain, PrbPos, PrChoice, Term, Unit, concat,
    children, contains, probability, term_size,
)
from .syntax.normal import InstructionSequence, normalize
from .syntax.units import count_units, desugar_prchoice, eliminate_units

PASS_NAMES = ("desugar", "units", "normalize", "jumps-unbounded", "jumps-bounded", "fair-coin", "services")
DEFAULT_PASSES = tuple(p for p in PASS_NAMES if p != "fair-coin")

PER_Q = "perq"
SINGLE = "single"


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class PassReport:
    name: str
    input_size: int
    output_size: int
    gadgets: int

    def __str__(self) -> str:
        return f"{self.name}: in={self.input_size} out={self.output_size} gadgets={self.gadgets}"


@dataclass(frozen=True)
class ProjectionOptions:
    service_style: str = PER_Q
    passes: Tuple[str, ...] = DEFAULT_PASSES

    def __post_init__(self):
        if self.service_style not in (PER_Q, SINGLE):
            raise ProjectionError(f"unknown service style {self.service_style!r}")
        object.__setattr__(self, "passes", tuple(self.passes))
        seen = set()
        for name in self.passes:
            if name not in PASS_NAMES:
                raise ProjectionError(f"unknown pass {name!r}; choose from {', '.join(PASS_NAMES)}")
            if name in seen:
                raise ProjectionError(f"pass {name!r} selected twice")
            seen.add(name)
        order = [PASS_NAMES.index(n) for n in self.passes]
        if order != sorted(order):
            raise ProjectionError("passes must follow the pipeline order " + ",".join(PASS_NAMES))


def _rewrite(s: InstructionSequence, build: Callable[[Op], Optional[Gadget]]) -> Tuple[InstructionSequence, int]:
    program, count = lift(s).rewrite(build)
    if count == 0:
        return s, 0
    try:
        return link(program), count
    except LayoutError as exc:
        raise ProjectionError(str(exc)) from None


def _reject(s: InstructionSequence, kinds=(), what: str = "") -> None:
    for ins in s.instructions():
        if isinstance(ins, Unit):
            raise ProjectionError("unit instructions must be eliminated first")
        if isinstance(ins, kinds):
            raise ProjectionError(f"{what} must be eliminated first")


# -- fair coins ---------------------------------------------------------------


def _binary_stages(p: Fraction) -> Tuple[List[int], Optional[int]]:
    """Bits of ``p`` in (0, 1) and the stage the expansion loops back to
    (``None`` when the expansion terminates)."""
    bits: List[int] = []
    seen: Dict[Fraction, int] = {}
    r = p
    while r and r not in seen:
        seen[r] = len(bits)
        r *= 2
        bit = int(r >= 1)
        bits.append(bit)
        r -= bit
    return bits, (seen[r] if r else None)


def _coin_gadget(op: Op, p: Fraction, on_true, on_false) -> Gadget:
    # Compare a uniform 0.c1c2... with p = 0.b1b2...: the first coin below
    # its bit resolves True, the first above resolves False.  Coin 1 is the
    # True reply of +prb.
    bits, back = _binary_stages(p)
    keys = [op.key] + [(op.key, "coin", i) for i in range(1, len(bits))]
    ops = []
    for i, bit in enumerate(bits):
        if i + 1 < len(bits):
            nxt = keys[i + 1]
        elif back is not None:
            nxt = keys[back]
        else:
            nxt = on_false  # only zero bits remain
        if bit:
            ops.append(test(keys[i], PrbPos(None), nxt, on_true))
        else:
            ops.append(test(keys[i], PrbPos(None), on_false, nxt))
    split = len(bits) if back is None else back
    return Gadget(ops[:split], ops[split:], keys[0])


def realize_prb_fair(s: InstructionSequence) -> InstructionSequence:
    """Replace every biased ``prb(q)`` by fair ``prb`` coin flips."""
    return realize_prb_fair_counted(s)[0]


def realize_prb_fair_counted(s: InstructionSequence) -> Tuple[InstructionSequence, int]:
    _reject(s, PROBABILISTIC_JUMPS, "probabilistic jump instructions")

    def build(op: Op) -> Optional[Gadget]:
        ins = op.instr
        if op.kind == "plain" and isinstance(ins, PrbPlain):
            if ins.q is None:
                return None
            # side-effect free and both replies continue alike: one flip
            return Gadget([plain(op.key, PrbPlain(None), op.targets[0])])
        if op.kind != "test" or not isinstance(ins, PrbPos):
            return None
        p = probability(ins.q)
        t, f = op.targets
        if ins.q is None:
            return None
        if p == HALF:
            return Gadget([test(op.key, PrbPos(None), t, f)])
        if p in (0, 1):
            return Gadget([goto(op.key, t if p == 1 else f)])
        return _coin_gadget(op, p, t, f)

    return _rewrite(s, build)


# -- bounded jumps --------------------------------------------------------------


def eliminate_bounded_jumps(s: InstructionSequence) -> InstructionSequence:
    """Replace ``#H{k}`` and ``#G{q}{k}`` by cascades of probabilistic tests."""
    return eliminate_bounded_jumps_counted(s)[0]


def eliminate_bounded_jumps_counted(s: InstructionSequence) -> Tuple[InstructionSequence, int]:
    _reject(s)

    def build(op: Op) -> Optional[Gadget]:
        ins = op.instr
        if op.kind != "fanout" or not isinstance(ins, (JumpH, JumpG)):
            return None
        targets = op.targets
        k = len(targets)
        keys = [op.key] + [(op.key, "stage", i) for i in range(1, k)]
        if isinstance(ins, JumpH):
            if k == 0:
                return Gadget([goto(op.key, INACTION)])
            if k == 1:
                return Gadget([goto(op.key, targets[0])])
            # stage i keeps target i with probability 1/(k-i): uniform overall
            ops = [
                test(keys[i], PrbPos(Fraction(1, k - i)), targets[i],
                     keys[i + 1] if i + 2 < k else targets[k - 1])
                for i in range(k - 1)
            ]
            return Gadget(ops)
        p = probability(ins.q)
        if k == 0 or p == 0:
            return Gadget([goto(op.key, INACTION)])
        if p == 1:
            return Gadget([goto(op.key, targets[0])])
        ops = [
            test(keys[i], PrbPos(ins.q), targets[i], keys[i + 1] if i + 1 < k else INACTION)
            for i in range(k)
        ]
        return Gadget(ops)

    return _rewrite(s, build)


# -- unbounded jumps ------------------------------------------------------------


def eliminate_unbounded_jumps(s: InstructionSequence) -> InstructionSequence:
    """Replace ``#GU{q}{l}`` by a ladder of ``+prb(q)`` tests, one per
    candidate landing site, that loops once the sites start repeating."""
    return eliminate_unbounded_jumps_counted(s)[0]


def eliminate_unbounded_jumps_counted(s: InstructionSequence) -> Tuple[InstructionSequence, int]:
    _reject(s)
    for ins in s.instructions():
        if isinstance(ins, JumpGU) and ins.l == 0:
            raise ProjectionError("#GU with stride 0 cannot be eliminated")

    def build(op: Op) -> Optional[Gadget]:
        ins = op.instr
        if op.kind != "stride":
            return None
        p = probability(ins.q)
        if p == 0:
            return Gadget([goto(op.key, INACTION)])
        if p == 1:
            return Gadget([goto(op.key, op.landing(1))])
        sites = []
        index: Dict[object, int] = {}
        j = 1
        while True:
            site = op.landing(j)
            if site is INACTION or site in index:
                break
            index[site] = len(sites)
            sites.append(site)
            j += 1
        if not sites:
            return Gadget([goto(op.key, INACTION)])
        back = index.get(site) if site is not INACTION else None
        keys = [op.key] + [(op.key, "site", i) for i in range(1, len(sites))]
        ops = []
        for i, target in enumerate(sites):
            if i + 1 < len(sites):
                nxt = keys[i + 1]
            else:
                nxt = INACTION if back is None else keys[back]
            ops.append(test(keys[i], PrbPos(ins.q), target, nxt))
        split = len(ops) if back is None else back
        return Gadget(ops[:split], ops[split:], keys[0])

    return _rewrite(s, build)


# -- service calls ----------------------------------------------------------------


def service_action(q: Optional[Fraction], style: str = PER_Q) -> BasicAction:
    """The random-service call replying True with probability ``q``."""
    text = format_short(probability(q))
    if style == SINGLE:
        return BasicAction(f"get({text})", "random")
    return BasicAction("get", f"random({text})")


def to_service_calls(s: InstructionSequence, opts: Optional[ProjectionOptions] = None) -> InstructionSequence:
    """Turn probabilistic instructions into calls on a random service,
    one instruction for one instruction."""
    return to_service_calls_counted(s, opts)[0]


def to_service_calls_counted(s: InstructionSequence, opts: Optional[ProjectionOptions] = None):
    style = (opts or ProjectionOptions()).service_style
    _reject(s, PROBABILISTIC_JUMPS, "probabilistic jump instructions")
    count = 0

    def conv(ins: Instruction) -> Instruction:
        nonlocal count
        if isinstance(ins, PrbPlain):
            count += 1
            return Plain(service_action(ins.q, style))
        if isinstance(ins, PrbPos):
            count += 1
            return PosTest(service_action(ins.q, style))
        if isinstance(ins, PrbNeg):
            count += 1
            return NegTest(service_action(ins.q, style))
        return ins

    prefix = [conv(i) for i in s.prefix]
    period = [conv(i) for i in s.period]
    return InstructionSequence(tuple(prefix), tuple(period)), count


# -- pipeline ------------------------------------------------------------------------


def _size(x: Union[Term, InstructionSequence]) -> int:
    if isinstance(x, InstructionSequence):
        return x.size
    if contains(x, (Unit, PrChoice)):
        return term_size(x)
    return normalize(x).size


def _as_sequence(x) -> InstructionSequence:
    if isinstance(x, InstructionSequence):
        return x
    if contains(x, PrChoice):
        x = desugar_prchoice(x)
    if contains(x, Unit):
        x = eliminate_units(x)
    return normalize(x)


def count_choices(t: Term) -> int:
    return int(isinstance(t, PrChoice)) + sum(count_choices(c) for c in children(t))


def project_full(t: Term, opts: Optional[ProjectionOptions] = None) -> Tuple[InstructionSequence, List[PassReport]]:
    """Run the selected passes in pipeline order, reporting sizes per pass."""
    opts = opts or ProjectionOptions()
    reports: List[PassReport] = []
    cur: Union[Term, InstructionSequence] = t
    for name in opts.passes:
        before = _size(cur)
        try:
            if name == "desugar":
                if isinstance(cur, InstructionSequence):
                    out, n = cur, 0
                else:
                    out, n = desugar_prchoice(cur), count_choices(cur)
            elif name == "units":
                if isinstance(cur, InstructionSequence):
                    out, n = cur, 0
                else:
                    out, n = eliminate_units(cur), count_units(cur)
            elif name == "normalize":
                out, n = _as_sequence(cur), 0
            elif name == "jumps-unbounded":
                out, n = eliminate_unbounded_jumps_counted(_as_sequence(cur))
            elif name == "jumps-bounded":
                out, n = eliminate_bounded_jumps_counted(_as_sequence(cur))
            elif name == "fair-coin":
                out, n = realize_prb_fair_counted(_as_sequence(cur))
            else:
                out, n = to_service_calls_counted(_as_sequence(cur), opts)
        except ProjectionError as exc:
            raise ProjectionError(f"{name}: {exc}") from None
        except ValueError as exc:
            raise ProjectionError(f"{name}: {exc}") from None
        reports.append(PassReport(name, before, _size(out), n))
        cur = out
    return _as_sequence(cur), reports


def build_random_assignment(x: str, k: int) -> Term:
    """``#H{k};[x.set_1;#k];[x.set_2;#(k-1)];...;[x.set_k;#1]``: after
    execution ``x`` holds one of ``1..k``, each with probability ``1/k``."""
    if k < 1:
        raise ValueError("random assignment needs k >= 1")
    units = [Unit(concat(Plain(BasicAction(f"set_{i}", x)), Jump(k - i + 1))) for i in range(1, k + 1)]
    return concat(JumpH(k), *units)
