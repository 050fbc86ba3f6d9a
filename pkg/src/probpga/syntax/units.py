from __future__ import annotations

from .ast import Concat, Instruction, Jump, PrbPos, PrChoice, Rep, Term, Unit, concat, contains


def desugar_prchoice(t: Term) -> Term:
    """Rewrite every ``{P}+_(p){Q}`` into ``+prb(p);[P;#2];[Q]``."""
    if isinstance(t, PrChoice):
        left = desugar_prchoice(t.left)
        right = desugar_prchoice(t.right)
        return concat(PrbPos(t.p), Unit(concat(left, Jump(2))), Unit(right))
    if isinstance(t, Concat):
        return concat(*(desugar_prchoice(p) for p in t.parts))
    if isinstance(t, Rep):
        return Rep(desugar_prchoice(t.body))
    if isinstance(t, Unit):
        return Unit(desugar_prchoice(t.body))
    return t


def eliminate_units(t: Term) -> Term:
    """Inline every unit instruction, relocating jumps around and inside it.

    Tests that would now skip into the middle of an inlined payload are
    re-encoded with an explicit jump, and bounded probabilistic jumps whose
    targets are no longer adjacent get a table of trampoline jumps.
    Unbounded probabilistic jumps are rejected when relocation would break
    the even spacing of their landing sites.
    """
    from ..layout import LayoutError, lift_items, link
    from .normal import stream

    if contains(t, PrChoice):
        raise ValueError("probabilistic choice must be desugared before unit elimination")
    if not contains(t, Unit):
        return t
    prefix, period = stream(t)
    try:
        return link(lift_items(prefix, period)).to_term()
    except LayoutError as exc:
        raise ValueError(f"cannot eliminate unit instructions: {exc}") from None


def count_units(t: Term) -> int:
    if isinstance(t, Unit):
        return 1 + count_units(t.body)
    if isinstance(t, Instruction):
        return 0
    if isinstance(t, Concat):
        return sum(count_units(p) for p in t.parts)
    if isinstance(t, Rep):
        return count_units(t.body)
    if isinstance(t, PrChoice):
        return count_units(t.left) + count_units(t.right)
    return 0
