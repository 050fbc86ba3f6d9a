from __future__ import annotations

from ..meadow import format_short
from .ast import (
    Concat, Halt, Jump, JumpG, JumpGU, JumpH, NegTest, Plain, PosTest, PrbNeg,
    PrbPlain, PrbPos, PrChoice, Rep, Term, Unit, qtext,
)


def _prb(q) -> str:
    return "prb" if q is None else f"prb({format_short(q)})"


def render(t: Term) -> str:
    """Concrete text of a term; ``parse(render(t)) == t``."""
    if isinstance(t, Plain):
        return str(t.action)
    if isinstance(t, PosTest):
        return f"+{t.action}"
    if isinstance(t, NegTest):
        return f"-{t.action}"
    if isinstance(t, Jump):
        return f"#{t.distance}"
    if isinstance(t, Halt):
        return "!"
    if isinstance(t, PrbPlain):
        return _prb(t.q)
    if isinstance(t, PrbPos):
        return "+" + _prb(t.q)
    if isinstance(t, PrbNeg):
        return "-" + _prb(t.q)
    if isinstance(t, JumpH):
        return f"#H{{{t.k}}}"
    if isinstance(t, JumpG):
        return f"#G{{{qtext(t.q)}}}{{{t.k}}}"
    if isinstance(t, JumpGU):
        return f"#GU{{{qtext(t.q)}}}{{{t.l}}}"
    if isinstance(t, Unit):
        return f"[{render(t.body)}]"
    if isinstance(t, Concat):
        return ";".join(render(p) for p in t.parts)
    if isinstance(t, Rep):
        return f"({render(t.body)})*"
    if isinstance(t, PrChoice):
        return f"{{{render(t.left)}}}+_({format_short(t.p)}){{{render(t.right)}}}"
    raise TypeError(f"not a term: {t!r}")


def render_list(items) -> str:
    return ";".join(render(i) for i in items)
