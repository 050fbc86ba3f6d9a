"""Concrete syntax, canonical forms and unit elimination."""
from .ast import (
    PROBABILISTIC, PROBABILISTIC_JUMPS, TESTS, BasicAction, Compound, Concat, Halt,
    Instruction, Jump, JumpG, JumpGU, JumpH, NegTest, Plain, PosTest, PrbNeg, PrbPlain,
    PrbPos, PrChoice, Rep, Term, Unit, concat, contains, instructions, probability,
    term_size,
)
from .normal import InstructionSequence, expand, normalize, stream
from .parser import ParseError, parse, parse_action, parse_file
from .printer import render, render_list
from .units import count_units, desugar_prchoice, eliminate_units

print_term = render

__all__ = [
    "PROBABILISTIC", "PROBABILISTIC_JUMPS", "TESTS", "BasicAction", "Compound", "Concat",
    "Halt", "Instruction", "InstructionSequence", "Jump", "JumpG", "JumpGU", "JumpH",
    "NegTest", "ParseError", "Plain", "PosTest", "PrbNeg", "PrbPlain", "PrbPos",
    "PrChoice", "Rep", "Term", "Unit", "concat", "contains", "count_units",
    "desugar_prchoice", "eliminate_units", "expand", "instructions", "normalize",
    "parse", "parse_action", "parse_file", "print_term", "probability", "render",
    "render_list", "stream", "term_size",
]
