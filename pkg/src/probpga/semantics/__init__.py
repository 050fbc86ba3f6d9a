"""Exact behavioural semantics: transition systems, analyses, bisimilarity."""
from .analysis import (
    DIVERGE, INFINITE, Absorption, Marker, TraceDistribution, absorption,
    expected_coin_flips, expected_steps, internal_closure, render_trace, solve,
    trace_distribution,
)
from .bisim import BisimResult, bisimilar, bisimilar_sequences, equivalent_under
from .pts import (
    ActionNode, AlwaysFalse, AlwaysTrue, Bernoulli, ChanceNode, Environment, Inaction,
    ReactivePTS, Terminated, apply_environment, build_pts, load_environment, make_dist,
    parse_environment, random_service_probability, resolve_random, unbounded_landing,
)

__all__ = [
    "DIVERGE", "INFINITE", "Absorption", "ActionNode", "AlwaysFalse", "AlwaysTrue",
    "Bernoulli", "BisimResult", "ChanceNode", "Environment", "Inaction", "Marker",
    "ReactivePTS", "Terminated", "TraceDistribution", "absorption", "apply_environment",
    "bisimilar", "bisimilar_sequences", "build_pts", "equivalent_under",
    "expected_coin_flips", "expected_steps", "internal_closure", "load_environment",
    "make_dist", "parse_environment", "random_service_probability", "render_trace", "resolve_random",
    "solve", "trace_distribution", "unbounded_landing",
]
