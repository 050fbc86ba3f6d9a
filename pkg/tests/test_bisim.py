import os
from fractions import Fraction

from conftest import GOLDEN
from corpus import corpus
from probpga.semantics import (
    Bernoulli, Environment, apply_environment, bisimilar, bisimilar_sequences, build_pts,
    equivalent_under, trace_distribution,
)
from probpga.syntax import normalize, parse, parse_file

ENV = Environment()
RANDOM_ENV = Environment(default=Bernoulli(Fraction(1, 3)))
LEFT = "-prb(2/3);#3;a;!;b;!"
LOOP = "(+prb;#3;a;!;+prb;#3;b;!)*"


def seq(text):
    return normalize(parse(text))


def golden(name):
    return normalize(parse_file(os.path.join(GOLDEN, name)))


def test_prb_pair_bisimilar():
    assert bisimilar_sequences(seq(LEFT), seq(LOOP))
    assert bisimilar_sequences(golden("coin_left.pga"), golden("coin_right.pga"))


def test_label_mismatch_witness():
    r = bisimilar_sequences(seq("a;!"), seq("b;!"))
    assert not r
    assert "refinement round" in r.witness and "action a" in r.witness


def test_witness_reports_masses():
    r = bisimilar_sequences(seq("-prb(1/3);#3;a;!;b;!"), seq(LEFT))
    assert not r
    assert "1/3" in r.witness or "2/3" in r.witness


def test_internal_steps_are_invisible():
    assert bisimilar_sequences(seq("#1;a;!"), seq("a;!"))
    assert bisimilar_sequences(seq("prb;a;!"), seq("a;!"))
    assert not bisimilar_sequences(seq("a;!"), seq("a;#0"))


def test_divergence_differs_from_inaction():
    assert not bisimilar_sequences(seq("a;(#1)*"), seq("a;#0"))
    assert bisimilar_sequences(seq("a;(#1)*"), seq("a;(#2;b)*"))


def test_tests_keep_both_replies_without_environment():
    assert not bisimilar_sequences(seq("+a;b;c;!"), seq("+a;c;b;!"))
    assert bisimilar_sequences(seq("+a;b;c;!"), seq("-a;#2;b;c;!"))


def test_reflexive_on_corpus():
    for t in corpus(150, seed=41):
        s = normalize(t)
        assert bisimilar_sequences(s, s, RANDOM_ENV)
        assert bisimilar_sequences(s, s)


def test_bisimilar_implies_trace_equal():
    progs = [normalize(t) for t in corpus(60, seed=43, max_len=5, max_period=2)]
    checked = 0
    for i, s1 in enumerate(progs):
        for s2 in progs[i + 1:]:
            if bisimilar_sequences(s1, s2, RANDOM_ENV):
                checked += 1
                for depth in (1, 3, 6):
                    assert equivalent_under(s1, s2, RANDOM_ENV, depth)
    assert checked > 0


def test_bisimilar_on_resolved_systems():
    p1 = apply_environment(build_pts(seq(LEFT)), ENV)
    p2 = apply_environment(build_pts(seq(LOOP)), ENV)
    assert bisimilar(p1, p2) and bisimilar(p2, p1)


def test_equivalent_under_examples():
    assert equivalent_under(seq(LEFT), seq(LOOP), ENV, 4)
    assert equivalent_under(seq("prb;a;!"), seq("#1;a;!"), ENV, 4)
    assert not equivalent_under(seq("a;!"), seq("a;a;!"), ENV, 4)


def test_gu_pair_under_all_true_environment():
    left, right = golden("stride_left.pga"), golden("stride_right.pga")
    assert bisimilar_sequences(left, right, ENV)
    assert trace_distribution(build_pts(left), ENV, 8) == trace_distribution(build_pts(right), ENV, 8)
