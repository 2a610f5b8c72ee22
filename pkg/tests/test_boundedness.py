import itertools
import re

import pytest
from hypothesis import given, settings, strategies as st

from tracebound.boundedness import (Bounded, BoundedExpression, CloverSearch, ForkWitness, Unbounded, Unknown,
                                    check_trace_inclusion, clover, count_expressions, decide_boundedness,
                                    enumerate_bounded_expressions, expr_to_complement_dfa,
                                    find_concretization, find_increasing_fork, pumping_word, simplify_words)
from tracebound.core import AcceleratedWord, ProductSystem, UsageError, bfs_configs, bfs_traces
from tracebound.counters import OMEGA
from tracebound.fixtures import ackermann, fig1, fig1_control, fig3

OM = OMEGA


def test_expression_basics():
    e = BoundedExpression((("a", "b"), ("c",)))
    assert str(e) == "(a b)* (c)*"
    assert e.size == 3
    assert e.matches(("a", "b", "a", "b", "c")) and e.matches(())
    assert not e.matches(("c", "a", "b"))
    with pytest.raises(UsageError):
        BoundedExpression(())
    with pytest.raises(UsageError):
        BoundedExpression(((),))


def test_simplify_drops_repeats():
    assert simplify_words([("a",), ("a",), ("b",), (), ("a",)]) == [("a",), ("b",), ("a",)]


@pytest.mark.parametrize("k,size", [(1, 1), (1, 4), (2, 1), (2, 3), (3, 2), (3, 3)])
def test_enumeration_counts(k, size):
    letters = "abc"[:k]
    got = [e for e in itertools.islice(enumerate_bounded_expressions(letters), 2000) if e.size == size]
    assert len(got) == count_expressions(k, size)
    assert len(set(got)) == len(got)


def test_enumeration_is_size_ordered():
    sizes = [e.size for e in itertools.islice(enumerate_bounded_expressions("ab"), 300)]
    assert sizes == sorted(sizes)


words = st.lists(st.text("abc", min_size=1, max_size=3), min_size=1, max_size=4)


@settings(max_examples=120, deadline=None, derandomize=True)
@given(ws=words)
def test_complement_dfa_matches_regex(ws):
    expr = BoundedExpression(tuple(tuple(w) for w in ws))
    pattern = re.compile("".join(f"(?:{w})*" for w in ws))
    dfa = expr_to_complement_dfa(expr, "abc")
    for n in range(7):
        for w in itertools.product("abc", repeat=n):
            assert dfa.accepts(w) == (pattern.fullmatch("".join(w)) is None)
            assert expr.matches(w) == (pattern.fullmatch("".join(w)) is not None)


def test_inclusion_on_fig3():
    s = fig3()
    yes = BoundedExpression((("a",), ("b",), ("c", "d")))
    assert not check_trace_inclusion(s, yes)  # "a b d" escapes
    full = BoundedExpression((("a",), ("b",), ("c",), ("d",), ("c",), ("d",)))
    assert not check_trace_inclusion(s, full)


def test_inclusion_on_controlled_fig1():
    p = ProductSystem(fig1(2), fig1_control(2))
    e = BoundedExpression((("g",), ("c",), ("i",), ("e", "i"), ("e",)))
    assert check_trace_inclusion(p, e)
    for w in bfs_traces(p, 9):
        assert e.matches(w)


def test_fig3_fork():
    s = fig3()
    fork, _ = find_increasing_fork(s, 10_000)
    assert fork.check(s) is None
    assert fork.s == (0, 1, OM, 0)
    assert {fork.a_branch.first_letter(), fork.b_branch[0]} == {"c", "d"}


def test_fork_tampering_detected():
    s = fig3()
    fork, _ = find_increasing_fork(s, 10_000)
    bad = ForkWitness(fork.stem, fork.a_branch, ("a",), fork.s, fork.s_a, fork.s_b)
    assert bad.check(s) is not None
    bad = ForkWitness(AcceleratedWord.plain(("b",)), fork.a_branch, fork.b_branch, fork.s, fork.s_a, fork.s_b)
    assert bad.check(s) == "stem does not reach the pivot"


def test_fork_json_roundtrip():
    s = fig3()
    fork, _ = find_increasing_fork(s, 10_000)
    again = ForkWitness.from_json(s, fork.to_json(s))
    assert again == fork


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fig3_pumping(m):
    s = fig3()
    fork, _ = find_increasing_fork(s, 10_000)
    counts = find_concretization(s, pumping_word(fork, m))
    assert counts is not None
    w = pumping_word(fork, m).concretize(counts)
    assert s.run(s.initial, w) is not None


def test_fig1_alone_unbounded():
    v = decide_boundedness(fig1(2))
    assert isinstance(v, Unbounded)
    f = v.fork
    assert f.check(fig1(2)) is None
    assert f.a_branch.letters() == ("e", "i")
    assert f.b_branch == ("i", "e")


def test_fig1_controlled_bounded():
    v = decide_boundedness(ProductSystem(fig1(2), fig1_control(2)))
    assert isinstance(v, Bounded)
    assert v.transcript["included"]


@pytest.mark.parametrize("m,n", [(0, 1), (0, 2), (1, 1)])
def test_ackermann_bounded(m, n):
    v = decide_boundedness(ackermann(m, n))
    assert isinstance(v, Bounded)


def test_clover_fig3_dominates_bfs():
    s = fig3()
    res = clover(s)
    assert not res.partial
    assert sorted(res.basis) == [(0, 1, OM, OM), (1, 0, OM, 0)]
    for c in bfs_configs(s, 8):
        assert any(s.leq(c, b) for b in res.basis)


def test_budget_exhaustion_is_unknown():
    v = decide_boundedness(ackermann(1, 1), node_budget=3, expr_budget=2, chunk=1)
    assert isinstance(v, Unknown)
    assert v.report["reason"] == "budget exhausted"


def test_clover_candidate_is_a_real_cover():
    p = ProductSystem(fig1(2), fig1_control(2))
    c = CloverSearch(p)
    c.run(10_000)
    e = c.candidate_expression()
    for w in bfs_traces(p, 8):
        assert e.matches(w)
