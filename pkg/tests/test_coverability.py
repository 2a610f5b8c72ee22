import random

import pytest

from tracebound.core import UnsupportedModelError, UsageError
from tracebound.counters import OMEGA, NetTransition as T, compile_net
from tracebound.coverability import (UpSet, backward_coverable, check_determinism, language_empty,
                                     minimize, saturate)
from tracebound.fixtures import abp, fig1, fig3


def karp_miller(pre, post, m0):
    """Forward coverability tree for a plain Petri net (list of markings)."""
    nodes = []
    todo = [(tuple(m0), [])]
    while todo:
        m, anc = todo.pop()
        nodes.append(m)
        for p, q in zip(pre, post):
            if any(x < need for x, need in zip(m, p)):
                continue
            n = [x - a + b for x, a, b in zip(m, p, q)]
            for old in anc + [m]:
                if all(o <= x for o, x in zip(old, n)):
                    n = [OMEGA if o < x else x for o, x in zip(old, n)]
            n = tuple(n)
            if n in anc or n == m:
                continue
            todo.append((n, anc + [m]))
    return nodes


def _random_net(r):
    k = 3
    pre, post, ts = [], [], []
    for i in range(3):
        p = [r.randint(0, 1) for _ in range(k)]
        q = [r.randint(0, 2) for _ in range(k)]
        pre.append(p)
        post.append(q)
        ts.append(T(f"t{i}", pre={f"p{j}": v for j, v in enumerate(p) if v},
                    post={f"p{j}": v for j, v in enumerate(q) if v}))
    m0 = [r.randint(0, 1) for _ in range(k)]
    return compile_net(("p0", "p1", "p2"), ts, tuple(m0)), pre, post, m0


CASES = []
_r = random.Random(77)
for _ in range(500):
    CASES.append((_r.randrange(10**9), tuple(_r.randint(0, 3) for _ in range(3))))


@pytest.mark.parametrize("seed,target", CASES)
def test_backward_matches_karp_miller(seed, target):
    net, pre, post, m0 = _random_net(random.Random(seed))
    km = karp_miller(pre, post, m0)
    expect = any(all(t <= x for t, x in zip(target, m)) for m in km)
    assert backward_coverable(net, net.initial, [target]) == expect


def test_fig3_coverability():
    s = fig3()
    assert backward_coverable(s, s.initial, [(0, 1, 5, 3)])
    assert not backward_coverable(s, s.initial, [(1, 1, 0, 0)])


def test_upset_membership():
    s = fig3()
    up = UpSet([(0, 1, 0, 0)])
    assert up.contains(s, (0, 2, 3, 0))
    assert not up.contains(s, (1, 0, 0, 0))
    with pytest.raises(TypeError):
        (0, 1, 0, 0) in up


def test_minimize_keeps_minimal_elements():
    s = fig3()
    assert sorted(minimize(s, [(1, 1, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0)])) == [(0, 1, 0, 0), (1, 0, 0, 0)]


def test_limit_targets_rejected():
    s = fig3()
    with pytest.raises(UsageError):
        saturate(s, s.initial, [(0, 0, OMEGA, 0)])


@pytest.mark.parametrize("target,expect", [((0, 0, 0, 0, 2), True), ((0, 0, 0, 0, 3), False),
                                           ((0, 1, 4, 0, 2), True)])
def test_cover_prune_keeps_answers(target, expect):
    from tracebound.boundedness import clover, cover_prune

    s = fig1(2)  # P-recv+sent plus recv-sent stays 2
    prune = cover_prune(s, clover(s).basis)
    full = saturate(s, s.initial, [target], early_exit=False)
    pruned = saturate(s, s.initial, [target], prune=prune, early_exit=False)
    assert full.covered == pruned.covered == expect
    assert len(pruned.basis) <= len(full.basis)


def test_language_empty_on_finals():
    s = fig3()
    assert not language_empty(s, [(0, 0, 0, 1)])
    assert language_empty(s, [(0, 0, 0, 0), (2, 0, 0, 0)][1:])


def test_check_determinism_counters_and_lcs():
    s = fig3()
    assert check_determinism(s)
    ts = [T("x", pre={"p": 1}, post={"q": 1}), T("x", pre={"q": 1}, post={"p": 1})]
    ok = compile_net(("p", "q"), ts, (1, 0))
    assert check_determinism(ok)
    bad = compile_net(("p", "q"), ts, (1, 1))
    assert not check_determinism(bad)
    assert check_determinism(abp())


def test_check_determinism_needs_domains():
    from tracebound.fixtures import fig1_control

    with pytest.raises(UnsupportedModelError):
        check_determinism(fig1_control())


def test_lcs_coverability():
    s = abp()
    assert backward_coverable(s, s.initial, [("10", (("0", "0", "0"), ()))])
    assert not backward_coverable(s, s.initial, [("11", ((), ("0",)))])
