import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from tracebound.core import ModelError, NondeterminismError, UsageError
from tracebound.counters import (OMEGA, AffineTransition, CounterSystem, NetTransition as T,
                                 accelerate_affine, compile_net, pred_basis_affine, weight)
from tracebound.fixtures import ackermann, fig1, fig3, transfer_sum_net

# (label, needs, delta) written out by hand, independent of compile_net
FIG3_ARCS = {
    "a": ((1, 0, 0, 0), (0, 0, 1, 0)),
    "b": ((1, 0, 0, 0), (-1, 1, 0, 0)),
    "c": ((0, 1, 1, 0), (0, 0, -1, 0)),
    "d": ((0, 1, 1, 0), (0, 0, -1, 1)),
}
# places: main, piped_multirpc, n, P-recv+sent, recv-sent
FIG1_ARCS = {
    "g": ((1, 0, 0, 0, 0), (0, 0, 1, 0, 0)),
    "c": ((1, 0, 0, 0, 0), (-1, 1, 0, 0, 0)),
    "e": ((0, 1, 0, 0, 1), (0, 0, 0, 1, -1)),
    "i": ((0, 1, 1, 1, 0), (0, 0, -1, -1, 1)),
}


@pytest.mark.parametrize("net,arcs", [(fig3(), FIG3_ARCS), (fig1(2), FIG1_ARCS)])
def test_fixture_fidelity(net, arcs):
    assert set(net.alphabet) == set(arcs)
    for t in net.transitions:
        need, delta = arcs[t.label]
        assert t.guard == need
        for X in itertools.product(range(3), repeat=net.dim):
            expect = None
            if all(x >= g for x, g in zip(X, need)):
                expect = tuple(x + d for x, d in zip(X, delta))
            assert t.apply(X) == expect


def test_reset_and_transfer_semantics():
    ts = [T("r", pre={"p": 1}, post={"q": 1}, resets=frozenset({"p"})),
          T("t", pre={"q": 1}, transfers={"p": "q"})]
    s = compile_net(("p", "q"), ts, (3, 0))
    assert s.step((3, 0), "r") == (0, 1)
    # the token taken by pre is not transferred
    assert s.step((2, 2), "t") == (0, 3)
    tr = transfer_sum_net()
    assert tr.step((3, 1), "t") == (0, 4)


def test_reset_and_transfer_on_same_place_rejected():
    with pytest.raises(ModelError):
        compile_net(("p", "q"), [T("x", resets=frozenset({"p"}), transfers={"p": "q"})], (0, 0))


def test_unknown_place_rejected():
    with pytest.raises(ModelError):
        compile_net(("p",), [T("x", pre={"zz": 1})], (0,))


def test_negative_matrix_rejected():
    with pytest.raises(ModelError):
        AffineTransition("x", (0,), ((-1,),), (0,))


def test_nondeterminism_is_reported():
    ts = [AffineTransition("a", (0,), ((1,),), (1,)), AffineTransition("a", (0,), ((1,),), (2,))]
    s = CounterSystem(ts, (0,))
    with pytest.raises(NondeterminismError):
        s.step((0,), "a")


def test_shared_label_with_disjoint_guards_is_fine():
    ts = [AffineTransition("a", (1, 0), ((0, 0), (0, 1)), (0, 1)),
          AffineTransition("a", (0, 1), ((1, 0), (0, 0)), (1, 0))]
    s = CounterSystem(ts, (1, 0))
    assert s.run((1, 0), ("a", "a")) == (1, 0)


def test_fig3_acceleration_pumps_p3():
    s = fig3()
    assert accelerate_affine(s, s.initial, ("a",)) == (1, 0, OMEGA, 0)
    assert accelerate_affine(s, s.initial, ("b",)) is None  # b(X) is not above X


def test_acceleration_needs_loop_word():
    with pytest.raises(UsageError):
        accelerate_affine(fig3(), (1, 0, 0, 0), ())


def test_ackermann_a0_weakly_computes_2n_plus_1():
    s = ackermann(0, 2)
    w = ("a", "t0", "t0", "t1") + ("b",) * 5 + ("t4",)
    end = s.run(s.initial, w)
    assert end[s.places.index("out")] == 5
    assert not s.enabled(end)


# -- oracle: brute-force iteration of the loop -----------------------------


def _iterate_oracle(sys, X, u, N=40):
    Z = [tuple(X)]
    for _ in range(N):
        nxt = sys.run(Z[-1], u)
        if nxt is None:
            return None
        Z.append(nxt)
    if not all(a <= b for a, b in zip(Z[0], Z[1])):
        return None
    return tuple(OMEGA if Z[N][j] > Z[N // 2][j] else Z[N][j] for j in range(len(X)))


def _random_system(r: random.Random, k):
    ts = []
    for label in "ab":
        A = tuple(tuple(r.choice((0, 0, 1, 1, 2)) for _ in range(k)) for _ in range(k))
        b = tuple(r.randint(-1, 2) for _ in range(k))
        G = tuple(r.randint(0, 2) for _ in range(k))
        ts.append(AffineTransition(label, G, A, b))
    return CounterSystem(ts, tuple(r.randint(0, 2) for _ in range(k)))


@settings(max_examples=200, deadline=None, derandomize=True)
@given(seed=st.integers(0, 10**9), k=st.integers(1, 3))
def test_accelerate_affine_matches_iteration(seed, k):
    r = random.Random(seed)
    s = _random_system(r, k)
    u = tuple(r.choice("ab") for _ in range(r.randint(1, 3)))
    X = tuple(r.randint(0, 2) for _ in range(k))
    assert accelerate_affine(s, X, u) == _iterate_oracle(s, X, u)


@settings(max_examples=150, deadline=None, derandomize=True)
@given(seed=st.integers(0, 10**9), k=st.integers(1, 3))
def test_pred_basis_affine_matches_box_search(seed, k):
    r = random.Random(seed)
    t = _random_system(r, k).transitions[0]
    m = tuple(r.randint(0, 3) for _ in range(k))
    basis = pred_basis_affine(t, m)
    for X in itertools.product(range(6), repeat=k):
        Y = t.apply(X)
        fires = Y is not None and all(y >= mm for y, mm in zip(Y, m))
        assert fires == any(all(b <= x for b, x in zip(B, X)) for B in basis), (X, basis)


def test_pred_basis_rejects_limit_targets():
    t = fig3().transitions[0]
    with pytest.raises(UsageError):
        pred_basis_affine(t, (0, 0, OMEGA, 0))


def test_weight_ignores_omega():
    assert weight((3, OMEGA, 7)) == 7
    assert weight((OMEGA,)) == 0
    assert math.isinf(OMEGA)


def test_config_json_uses_omega_string():
    s = fig3()
    X = (1, 0, OMEGA, 0)
    assert s.config_to_json(X) == [1, 0, "omega", 0]
    assert s.config_from_json([1, 0, "omega", 0]) == X
