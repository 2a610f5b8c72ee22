import random

import pytest

from ltl_oracle import eval_lasso, lts_net, rabin_product_empty, random_formula
from tracebound.boundedness import Bounded, Unknown, decide_boundedness
from tracebound.core import Alphabet, DRabin, ModelError, PreconditionError, ProductSystem
from tracebound.fixtures import fig1, fig1_control, fig3
from tracebound.omega import (LtlSyntaxError, build_stage_systems, format_ltl, is_coflat, ltl_to_dra,
                              ltl_to_nba, model_check_ltl, nba_to_dra, omega_language_empty, parse_ltl)

L3 = ("a", "b", "c")


@pytest.mark.parametrize("text,expected", [
    ("G F rcv", ("G", ("F", ("atom", "rcv")))),
    ("a U b U c", ("U", ("atom", "a"), ("U", ("atom", "b"), ("atom", "c")))),
    ("a -> b -> c", ("imp", ("atom", "a"), ("imp", ("atom", "b"), ("atom", "c")))),
    ("!a & b | c", ("or", ("and", ("not", ("atom", "a")), ("atom", "b")), ("atom", "c"))),
    ('"X" R c_M!0', ("R", ("atom", "X"), ("atom", "c_M!0"))),
    ("true U false", ("U", ("true",), ("false",))),
])
def test_parse(text, expected):
    assert parse_ltl(text) == expected
    assert parse_ltl(format_ltl(expected)) == expected


@pytest.mark.parametrize("text,pos", [("a &", 3), ("(a", 2), ("a b", 2), ("a # b", 2), ("", 0)])
def test_parse_errors_have_positions(text, pos):
    with pytest.raises(LtlSyntaxError) as err:
        parse_ltl(text)
    assert err.value.pos == pos


@pytest.mark.parametrize("text,flat", [
    ("!(a U G b)", True),
    ("!(X a & G b)", True),
    ("!(G F a)", False),
    ("!((a & b) U c)", False),
    ("!(X a)", False),
    ("!(X a | G b)", False),
    ("a U G b", False),
])
def test_coflat(text, flat):
    assert is_coflat(text) == flat


def test_unknown_letters_rejected():
    with pytest.raises(ModelError):
        ltl_to_nba("G z", L3)


def _formulas(n, seed):
    r = random.Random(seed)
    return [random_formula(r, L3, 3) for _ in range(n)]


def _lassos(r, n):
    return [([r.choice(L3) for _ in range(r.randint(0, 3))], [r.choice(L3) for _ in range(r.randint(1, 3))])
            for _ in range(n)]


@pytest.mark.parametrize("f", _formulas(80, 11), ids=format_ltl)
def test_automata_match_lasso_semantics(f):
    nba = ltl_to_nba(f, L3)
    dra = nba_to_dra(nba)
    for u, v in _lassos(random.Random(repr(f)), 25):
        expect = eval_lasso(f, u, v)
        assert nba.accepts_lasso(u, v) == expect
        assert dra.accepts_lasso(u, v) == expect


def _finite_cases(count, seed):
    r = random.Random(seed)
    out = []
    while len(out) < count:
        n = r.randint(1, 4)
        lts = {(q, a): r.randrange(n) for q in range(n) for a in L3 if r.random() < 0.4}
        if not lts:
            continue
        f = random_formula(r, L3, 2)
        net = lts_net(lts, range(n), 0)
        dra = ltl_to_dra(f, L3)
        if not isinstance(decide_boundedness(ProductSystem(net, _restrict(dra, net))), Bounded):
            continue
        out.append((lts, n, f))
    return out


def _restrict(dra, sys):
    keep = Alphabet(tuple(a for a in dra.alphabet if a in sys.alphabet))
    return DRabin(dra.states, dra.initial, keep, {k: v for k, v in dra.delta.items() if k[1] in keep},
                  dra.pairs).reachable()


FINITE = _finite_cases(100, 3)


@pytest.mark.parametrize("lts,n,f", FINITE)
def test_emptiness_matches_lasso_oracle(lts, n, f):
    net = lts_net(lts, range(n), 0)
    dra = ltl_to_dra(f, L3)
    assert omega_language_empty(net, dra) == rabin_product_empty(lts, 0, dra)


def test_finite_suite_has_both_answers():
    answers = {rabin_product_empty(lts, 0, ltl_to_dra(f, L3)) for lts, n, f in FINITE}
    assert answers == {True, False}


def test_stage_one_bounded_when_product_is():
    p = ProductSystem(fig1(2), fig1_control(2))
    dra = ltl_to_dra(parse_ltl("!(G F g)"), p.alphabet).reachable()
    prod = ProductSystem(p, dra)
    assert isinstance(decide_boundedness(prod), Bounded)
    for i, pair in enumerate(dra.pairs):
        s1, _, _ = build_stage_systems(prod, pair, i)
        assert isinstance(decide_boundedness(s1), Bounded)


def test_empty_e_set_leaves_traces_alone():
    p = ProductSystem(fig1(2), fig1_control(2))
    dra = ltl_to_dra(parse_ltl("G F g"), p.alphabet).reachable()
    prod = ProductSystem(p, dra)
    s1, _, _ = build_stage_systems(prod, (frozenset(), frozenset()), 0)
    for w in [("g", "g", "c", "i", "i"), ("g", "c", "i", "e", "i")]:
        assert (s1.run(s1.initial, w) is None) == (prod.run(prod.initial, w) is None)


def test_unbounded_product_is_a_precondition_error():
    with pytest.raises(PreconditionError):
        model_check_ltl(fig3(), "G F a")


def test_model_check_controlled_fig1():
    p = ProductSystem(fig1(2), fig1_control(2))
    assert model_check_ltl(p, "F c") is False  # g forever never calls
    assert model_check_ltl(p, "G F c") is False


def test_fork_through_limit_is_not_a_run():
    # only g^omega is infinite, but the stage system forks at a configuration
    # with omega tokens in n; no concrete lasso exists, so no verdict is given
    p = ProductSystem(fig1(2), fig1_control(2))
    r = model_check_ltl(p, "G g")
    assert isinstance(r, Unknown)
    assert r.report["reason"] == "stage fork without a concrete good lasso"
