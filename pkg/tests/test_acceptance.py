"""End-to-end acceptance checks, one marker per criterion.

The terminal summary prints ``criterion N: PASS`` or ``FAIL`` for each.
"""
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

from tracebound import core
from tracebound.boundedness import (Bounded, Unbounded, clover, decide_boundedness, find_concretization,
                                    iter_forks, pumping_word)
from tracebound.commutation import decide_bounded_modulo, diamond_sufficient_check
from tracebound.core import ProductSystem, bfs_configs
from tracebound.counters import OMEGA
from tracebound.fixtures import (ABP_FAIRNESS, ABP_PHI, abp, abp_independence, abp_unfolded, ackermann, fig1,
                                 fig1_control, fig3)
from tracebound.omega import model_check_ltl

ROOT = Path(__file__).resolve().parent.parent


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    r = fn(*args, **kw)
    return r, time.perf_counter() - t0


@pytest.mark.criterion(1)
def test_fig3_unbounded_fork():
    s = fig3()
    v, secs = timed(decide_boundedness, s)
    assert secs < 5
    assert isinstance(v, Unbounded)
    f = v.fork
    omega_at = [i for i, x in enumerate(f.s) if x == OMEGA]
    assert omega_at == [s.places.index("p3")]
    assert {f.a_branch.first_letter(), f.b_branch[0]} == {"c", "d"}
    assert f.check(s) is None
    for m in (1, 2, 3):
        assert find_concretization(s, pumping_word(f, m)) is not None


@pytest.mark.criterion(2)
def test_fig1_alone_unbounded():
    s = fig1(2)
    v, secs = timed(decide_boundedness, s, 10**6)
    assert secs < 60
    assert isinstance(v, Unbounded)
    f = v.fork
    assert f.check(s) is None
    assert {f.a_branch.first_letter(), f.b_branch[0]} == {"e", "i"}
    assert set(f.a_branch.letters()) == set(f.b_branch) == {"e", "i"}


@pytest.mark.criterion(2)
def test_fig1_synchronized_bounded():
    p = ProductSystem(fig1(2), fig1_control(2))
    v, secs = timed(decide_boundedness, p, 10**6)
    assert secs < 60
    assert isinstance(v, Bounded)
    assert v.transcript["included"]


@pytest.mark.criterion(3)
def test_clover_dominates_bfs():
    s = fig3()
    res, secs = timed(clover, s)
    assert secs < 5
    assert not res.partial
    for c in bfs_configs(s, 8):
        assert any(s.leq(c, b) for b in res.basis), c


@pytest.mark.criterion(4)
def test_abp_raw_pivots():
    s = abp()
    pivots = []
    for f in iter_forks(s):
        assert f.check(s) is None
        if f.s not in pivots:
            pivots.append(f.s)
        if len(pivots) == 4:
            break
    assert len(pivots) == 4
    assert {c[0] for c in pivots} <= {"10", "12", "32", "30"}


@pytest.mark.criterion(4)
def test_abp_diamond():
    assert diamond_sufficient_check(abp(), abp_independence())


@pytest.mark.criterion(4)
def test_abp_two_sessions_bounded_modulo():
    v = decide_bounded_modulo(abp_unfolded(2), abp_independence())
    assert isinstance(v, Bounded)


@pytest.mark.slow
@pytest.mark.criterion(4)
def test_abp_ltl():
    phi = f"{ABP_FAIRNESS} -> {ABP_PHI}"
    r, secs = timed(model_check_ltl, abp_unfolded(2), phi, abp_independence(), closure_asserted=True)
    assert r is True
    assert secs < 600


ORACLE_SUITES = [
    ("tests/test_counters.py::test_accelerate_affine_matches_iteration", 1),
    ("tests/test_channels.py::test_product_leq_matches_languages", 200),
    ("tests/test_channels.py::test_write_matches_word_oracle", 150),
    ("tests/test_channels.py::test_read_matches_word_oracle", 150),
    ("tests/test_channels.py::test_accelerate_matches_iteration", 220),
    ("tests/test_coverability.py::test_backward_matches_karp_miller", 500),
    ("tests/test_omega.py::test_emptiness_matches_lasso_oracle", 100),
    ("tests/test_commutation.py::test_automaton_accepts_exactly_normal_forms", 1),
    ("tests/test_commutation.py::test_fnf_is_the_unique_accepted_class_member", 1),
    ("tests/test_commutation.py::test_fnf_of_aab_power_tends_to_ab_power", 5),
]
_suite_run = {}


def _run_oracles():
    if not _suite_run:
        p = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "-rN"]
                           + [n for n, _ in ORACLE_SUITES],
                           capture_output=True, text=True, cwd=ROOT, timeout=1800)
        _suite_run["proc"] = p
    return _suite_run["proc"]


@pytest.mark.criterion(5)
def test_oracle_suites():
    p = _run_oracles()
    assert p.returncode == 0, p.stdout[-3000:]
    m = re.search(r"(\d+) passed", p.stdout)
    assert m and int(m.group(1)) == sum(k for _, k in ORACLE_SUITES)
    assert "failed" not in p.stdout.splitlines()[-1]


@pytest.mark.criterion(6)
def test_control_checks_never_fire():
    assert core.CONTROL_CHECKS
    # exercise both bound kinds in this process too
    decide_boundedness(fig3())
    decide_bounded_modulo(abp_unfolded(1), abp_independence())
    stats = core.control_stats
    assert stats["affine.step"] > 0 and stats["lcs.step"] > 0
    assert not any(v for k, v in stats.items() if k.endswith(":violations"))
    m = re.search(r"control checks: (\d+) evaluated, (\d+) violations", _run_oracles().stdout)
    assert m and int(m.group(1)) > 0 and int(m.group(2)) == 0


@pytest.mark.criterion(7)
def test_ackermann_a0():
    s = ackermann(0, 2)
    end = s.run(s.initial, ("a", "t0", "t0", "t1") + ("b",) * 5 + ("t4",))
    assert end[s.places.index("out")] == 5
    assert not s.enabled(end)
    v, secs = timed(decide_boundedness, s)
    assert secs < 30
    assert isinstance(v, Bounded)
