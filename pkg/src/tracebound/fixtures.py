"""Hand-encoded systems used by the tests, the demos and ``fixture:NAME`` models."""
from __future__ import annotations

from .channels import LcsRule, LcsSystem
from .core import Alphabet, Dfa, ModelError
from .counters import CounterSystem, NetTransition as T, compile_net


def fig3() -> CounterSystem:
    """Four places, an a-loop pumping p3 which c and d later consume."""
    places = ("p1", "p2", "p3", "p4")
    ts = [
        T("a", reads=frozenset({"p1"}), post={"p3": 1}),
        T("b", pre={"p1": 1}, post={"p2": 1}),
        T("c", pre={"p3": 1}, reads=frozenset({"p2"})),
        T("d", pre={"p3": 1}, post={"p4": 1}, reads=frozenset({"p2"})),
    ]
    return compile_net(places, ts, (1, 0, 0, 0), name="fig3")


def fig1(P: int = 2, gray: bool = True, n: int = 3) -> CounterSystem:
    """Piped RPC client.  ``gray`` adds the generator loop g and the call c.

    Places: main, piped_multirpc, n, P-recv+sent, recv-sent.
    """
    if P < 1:
        raise ModelError("P must be positive")
    core_ts = [
        T("e", pre={"recv-sent": 1}, post={"P-recv+sent": 1}, reads=frozenset({"piped_multirpc"})),
        T("i", pre={"n": 1, "P-recv+sent": 1}, post={"recv-sent": 1}, reads=frozenset({"piped_multirpc"})),
    ]
    if gray:
        places = ("main", "piped_multirpc", "n", "P-recv+sent", "recv-sent")
        ts = [
            T("g", reads=frozenset({"main"}), post={"n": 1}),
            T("c", pre={"main": 1}, post={"piped_multirpc": 1}),
        ] + core_ts
        return compile_net(places, ts, (1, 0, 0, P, 0), name=f"fig1(P={P})")
    places = ("piped_multirpc", "n", "P-recv+sent", "recv-sent")
    return compile_net(places, core_ts, (1, n, P, 0), name=f"fig1-core(P={P},n={n})")


def fig1_control(P: int = 2) -> Dfa:
    """DFA for g* c i^P (e i)* e^P; every state is accepting (prefix filter)."""
    states = ["G"] + [f"I{j}" for j in range(P + 1)] + [f"E{j}" for j in range(1, P + 1)]
    delta = {("G", "g"): "G", ("G", "c"): "I0"}
    for j in range(P):
        delta[(f"I{j}", "i")] = f"I{j + 1}"
    delta[(f"I{P}", "e")] = "E1"
    delta[("E1", "i")] = f"I{P}"
    for j in range(1, P):
        delta[(f"E{j}", "e")] = f"E{j + 1}"
    return Dfa(states, "G", Alphabet(("g", "c", "e", "i")), delta, states)


def ackermann(m: int = 0, n: int = 2) -> CounterSystem:
    """Net weakly computing A'_m(n); only the innermost a and b keep short names."""
    if not 0 <= m <= 2:
        raise ModelError("ackermann fixture supports m in 0..2")
    if n < 0:
        raise ModelError("n must be natural")
    places = ["out", "p0", "p1", "p2"] + [f"{x}{j}" for j in range(m + 1) for x in ("in", "on", "off")]
    ts = [
        T("a", pre={"on0": 1}, post={"p0": 1}),
        T("t0", pre={"in0": 1}, post={"p1": 2}, reads=frozenset({"p0"})),
        T("t1", pre={"p0": 1}, post={"p1": 1, "p2": 1}),
        T("b", pre={"p1": 1}, post={"out": 1}, reads=frozenset({"p2"})),
        T("t4", pre={"p2": 1}, post={"off0": 1}),
    ]
    for j in range(m):
        up = j + 1
        ts += [
            T(f"start{up}", pre={f"on{up}": 1}, post={f"on{j}": 1}),
            T(f"back{up}", pre={"out": 1}, post={f"in{j}": 1}, reads=frozenset({f"off{j}"})),
            T(f"again{up}", pre={f"off{j}": 1, f"in{up}": 1}, post={f"on{j}": 1}),
            T(f"stop{up}", pre={f"off{j}": 1}, post={f"off{up}": 1}),
        ]
    init = [0] * len(places)
    init[places.index(f"in{m}")] = n
    init[places.index(f"on{m}")] = 1
    return compile_net(places, ts, tuple(init), name=f"ackermann(m={m},n={n})")


# -- alternating bit protocol -------------------------------------------------

SENDER = [
    (0, 1, None, "nop", None, "snd"),
    (1, 1, "c_M", "!", "0", "c_M!0"),
    (1, 2, "c_A", "?", "0", "c_A?0"),
    (2, 3, None, "nop", None, "snd"),
    (3, 3, "c_M", "!", "1", "c_M!1"),
    (3, 0, "c_A", "?", "1", "c_A?1"),
]
RECEIVER = [
    (0, 0, "c_A", "!", "1", "c_A!1"),
    (0, 1, "c_M", "?", "0", "c_M?0"),
    (1, 2, None, "nop", None, "rcv"),
    (2, 2, "c_A", "!", "0", "c_A!0"),
    (2, 3, "c_M", "?", "1", "c_M?1"),
    (3, 0, None, "nop", None, "rcv"),
]
ABP_LETTERS = ("snd", "rcv", "c_M!0", "c_M!1", "c_M?0", "c_M?1", "c_A!0", "c_A!1", "c_A?0", "c_A?1")
SENDER_LETTERS = frozenset(r[5] for r in SENDER)


def _abp(sender_states, sender_rules, init_sender, name):
    states = [f"{s}{r}" for s in sender_states for r in range(4)]
    rules = []
    for s0, s1, ch, op, msg, label in sender_rules:
        for r in range(4):
            rules.append(LcsRule(f"{s0}{r}", f"{s1}{r}", ch, op, msg, label))
    for s in sender_states:
        for r0, r1, ch, op, msg, label in RECEIVER:
            rules.append(LcsRule(f"{s}{r0}", f"{s}{r1}", ch, op, msg, label))
    rules.sort(key=lambda r: ABP_LETTERS.index(r.label))
    return LcsSystem(states, f"{init_sender}0", ("c_M", "c_A"), ("0", "1"), rules, name=name)


def abp() -> LcsSystem:
    """Sender and receiver synchronized into one LCS; control states read ``SR``."""
    return _abp(range(4), SENDER, 0, "abp")


def abp_unfolded(sessions: int = 2) -> LcsSystem:
    """ABP whose sender halts after ``sessions`` traversals of its main loop.

    Sender states are ``k:i`` for session ``k``; the receiver is untouched.
    """
    if sessions < 1:
        raise ModelError("need at least one session")
    sstates = [f"{k}:{i}" for k in range(sessions) for i in range(4)] + [f"{sessions}:0"]
    rules = []
    for k in range(sessions):
        for s0, s1, ch, op, msg, label in SENDER:
            dst = f"{k + 1}:0" if (s0, s1) == (3, 0) else f"{k}:{s1}"
            rules.append((f"{k}:{s0}", dst, ch, op, msg, label))
    return _abp(sstates, rules, "0:0", f"abp_unfolded({sessions})")


def abp_control_dfa(P: int = 2) -> Dfa:
    """Counts completed sender loops; after ``P`` of them sender letters block."""
    states = list(range(P + 1))
    delta = {}
    for k in states:
        for a in ABP_LETTERS:
            if a == "c_A?1":
                if k < P:
                    delta[(k, a)] = k + 1
            elif k < P or a not in SENDER_LETTERS:
                delta[(k, a)] = k
    return Dfa(states, 0, Alphabet(ABP_LETTERS), delta, states)


def abp_independence() -> list:
    """Writes of the two processes commute, and so do their reads."""
    pairs = []
    for x in "01":
        for y in "01":
            pairs.append((f"c_M!{x}", f"c_A!{y}"))
            pairs.append((f"c_A?{x}", f"c_M?{y}"))
    return pairs + [(b, a) for a, b in pairs]


ABP_PHI = "G(snd -> X(!snd U rcv))"
ABP_FAIRNESS = "G F rcv"


def transfer_sum_net() -> CounterSystem:
    """Small transfer net: t moves everything from p to q, u refills p."""
    ts = [
        T("t", transfers={"p": "q"}),
        T("u", pre={"q": 1}, post={"p": 1}),
        T("v", pre={"p": 1}, post={"q": 1}),
    ]
    return compile_net(("p", "q"), ts, (3, 1), name="transfer")


FIXTURES = {
    "fig3": fig3,
    "fig1": fig1,
    "fig1_control": fig1_control,
    "ackermann": ackermann,
    "abp": abp,
    "abp_unfolded": abp_unfolded,
    "abp_control_dfa": abp_control_dfa,
    "transfer": transfer_sum_net,
}


def load_fixture(name: str, **params):
    try:
        fn = FIXTURES[name]
    except KeyError:
        raise ModelError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for fixture {name!r}: {exc}") from None
