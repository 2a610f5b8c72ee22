"""Functional lossy channel systems over products of SRE atoms.

An atom is either a message letter ``"a"`` standing for ``(a + eps)`` or a
``frozenset`` ``A`` standing for ``A*``.  A product is a tuple of atoms.  A
product made of letters only is just a word, so plain channel contents and
limit contents share one representation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from . import core
from .core import Alphabet, ModelError, NondeterminismError, System, UsageError


def is_star(atom) -> bool:
    return isinstance(atom, frozenset)


def star(*letters) -> frozenset:
    s = frozenset(letters)
    if not s:
        raise ModelError("a star atom needs a non-empty letter set")
    return s


def atom_letters(atom) -> frozenset:
    return atom if is_star(atom) else frozenset((atom,))


def is_word(p) -> bool:
    return not any(is_star(x) for x in p)


def _absorbs(x, y) -> int:
    """0: keep both, 1: drop x, 2: drop y."""
    if is_star(x) and is_star(y):
        if x <= y:
            return 1
        if y <= x:
            return 2
        return 0
    if is_star(y) and not is_star(x) and x in y:
        return 1
    if is_star(x) and not is_star(y) and y in x:
        return 2
    return 0


def normalize_product(atoms) -> tuple:
    out: list = []
    for a in atoms:
        if is_star(a) and not a:
            raise ModelError("empty star atom")
        out.append(a)
        # absorption only ever involves the newest atom and its left neighbours
        while len(out) >= 2:
            r = _absorbs(out[-2], out[-1])
            if r == 0:
                break
            if r == 1:
                del out[-2]
            else:
                del out[-1]
    return tuple(out)


def product_leq(p, q) -> bool:
    """Language inclusion of two normalized products."""
    i = 0
    n = len(p)
    for atom in q:
        if i == n:
            return True
        if is_star(atom):
            while i < n and atom_letters(p[i]) <= atom:
                i += 1
        elif not is_star(p[i]) and p[i] == atom:
            i += 1
    return i == n


def lcs_write(p, a) -> tuple:
    return normalize_product(tuple(p) + (a,))


def lcs_read(p, a):
    """Residue of reading ``a`` lazily, or ``None`` if no ``a`` can be present."""
    for i, atom in enumerate(p):
        if is_star(atom):
            if a in atom:
                return tuple(p[i:])
        elif atom == a:
            return tuple(p[i + 1:])
    return None


def product_language(p, maxlen: int) -> set:
    """Words of length <= maxlen in the (downward-closed) language of p."""
    words = {()}
    for atom in p:
        nxt = set(words)
        for w in words:
            if is_star(atom):
                frontier = [w]
                while frontier:
                    new = []
                    for v in frontier:
                        if len(v) < maxlen:
                            for x in sorted(atom):
                                y = v + (x,)
                                if y not in nxt:
                                    nxt.add(y)
                                    new.append(y)
                    frontier = new
            elif len(w) < maxlen:
                nxt.add(w + (atom,))
        words = nxt
    return words


def fmt_product(p) -> str:
    if not p:
        return "ε"
    return " ".join("{" + ",".join(sorted(a)) + "}*" if is_star(a) else a for a in p)


def product_to_json(p) -> list:
    return [{"star": sorted(a)} if is_star(a) else a for a in p]


def product_from_json(data) -> tuple:
    out = []
    for item in data:
        if isinstance(item, dict):
            out.append(star(*item["star"]))
        else:
            out.append(str(item))
    return normalize_product(out)


@dataclass(frozen=True)
class LcsRule:
    src: object
    dst: object
    channel: object  # None for internal actions
    op: str  # "!", "?" or "nop"
    msg: object
    label: str

    def __post_init__(self):
        if self.op not in ("!", "?", "nop"):
            raise ModelError(f"rule {self.label!r}: unknown op {self.op!r}")
        if self.op != "nop" and (self.channel is None or self.msg is None):
            raise ModelError(f"rule {self.label!r}: channel operation needs channel and message")


class LcsSystem(System):
    """Functional lossy channel system; configurations are ``(q, contents)``."""

    def __init__(self, states, initial, channels, messages, rules: Sequence[LcsRule],
                 initial_contents=None, name="lcs", strict=True):
        self.states = tuple(states)
        self.channels = tuple(channels)
        self.messages = tuple(messages)
        self.name = name
        if initial not in self.states:
            raise ModelError(f"initial state {initial!r} unknown")
        self.rules = tuple(rules)
        if not self.rules:
            raise ModelError("an LCS needs at least one rule")
        chan_idx = {c: i for i, c in enumerate(self.channels)}
        self.chan_idx = chan_idx
        known = set(self.states)
        msgs = set(self.messages)
        self.table: dict = {}
        for r in self.rules:
            if r.src not in known or r.dst not in known:
                raise ModelError(f"rule {r.label!r} uses unknown states")
            if r.op != "nop":
                if r.channel not in chan_idx:
                    raise ModelError(f"rule {r.label!r}: unknown channel {r.channel!r}")
                if r.msg not in msgs:
                    raise ModelError(f"rule {r.label!r}: unknown message {r.msg!r}")
            key = (r.src, r.label)
            if key in self.table and strict:
                raise NondeterminismError(f"two rules labeled {r.label!r} leave state {r.src!r}")
            self.table.setdefault(key, []).append(r)
        self.alphabet = Alphabet(tuple(dict.fromkeys(r.label for r in self.rules)))
        if initial_contents is None:
            initial_contents = tuple(() for _ in self.channels)
        initial_contents = tuple(normalize_product(p) for p in initial_contents)
        if len(initial_contents) != len(self.channels):
            raise ModelError("initial contents do not match the channels")
        self.initial = (initial, initial_contents)

    # single rules -----------------------------------------------------------

    def apply_rule(self, r: LcsRule, contents):
        if r.op == "nop":
            return contents
        i = self.chan_idx[r.channel]
        p = contents[i]
        q = lcs_write(p, r.msg) if r.op == "!" else lcs_read(p, r.msg)
        if q is None:
            return None
        if core.CONTROL_CHECKS:
            core.control_assert("lcs.step", len(q) <= len(p) + 1, f"{len(p)} -> {len(q)} atoms")
        return contents[:i] + (q,) + contents[i + 1:]

    def step(self, c, a):
        q, contents = c
        res = None
        for r in self.table.get((q, a), ()):
            nc = self.apply_rule(r, contents)
            if nc is not None:
                if res is not None and res != (r.dst, nc):
                    raise NondeterminismError(f"label {a!r} is ambiguous at {self.format_config(c)}")
                res = (r.dst, nc)
        return res

    def leq(self, x, y):
        return x[0] == y[0] and all(product_leq(p, q) for p, q in zip(x[1], y[1]))

    def key(self, c):
        return c[0]

    def lub_accelerate(self, c, u):
        return accelerate_lcs(self, c, u)

    def pred_basis(self, target, a):
        return pred_basis_lcs(self, target, a)

    def min_basis(self):
        empty = tuple(() for _ in self.channels)
        return [(q, empty) for q in self.states]

    def is_limit(self, c):
        return not all(is_word(p) for p in c[1])

    def join_basis(self, x, y) -> list:
        """Minimal configurations above both words configurations."""
        if x[0] != y[0]:
            return []
        per_channel = [minimal_supersequences(p, q) for p, q in zip(x[1], y[1])]
        return [(x[0], combo) for combo in itertools.product(*per_channel)]

    def domain_bases(self) -> list:
        empty = tuple(() for _ in self.channels)
        out = []
        for r in self.rules:
            contents = list(empty)
            if r.op == "?":
                contents[self.chan_idx[r.channel]] = (r.msg,)
            out.append((r.label, r, [(r.src, tuple(contents))]))
        return out

    def format_config(self, c):
        q, contents = c
        chans = ", ".join(f"{ch}: {fmt_product(p)}" for ch, p in zip(self.channels, contents))
        return f"<{q} | {chans}>"

    def config_to_json(self, c):
        return {"state": core._jsonable_state(c[0]),
                "channels": [product_to_json(p) for p in c[1]]}

    def config_from_json(self, data):
        return (core._state_from_json(data["state"]),
                tuple(product_from_json(p) for p in data["channels"]))

    def __repr__(self):
        return f"LcsSystem({self.name}, |Q|={len(self.states)}, channels={self.channels})"


def _channel_ops(sys: LcsSystem, q, u):
    """Per-channel op sequences along u from control q, and the final state."""
    ops = [[] for _ in sys.channels]
    for a in u:
        rules = sys.table.get((q, a))
        if not rules:
            return None, None
        r = rules[0]
        if r.op != "nop":
            ops[sys.chan_idx[r.channel]].append((r.op, r.msg))
        q = r.dst
    return ops, q


def _run_ops(p, ops):
    for op, m in ops:
        p = lcs_write(p, m) if op == "!" else lcs_read(p, m)
        if p is None:
            return None
    return p


def _accelerate_channel(p0, ops, cap):
    if not ops:
        return p0
    seq = [p0]
    for i in range(cap):
        nxt = _run_ops(seq[-1], ops)
        if nxt is None:
            return None
        seq.append(nxt)
        if product_leq(nxt, seq[-2]):
            return nxt
        for period in (1, 2, 3):
            j = len(seq) - 1 - 2 * period
            if j < len(p0):
                continue
            a, b, c = seq[j], seq[j + period], seq[j + 2 * period]
            if b[:len(a)] != a or c[:len(b)] != b:
                continue
            y1, y2 = b[len(a):], c[len(b):]
            if not y1 or not y2:
                continue
            l1 = frozenset().union(*map(atom_letters, y1))
            l2 = frozenset().union(*map(atom_letters, y2))
            if l1 != l2:
                continue
            cand = normalize_product(a + (l1,))
            # the guess must be a post-fixpoint above the start to bound the chain
            image = _run_ops(cand, ops)
            if image is not None and product_leq(image, cand) and product_leq(p0, cand):
                return cand
    return None


accel_stats = {"cap_hits": 0}


def accelerate_lcs(sys: LcsSystem, c, u):
    u = tuple(u)
    if not u:
        raise UsageError("acceleration needs a non-empty loop word")
    q, contents = c
    ops, q_end = _channel_ops(sys, q, u)
    if ops is None or q_end != q:
        return None
    first = sys.run(c, u)
    if first is None or not sys.leq(c, first):
        return None
    # channels evolve independently: reads and writes only touch their own queue
    atoms = sum(len(p) for p in contents)
    cap = 4 * atoms + 4 * len(u) + 4
    out = []
    for p, o in zip(contents, ops):
        r = _accelerate_channel(p, o, cap)
        if r is None:
            accel_stats["cap_hits"] += 1
            return None
        out.append(r)
    res = (q, tuple(out))
    if core.CONTROL_CHECKS:
        after = sum(len(p) for p in out)
        bound = 2 ** (atoms + 2) + atoms
        core.control_assert("lcs.accelerate", after <= bound, f"{atoms} -> {after} atoms")
    return res


def pred_basis_lcs(sys: LcsSystem, target, a) -> list:
    out = []
    for q2, contents in target:
        if not all(is_word(p) for p in contents):
            raise UsageError("pred_basis needs plain word configurations")
        for (src, label), rules in sys.table.items():
            if label != a:
                continue
            for r in rules:
                if r.dst != q2:
                    continue
                if r.op == "nop":
                    out.append((src, contents))
                    continue
                i = sys.chan_idx[r.channel]
                w = contents[i]
                if r.op == "!":
                    nw = w[:-1] if w and w[-1] == r.msg else w
                else:
                    nw = (r.msg,) + w
                out.append((src, contents[:i] + (nw,) + contents[i + 1:]))
    return minimal_configs(sys, out)


def minimal_configs(sys: System, cs) -> list:
    cs = list(dict.fromkeys(cs))
    return [c for c in cs if not any(d != c and sys.leq(d, c) for d in cs)]


def is_subword(v, w) -> bool:
    it = iter(w)
    return all(x in it for x in v)


def minimal_supersequences(v, w) -> list:
    """All shortest common supersequences that are subword-minimal."""
    v, w = tuple(v), tuple(w)
    memo: dict = {}

    def go(i, j):
        if (i, j) in memo:
            return memo[(i, j)]
        if i == len(v):
            res = {w[j:]}
        elif j == len(w):
            res = {v[i:]}
        elif v[i] == w[j]:
            res = {(v[i],) + s for s in go(i + 1, j + 1)}
        else:
            res = {(v[i],) + s for s in go(i + 1, j)} | {(w[j],) + s for s in go(i, j + 1)}
        memo[(i, j)] = res
        return res

    cands = go(0, 0)
    return sorted(s for s in cands if not any(t != s and is_subword(t, s) for t in cands))
