"""Omega-regular properties of bounded systems.

Action-based LTL is translated to a Buchi automaton (tableau), then to a
deterministic Rabin automaton (Safra trees).  Emptiness of the product of
a bounded system with a Rabin automaton reduces to boundedness checks of
three marker-decorated systems per Rabin pair.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .boundedness import (DEFAULT_EXPR_BUDGET, DEFAULT_NODE_BUDGET, Unbounded, Unknown,
                          decide_boundedness)
from .core import (Alphabet, Dfa, DRabin, ModelError, OmegaLoop, Plain, PreconditionError,
                   ProductSystem, System, UsageError)

# ---------------------------------------------------------------------------
# syntax

TRUE = ("true",)
FALSE = ("false",)


class LtlSyntaxError(UsageError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<quoted>"[^"]*"|'[^']*')
  | (?P<op>[GFXUR!&|()])
  | (?P<ident>[a-z_][A-Za-z0-9_!?]*)
""", re.VERBOSE)


def _tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LtlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "quoted":
                kind, val = "ident", val[1:-1]
            elif kind == "ident" and val in ("true", "false"):
                kind = val
            elif kind == "arrow":
                kind = "op"
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


def parse_ltl(text: str):
    """Parse ``G F X U R ! & | ->``; letters are lowercase identifiers or quoted."""
    toks = _tokenize(text)
    i = 0

    def peek():
        return toks[i]

    def take(val=None):
        nonlocal i
        t = toks[i]
        if val is not None and t[1] != val:
            raise LtlSyntaxError(f"expected {val!r}, found {t[1] or 'end of input'!r}", t[2])
        i += 1
        return t

    def implication():
        left = disj()
        if peek()[1] == "->":
            take()
            return ("imp", left, implication())
        return left

    def disj():
        f = conj()
        while peek()[1] == "|":
            take()
            f = ("or", f, conj())
        return f

    def conj():
        f = until()
        while peek()[1] == "&":
            take()
            f = ("and", f, until())
        return f

    def until():
        f = unary()
        if peek()[0] == "op" and peek()[1] in ("U", "R"):
            op = take()[1]
            return (op, f, until())
        return f

    def unary():
        kind, val, pos = peek()
        if kind == "op" and val == "!":
            take()
            return ("not", unary())
        if kind == "op" and val in ("X", "G", "F"):
            take()
            return (val, unary())
        if kind == "op" and val == "(":
            take()
            f = implication()
            take(")")
            return f
        if kind in ("true", "false"):
            take()
            return TRUE if kind == "true" else FALSE
        if kind == "ident":
            take()
            return ("atom", val)
        raise LtlSyntaxError(f"unexpected {val or 'end of input'!r}", pos)

    f = implication()
    if peek()[0] != "eof":
        raise LtlSyntaxError(f"trailing input {peek()[1]!r}", peek()[2])
    return f


def format_ltl(f) -> str:
    op = f[0]
    if op in ("true", "false"):
        return op
    if op == "atom":
        a = f[1]
        return a if re.fullmatch(r"[a-z_][A-Za-z0-9_!?]*", a) and a not in ("true", "false") else f'"{a}"'
    if op == "not":
        return "!" + format_ltl(f[1])
    if op in ("X", "G", "F"):
        return op + " " + format_ltl(f[1])
    sym = {"and": "&", "or": "|", "imp": "->", "U": "U", "R": "R"}[op]
    return f"({format_ltl(f[1])} {sym} {format_ltl(f[2])})"


def atoms(f) -> set:
    if f[0] == "atom":
        return {f[1]}
    return set().union(*(atoms(g) for g in f[1:] if isinstance(g, tuple)))


def _is_letter(f) -> bool:
    return f[0] == "atom"


def _is_flat(f) -> bool:
    op = f[0]
    if op == "and":
        # one conjunct may be arbitrary
        return _is_flat(f[1]) or _is_flat(f[2])
    if op == "or":
        return _is_flat(f[1]) and _is_flat(f[2])
    if op == "X":
        return _is_flat(f[1])
    if op == "U":
        return _is_letter(f[1]) and _is_flat(f[2])
    if op == "G":
        return _is_letter(f[1])
    return False


def is_coflat(f) -> bool:
    if isinstance(f, str):
        f = parse_ltl(f)
    return f[0] == "not" and _is_flat(f[1])


def nnf(f, neg: bool = False):
    op = f[0]
    if op == "true":
        return FALSE if neg else TRUE
    if op == "false":
        return TRUE if neg else FALSE
    if op == "atom":
        return ("natom", f[1]) if neg else f
    if op == "not":
        return nnf(f[1], not neg)
    if op == "and":
        return (("or" if neg else "and"), nnf(f[1], neg), nnf(f[2], neg))
    if op == "or":
        return (("and" if neg else "or"), nnf(f[1], neg), nnf(f[2], neg))
    if op == "imp":
        return nnf(("or", ("not", f[1]), f[2]), neg)
    if op == "X":
        return ("X", nnf(f[1], neg))
    if op == "U":
        return (("R" if neg else "U"), nnf(f[1], neg), nnf(f[2], neg))
    if op == "R":
        return (("U" if neg else "R"), nnf(f[1], neg), nnf(f[2], neg))
    if op == "G":
        return nnf(("R", FALSE, f[1]), neg)
    if op == "F":
        return nnf(("U", TRUE, f[1]), neg)
    raise UsageError(f"unknown connective {op!r}")


# ---------------------------------------------------------------------------
# Buchi automata


@dataclass
class Nba:
    states: list
    initial: frozenset
    alphabet: Alphabet
    delta: dict  # (q, a) -> frozenset
    accepting: frozenset

    def post(self, S, a) -> frozenset:
        out = set()
        for q in S:
            out |= self.delta.get((q, a), frozenset())
        return frozenset(out)

    def accepts_lasso(self, prefix, loop) -> bool:
        """Membership of prefix . loop^omega by an accepting-cycle search."""
        prefix, loop = tuple(prefix), tuple(loop)
        if not loop:
            return False
        S = set(self.initial)
        for a in prefix:
            S = self.post(S, a)
        n = len(loop)
        start = {(q, 0) for q in S}
        succ = {}
        seen = set(start)
        todo = list(start)
        while todo:
            q, i = todo.pop()
            nxt = [(r, (i + 1) % n) for r in self.delta.get((q, loop[i]), ())]
            succ[(q, i)] = nxt
            for x in nxt:
                if x not in seen:
                    seen.add(x)
                    todo.append(x)
        # an accepting node lying on a cycle
        for node in seen:
            if node[0] not in self.accepting:
                continue
            stack = list(succ[node])
            visited = set()
            while stack:
                x = stack.pop()
                if x == node:
                    return True
                if x in visited:
                    continue
                visited.add(x)
                stack.extend(succ[x])
        return False


def _literals_ok(old, a) -> bool:
    for g in old:
        if g[0] == "atom" and g[1] != a:
            return False
        if g[0] == "natom" and g[1] == a:
            return False
        if g[0] == "false":
            return False
    return True


def ltl_to_nba(f, alphabet) -> Nba:
    """Tableau construction, then degeneralization of the generalized automaton."""
    if isinstance(f, str):
        f = parse_ltl(f)
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    unknown = atoms(f) - set(alphabet)
    if unknown:
        raise ModelError(f"formula letters {sorted(unknown)} are not in the alphabet")
    g = nnf(f)
    nodes: list = []  # (incoming set, old, next)
    index: dict = {}

    def expand(incoming, new, old, nxt):
        stack = [(set(incoming), set(new), set(old), set(nxt))]
        while stack:
            inc, new, old, nxt = stack.pop()
            if not new:
                key = (frozenset(old), frozenset(nxt))
                if key in index:
                    nodes[index[key]][0].update(inc)
                    continue
                nid = len(nodes)
                index[key] = nid
                nodes.append((set(inc), frozenset(old), frozenset(nxt)))
                stack.append(({nid}, set(nxt), set(), set()))
                continue
            eta = new.pop()
            if eta in old:
                stack.append((inc, new, old, nxt))
                continue
            op = eta[0]
            if op in ("true", "false", "atom", "natom"):
                if op == "false":
                    continue
                neg = ("natom", eta[1]) if op == "atom" else ("atom", eta[1]) if op == "natom" else None
                if neg is not None and neg in old:
                    continue
                if op == "atom" and any(x[0] == "atom" and x[1] != eta[1] for x in old):
                    continue  # two different actions cannot happen at once
                stack.append((inc, new, old | {eta}, nxt))
            elif op == "and":
                stack.append((inc, new | ({eta[1], eta[2]} - old), old | {eta}, nxt))
            elif op == "X":
                stack.append((inc, new, old | {eta}, nxt | {eta[1]}))
            elif op == "or":
                stack.append((set(inc), new | ({eta[1]} - old), old | {eta}, set(nxt)))
                stack.append((set(inc), new | ({eta[2]} - old), old | {eta}, set(nxt)))
            elif op == "U":
                stack.append((set(inc), new | ({eta[1]} - old), old | {eta}, nxt | {eta}))
                stack.append((set(inc), new | ({eta[2]} - old), old | {eta}, set(nxt)))
            elif op == "R":
                stack.append((set(inc), new | ({eta[2]} - old), old | {eta}, nxt | {eta}))
                stack.append((set(inc), new | ({eta[1], eta[2]} - old), old | {eta}, set(nxt)))
            else:
                raise UsageError(f"unexpected connective {op!r} after normalization")

    expand({"init"}, {g}, set(), set())

    untils = sorted({h for _, old, _ in nodes for h in old if h[0] == "U"}, key=repr)
    acc_sets = [frozenset(i for i, (_, old, _) in enumerate(nodes)
                          if u not in old or u[2] in old) for u in untils]
    k = max(1, len(acc_sets))
    if not acc_sets:
        acc_sets = [frozenset(range(len(nodes)))]
    # degeneralized states are (node, counter); "init" is a fresh start state
    letters_of = [[a for a in alphabet if _literals_ok(old, a)] for _, old, _ in nodes]
    delta: dict = {}
    states = ["init"] + [(i, j) for i in range(len(nodes)) for j in range(k)]
    for r, (inc, _, _) in enumerate(nodes):
        for p in inc:
            for a in letters_of[r]:
                if p == "init":
                    delta.setdefault(("init", a), set()).add((r, 0))
                    continue
                for j in range(k):
                    j2 = (j + 1) % k if p in acc_sets[j] else j
                    delta.setdefault(((p, j), a), set()).add((r, j2))
    accepting = frozenset((i, 0) for i in acc_sets[0])
    delta = {key: frozenset(v) for key, v in delta.items()}
    return _trim_nba(Nba(states, frozenset({"init"}), alphabet, delta, accepting))


def _trim_nba(nba: Nba) -> Nba:
    seen = set(nba.initial)
    todo = list(seen)
    while todo:
        q = todo.pop()
        for a in nba.alphabet:
            for r in nba.delta.get((q, a), ()):
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
    succ = {q: {r for a in nba.alphabet for r in nba.delta.get((q, a), ())} for q in seen}
    # live states reach an accepting state that lies on a cycle
    good = {q for q in nba.accepting & seen if q in _reach(succ, succ[q])}
    live = set(good)
    changed = True
    while changed:
        changed = False
        for q in seen - live:
            if succ[q] & live:
                live.add(q)
                changed = True
    # bisimulation classes, refined from the acceptance partition
    block = {q: int(q in nba.accepting) for q in live}
    while True:
        sig = {q: (block[q],) + tuple(frozenset(block[r] for r in nba.delta.get((q, a), ()) if r in live)
                                      for a in nba.alphabet) for q in live}
        ids: dict = {}
        for q in sorted(live, key=repr):
            ids.setdefault(sig[q], len(ids))
        nb = {q: ids[sig[q]] for q in live}
        if len(ids) == len(set(block.values())):
            block = nb
            break
        block = nb
    delta = {}
    for (q, a), rs in nba.delta.items():
        if q in live:
            tgt = frozenset(block[r] for r in rs if r in live)
            if tgt:
                delta[(block[q], a)] = tgt
    init = frozenset(block[q] for q in nba.initial if q in live)
    return Nba(sorted(set(block.values())), init, nba.alphabet, delta,
               frozenset(block[q] for q in nba.accepting if q in live))


def _reach(succ, start) -> set:
    seen = set(start)
    todo = list(seen)
    while todo:
        for r in succ[todo.pop()]:
            if r not in seen:
                seen.add(r)
                todo.append(r)
    return seen


# ---------------------------------------------------------------------------
# Safra determinization


def _names(tree) -> set:
    if tree is None:
        return set()
    out = {tree[0]}
    for ch in tree[2]:
        out |= _names(ch)
    return out


def _safra_step(nba: Nba, state, a):
    tree, _ = state
    if tree is None:
        return (None, frozenset())
    used = _names(tree)
    limit = 2 * max(1, len(nba.states))

    def fresh():
        for i in range(1, limit + 1):
            if i not in used:
                used.add(i)
                return i
        raise AssertionError("Safra tree ran out of names")

    def spawn(node):
        name, label, children = node
        children = tuple(spawn(ch) for ch in children)
        acc = label & nba.accepting
        if acc:
            children = children + ((fresh(), acc, ()),)
        return (name, label, children)

    def update(node):
        name, label, children = node
        return (name, nba.post(label, a), tuple(update(ch) for ch in children))

    def hmerge(node, allowed):
        name, label, children = node
        label = label & allowed
        seen: set = set()
        kids = []
        for ch in children:
            ch2 = hmerge(ch, label - seen)
            seen |= ch2[1]
            kids.append(ch2)
        return (name, label, tuple(kids))

    def prune(node):
        name, label, children = node
        if not label:
            return None
        return (name, label, tuple(c for c in (prune(ch) for ch in children) if c is not None))

    marks = set()

    def vmerge(node):
        name, label, children = node
        if children and frozenset().union(*(ch[1] for ch in children)) == label:
            marks.add(name)
            return (name, label, ())
        return (name, label, tuple(vmerge(ch) for ch in children))

    t = spawn(tree)
    t = update(t)
    t = hmerge(t, t[1])
    t = prune(t)
    if t is None:
        return (None, frozenset())
    t = vmerge(t)
    return (t, frozenset(marks))


def nba_to_dra(nba: Nba) -> DRabin:
    init_tree = (1, frozenset(nba.initial), ()) if nba.initial else None
    start = (init_tree, frozenset())
    index = {start: 0}
    todo = [start]
    delta = {}
    while todo:
        s = todo.pop()
        for a in nba.alphabet:
            t = _safra_step(nba, s, a)
            if t not in index:
                index[t] = len(index)
                todo.append(t)
            delta[(index[s], a)] = index[t]
    states = list(range(len(index)))
    all_names = set()
    for (tree, _), i in index.items():
        all_names |= _names(tree)
    pairs = []
    for name in sorted(all_names):
        E = {i for (tree, _), i in index.items() if name not in _names(tree)}
        F = {i for (tree, marks), i in index.items() if name in marks}
        if F:
            pairs.append((E, F))
    return DRabin(states, 0, nba.alphabet, delta, pairs)


def ltl_to_dra(f, alphabet) -> DRabin:
    return nba_to_dra(ltl_to_nba(f, alphabet))


# ---------------------------------------------------------------------------
# stage systems


class StageSystem(System):
    """Marker decoration of a product ``sys x dra``.

    Configurations are ``(c, m)``.  In an E-state with ``m == 0`` only the
    marker ``e`` fires (setting ``m``); letters of the system then fire
    and reset ``m``.  With ``f`` set, F-states also carry an ``f`` self-loop.
    """

    def __init__(self, base: System, E, F, index: int, with_f: bool):
        self.base = base
        self.E = frozenset(E)
        self.F = frozenset(F)
        self.e = f"#e{index}"
        self.f = f"#f{index}" if with_f else None
        for m in (self.e, self.f):
            if m is not None and m in base.alphabet:
                raise ModelError(f"marker {m!r} clashes with a system letter")
        extra = (self.e,) + ((self.f,) if with_f else ())
        self.alphabet = Alphabet(tuple(base.alphabet) + extra)
        self.initial = (base.initial, 0)

    def _q(self, c):
        return c[1]

    def step(self, c, a):
        inner, m = c
        q = self._q(inner)
        if a == self.e:
            return (inner, 1) if q in self.E and m == 0 else None
        if a == self.f:
            return c if q in self.F and m == 0 else None
        if q in self.E and m == 0:
            return None
        d = self.base.step(inner, a)
        return None if d is None else (d, 0)

    def leq(self, x, y):
        return x[1] == y[1] and self.base.leq(x[0], y[0])

    def key(self, c):
        return (self.base.key(c[0]), c[1])

    def lub_accelerate(self, c, u):
        d = self.run(c, u)
        if d is None or d[1] != c[1] or not self.leq(c, d):
            return None
        proj = tuple(a for a in u if a not in (self.e, self.f))
        if not proj:
            return c if d == c else None
        acc = self.base.lub_accelerate(c[0], proj)
        return None if acc is None else (acc, c[1])

    def pred_basis(self, target, a):
        out = []
        for inner, m in target:
            q = self._q(inner)
            if a == self.e:
                if m == 1 and q in self.E:
                    out.append((inner, 0))
            elif a == self.f:
                if m == 0 and q in self.F:
                    out.append((inner, 0))
            elif m == 0:
                for p in self.base.pred_basis([inner], a):
                    if self._q(p) in self.E:
                        out.append((p, 1))
                    else:
                        out.extend([(p, 0), (p, 1)])
        return out

    def min_basis(self):
        return [(c, m) for c in self.base.min_basis() for m in (0, 1)]

    def is_limit(self, c):
        return self.base.is_limit(c[0])

    def format_config(self, c):
        return f"{self.base.format_config(c[0])}/{c[1]}"

    def config_to_json(self, c):
        return {"inner": self.base.config_to_json(c[0]), "marker": c[1]}

    def config_from_json(self, data):
        return (self.base.config_from_json(data["inner"]), data["marker"])


def marker_dfa(alphabet: Alphabet, e: str, f: str) -> Dfa:
    """Partial DFA for (Sigma + e)* f (Sigma + f)*."""
    delta = {}
    for a in alphabet:
        if a == e:
            delta[(0, a)] = 0
        elif a == f:
            delta[(0, a)] = 1
            delta[(1, a)] = 1
        else:
            delta[(0, a)] = 0
            delta[(1, a)] = 1
    return Dfa([0, 1], 0, alphabet, delta, [1])


def build_stage_systems(sys_product: System, pair, index: int = 0) -> tuple:
    E, F = pair
    s1 = StageSystem(sys_product, E, (), index, with_f=False)
    s2 = StageSystem(sys_product, E, F, index, with_f=True)
    s3 = ProductSystem(s2, marker_dfa(s2.alphabet, s2.e, s2.f))
    return s1, s2, s3


def omega_language_empty(sys: System, dra: DRabin, node_budget=DEFAULT_NODE_BUDGET,
                         expr_budget=DEFAULT_EXPR_BUDGET, time_limit=None, detail=False):
    """True iff no infinite trace of ``sys`` is accepted by ``dra``.

    Needs ``sys x dra`` to be trace bounded; an unbounded product raises
    :class:`PreconditionError` with the fork.  An exhausted budget returns
    the :class:`Unknown` verdict.
    """
    if set(dra.alphabet) - set(sys.alphabet):
        # moves on letters the system never performs are irrelevant
        keep = Alphabet(tuple(a for a in dra.alphabet if a in sys.alphabet))
        dra = DRabin(dra.states, dra.initial, keep,
                     {k: v for k, v in dra.delta.items() if k[1] in keep}, dra.pairs)
    dra = dra.reachable()
    prod = ProductSystem(sys, dra)
    v = decide_boundedness(prod, node_budget, expr_budget, time_limit=time_limit)
    if isinstance(v, Unbounded):
        raise PreconditionError("the product with the Rabin automaton is not trace bounded", v.fork)
    if isinstance(v, Unknown):
        return v
    stages = []
    for i, (E, F) in enumerate(dra.pairs):
        if not F:
            continue
        _, _, s3 = build_stage_systems(prod, (E, F), i)
        w = decide_boundedness(s3, node_budget, expr_budget, time_limit=time_limit)
        stages.append((i, w.kind))
        if isinstance(w, Unknown):
            return w
        if isinstance(w, Unbounded):
            lasso = confirm_good_lasso(s3, w.fork)
            if lasso is None:
                # the fork may live only in the completion; no run is exhibited
                return Unknown({"reason": "stage fork without a concrete good lasso", "pair": i,
                                "fork": w.fork.to_json(s3), "stages": stages})
            return (False, stages + [("lasso", lasso)]) if detail else False
    return (True, stages) if detail else True


def _concrete_run(sys: System, c, word):
    """Replay an accelerated word whose loops leave the configuration unchanged."""
    for seg in word.segments:
        if isinstance(seg, OmegaLoop):
            if sys.run(c, seg.word) != c:
                return None
            continue
        c = sys.run(c, seg.word)
        if c is None:
            return None
    return c


def confirm_good_lasso(s3: ProductSystem, fork) -> Optional[tuple]:
    """Turn a stage-3 fork into a concrete lasso ``(stem, loop)`` of the product.

    The loop runs from a concrete configuration back above it, never fires
    the E-marker and passes an f-marker, so it visits F forever and E never.
    """
    stage = s3.left
    markers = (stage.e, stage.f)
    pivot = _concrete_run(s3, s3.initial, fork.stem)
    if pivot is None or s3.is_limit(pivot):
        return None
    branches = [fork.a_branch.plain_word() if fork.a_branch.is_plain else None, tuple(fork.b_branch)]
    if branches[0] is None:
        a_word = []
        c = pivot
        for seg in fork.a_branch.segments:
            if isinstance(seg, OmegaLoop):
                if s3.run(c, seg.word) != c:
                    break
                continue
            a_word.extend(seg.word)
            c = s3.run(c, seg.word)
            if c is None:
                break
        else:
            branches[0] = tuple(a_word)
    cands = [b for b in branches if b is not None]
    if len(cands) == 2:
        cands.append(cands[0] + cands[1])
    for loop in cands:
        if stage.e in loop or stage.f not in loop or all(a in markers for a in loop):
            continue
        d = s3.run(pivot, loop)
        if d is None or not s3.leq(pivot, d):
            continue
        stem = tuple(a for seg in fork.stem.segments if isinstance(seg, Plain)
                     for a in seg.word if a not in markers)
        return stem, tuple(a for a in loop if a not in markers)
    return None


def model_check_ltl(sys: System, phi, independence=None, closure_asserted: bool = False,
                    node_budget=DEFAULT_NODE_BUDGET, expr_budget=DEFAULT_EXPR_BUDGET):
    """``sys |= phi`` over infinite traces, or an :class:`Unknown` verdict."""
    if isinstance(phi, str):
        phi = parse_ltl(phi)
    dra = ltl_to_dra(("not", phi), sys.alphabet)
    if independence is None:
        try:
            return omega_language_empty(sys, dra, node_budget, expr_budget)
        except PreconditionError as exc:
            raise PreconditionError(
                "system x property automaton is unbounded; try an independence relation "
                "(boundedness modulo I)", exc.witness) from None
    from .commutation import omega_empty_modulo

    return omega_empty_modulo(sys, independence, dra, closure_asserted, None, node_budget, expr_budget)
