"""Trace boundedness: bounded-expression enumeration dovetailed with a search
for increasing forks, plus a Karp-Miller style cover computation."""
from __future__ import annotations

import itertools
import os
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .core import (AcceleratedWord, Alphabet, Dfa, OmegaLoop, Plain, ProductSystem, System,
                   UsageError, apply_accelerated_word)
from .coverability import saturate

DEFAULT_NODE_BUDGET = int(os.environ.get("TRACEBOUND_BUDGET_NODES", 10**6))
DEFAULT_EXPR_BUDGET = int(os.environ.get("TRACEBOUND_BUDGET_EXPRS", 10**4))


# ---------------------------------------------------------------------------
# bounded expressions


@dataclass(frozen=True)
class BoundedExpression:
    words: tuple

    def __post_init__(self):
        words = tuple(tuple(w) for w in self.words)
        if not words:
            raise UsageError("a bounded expression needs at least one word")
        if any(not w for w in words):
            raise UsageError("bounded expression words must be non-empty")
        object.__setattr__(self, "words", words)

    @property
    def size(self) -> int:
        return sum(len(w) for w in self.words)

    def matches(self, word) -> bool:
        """Membership of a finite word in w1* ... wn*."""
        word = tuple(word)
        n = len(word)
        reach = {0}
        for w in self.words:
            frontier = list(reach)
            while frontier:
                nxt = []
                for i in frontier:
                    j = i + len(w)
                    if j <= n and word[i:j] == w and j not in reach:
                        reach.add(j)
                        nxt.append(j)
                frontier = nxt
        return n in reach

    def __str__(self):
        return " ".join("(" + " ".join(w) + ")*" for w in self.words)

    def to_json(self):
        return [list(w) for w in self.words]


def simplify_words(words) -> list:
    out: list = []
    for w in words:
        w = tuple(w)
        if w and (not out or out[-1] != w):
            out.append(w)
    return out


def _words_in_order(alphabet, maxlen):
    """Words of length 1..maxlen in lexicographic (depth-first) order."""
    def rec(prefix):
        for a in alphabet:
            w = prefix + (a,)
            yield w
            if len(w) < maxlen:
                yield from rec(w)
    yield from rec(())


def _expressions_of_size(alphabet, size) -> Iterator[tuple]:
    if size == 0:
        yield ()
        return
    for w in _words_in_order(alphabet, size):
        for rest in _expressions_of_size(alphabet, size - len(w)):
            yield (w,) + rest


def enumerate_bounded_expressions(alphabet) -> Iterator[BoundedExpression]:
    """Every bounded expression exactly once, by size then lexicographically."""
    alphabet = tuple(alphabet)
    for size in itertools.count(1):
        for words in _expressions_of_size(alphabet, size):
            yield BoundedExpression(words)


def count_expressions(k: int, size: int) -> int:
    """Number of expressions of exactly ``size`` over ``k`` letters."""
    return 2 ** (size - 1) * k ** size if size else 0


def expr_to_complement_dfa(expr: BoundedExpression, alphabet) -> Dfa:
    """Complete DFA for the complement of w1* ... wn* over ``alphabet``."""
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    words = expr.words
    n = len(words)

    # NFA states: i >= 0 is the boundary before word i (words i.. may follow),
    # (i, j) sits inside word i.  Boundary i subsumes every boundary after it,
    # so a subset keeps only its smallest boundary.
    starts: dict = {}
    for i, w in enumerate(words):
        starts.setdefault(w[0], []).append(i)

    def move(S, a):
        bound, inner = S
        out = set()
        best = None
        if bound is not None:
            for i in starts.get(a, ()):
                if i < bound:
                    continue
                if len(words[i]) == 1:
                    best = i if best is None or i < best else best
                else:
                    out.add((i, 1))
        for i, j in inner:
            w = words[i]
            if w[j] == a:
                if j + 1 == len(w):
                    best = i if best is None or i < best else best
                else:
                    out.add((i, j + 1))
        return (best, frozenset(out))

    start = (0, frozenset())
    index = {start: 0}
    todo = [start]
    delta = {}
    accepting_in_expr = set()
    while todo:
        S = todo.pop()
        sid = index[S]
        if S[0] is not None:
            accepting_in_expr.add(sid)
        for a in alphabet:
            T = move(S, a)
            if T not in index:
                index[T] = len(index)
                todo.append(T)
            delta[(sid, a)] = index[T]
    states = list(range(len(index)))
    return Dfa(states, 0, alphabet, delta, set(states) - accepting_in_expr)


@dataclass
class InclusionResult:
    included: bool
    iterations: int
    basis_size: int
    dfa_states: int
    seconds: float

    def to_json(self):
        return {"included": self.included, "iterations": self.iterations,
                "basis_size": self.basis_size, "dfa_states": self.dfa_states}


def check_trace_inclusion(sys: System, expr: BoundedExpression, prune=None,
                          detail: bool = False):
    """T(sys) included in L(expr), via emptiness of sys x complement."""
    t0 = time.perf_counter()
    comp = expr_to_complement_dfa(expr, sys.alphabet)
    prod = ProductSystem(sys, comp)
    final = [(m, q) for m in sys.min_basis() for q in sorted(comp.accepting)]
    pprune = None
    if prune is not None:
        pprune = lambda c: prune(c[0])  # noqa: E731
    sat = saturate(prod, prod.initial, final, pprune)
    res = InclusionResult(not sat.covered, sat.iterations, len(sat.basis), len(comp.states),
                          time.perf_counter() - t0)
    return res if detail else res.included


# ---------------------------------------------------------------------------
# forks


@dataclass
class ForkWitness:
    stem: AcceleratedWord
    a_branch: AcceleratedWord
    b_branch: tuple
    s: object
    s_a: object
    s_b: object

    def check(self, sys: System) -> Optional[str]:
        """``None`` when the witness replays, else a reason."""
        if not self.b_branch or self.a_branch.first_letter() is None:
            return "empty branch"
        if self.a_branch.first_letter() == self.b_branch[0]:
            return "branches start with the same letter"
        s = apply_accelerated_word(sys, sys.initial, self.stem)
        if s is None or not sys.equiv(s, self.s):
            return "stem does not reach the pivot"
        sa = apply_accelerated_word(sys, s, self.a_branch)
        if sa is None or not sys.leq(s, sa):
            return "a-branch is not increasing"
        sb = sys.run(s, self.b_branch)
        if sb is None or not sys.leq(s, sb):
            return "b-branch is not increasing"
        return None

    def to_json(self, sys: System):
        return {
            "stem": self.stem.to_json(),
            "a_branch": self.a_branch.to_json(),
            "b_branch": list(self.b_branch),
            "pivot": sys.config_to_json(self.s),
            "pivot_text": sys.format_config(self.s),
            "s_a": sys.config_to_json(self.s_a),
            "s_b": sys.config_to_json(self.s_b),
        }

    @classmethod
    def from_json(cls, sys: System, data) -> "ForkWitness":
        return cls(AcceleratedWord.from_json(data["stem"]),
                   AcceleratedWord.from_json(data["a_branch"]),
                   tuple(data["b_branch"]),
                   sys.config_from_json(data["pivot"]),
                   sys.config_from_json(data["s_a"]),
                   sys.config_from_json(data["s_b"]))


@dataclass
class _Node:
    id: int
    config: object
    parent: Optional[int]
    edge: Optional[tuple]  # ("a", letter) or ("w", loop word)
    depth: int
    children: list = field(default_factory=list)
    loops: list = field(default_factory=list)
    leaf: bool = False


@dataclass
class _Cont:
    first: str
    word: AcceleratedWord
    plain: bool
    end: int


class ForkSearch:
    """Resumable breadth-first search for increasing forks.

    Every node is an accelerated run.  A node equal to an ancestor closes
    a cycle; a node strictly above an ancestor reached by a plain path
    becomes a leaf and the ancestor gets an accelerated child instead.
    """

    def __init__(self, sys: System):
        self.sys = sys
        self.nodes: list = [_Node(0, sys.initial, None, None, 0)]
        self.queue: deque = deque([0])
        self.conts: dict = {}
        self.forks: list = []
        self.expanded = 0
        self._accel_done: set = set()
        self._order = {a: i for i, a in enumerate(sys.alphabet)}

    @property
    def exhausted(self) -> bool:
        return not self.queue

    def _add(self, parent: int, edge, config) -> int:
        p = self.nodes[parent]
        n = _Node(len(self.nodes), config, parent, edge, p.depth + 1)
        self.nodes.append(n)
        p.children.append(n.id)
        return n.id

    def path_edges(self, anc: int, node: int) -> list:
        edges = []
        while node != anc:
            n = self.nodes[node]
            edges.append(n.edge)
            node = n.parent
        edges.reverse()
        return edges

    @staticmethod
    def edges_to_word(edges) -> AcceleratedWord:
        segs = [Plain((x,)) if kind == "a" else OmegaLoop(x) for kind, x in edges]
        return AcceleratedWord(tuple(segs))

    def stem(self, node: int) -> AcceleratedWord:
        return self.edges_to_word(self.path_edges(0, node))

    def _ancestors(self, node: int):
        n = self.nodes[node]
        while n.parent is not None:
            n = self.nodes[n.parent]
            yield n

    def _record(self, node: int) -> list:
        """Register node as a continuation of every ancestor below it."""
        sys = self.sys
        d = self.nodes[node]
        edges: list = []
        plain = True
        found = []
        cur = d
        while cur.parent is not None:
            edges.append(cur.edge)
            if cur.edge[0] == "w":
                plain = False
            b = self.nodes[cur.parent]
            cur = b
            if sys.leq(b.config, d.config):
                word = self.edges_to_word(reversed(edges))
                cont = _Cont(word.first_letter(), word, plain, node)
                lst = self.conts.setdefault(b.id, [])
                fork = self._fork_at(b, lst, cont)
                lst.append(cont)
                if fork is not None:
                    found.append(fork)
        return found

    def _fork_at(self, b: _Node, existing: list, new: _Cont):
        if not any(c.first != new.first and (c.plain or new.plain) for c in existing):
            return None
        allc = existing + [new]
        order = self._order

        def rank(c):
            return (order[c.first], len(c.word.letters()), c.end)

        for a in sorted(allc, key=rank):
            bs = [c for c in allc if c.plain and c.first != a.first]
            if bs:
                bb = min(bs, key=rank)
                return ForkWitness(self.stem(b.id), a.word, bb.word.plain_word(), b.config,
                                   self.nodes[a.end].config, self.nodes[bb.end].config)
        return None

    def _close_cycle(self, anc: int, node: int):
        """Record the cycle anc -> node (node equivalent to anc) at each of its nodes."""
        edges = self.path_edges(anc, node)
        cycle_nodes = [anc]
        cur = node
        chain = []
        while cur != anc:
            chain.append(cur)
            cur = self.nodes[cur].parent
        cycle_nodes += list(reversed(chain))[:-1]
        found = []
        for i, s in enumerate(cycle_nodes):
            rot = edges[i:] + edges[:i]
            self.nodes[s].loops.append(rot)
            if i == 0:
                continue  # already registered as an ordinary continuation
            # the rotation leads from s back to (an equivalent of) s
            word = self.edges_to_word(rot)
            cont = _Cont(word.first_letter(), word, all(k == "a" for k, _ in rot), s)
            lst = self.conts.setdefault(s, [])
            fork = self._fork_at(self.nodes[s], lst, cont)
            lst.append(cont)
            if fork is not None:
                found.append(fork)
        return found

    def expand_one(self) -> list:
        sys = self.sys
        nid = self.queue.popleft()
        node = self.nodes[nid]
        self.expanded += 1
        forks = self._record(nid) if nid else []
        # equal to an ancestor: the cycle is closed
        for anc in self._ancestors(nid):
            if sys.equiv(anc.config, node.config):
                node.leaf = True
                return forks + self._close_cycle(anc.id, nid)
        # strictly above an ancestor through a plain path: accelerate there
        word: list = []
        cur = node
        while cur.parent is not None and cur.edge[0] == "a":
            word.append(cur.edge[1])
            anc = self.nodes[cur.parent]
            cur = anc
            if sys.leq(anc.config, node.config):
                u = tuple(reversed(word))
                key = (anc.id, u)
                if key in self._accel_done:
                    node.leaf = True
                    return forks
                acc = sys.lub_accelerate(anc.config, u)
                if acc is not None:
                    self._accel_done.add(key)
                    node.leaf = True
                    child = self._add(anc.id, ("w", u), acc)
                    self.queue.append(child)
                    return forks
                break
        for a in sys.alphabet:
            c = sys.step(node.config, a)
            if c is not None:
                self.queue.append(self._add(nid, ("a", a), c))
        return forks

    def run(self, max_nodes: int, stop_at_fork: bool = True, deadline: float | None = None) -> list:
        found = []
        n = 0
        while self.queue and n < max_nodes:
            fs = self.expand_one()
            n += 1
            if fs:
                self.forks.extend(fs)
                found.extend(fs)
                if stop_at_fork:
                    break
            if deadline is not None and n % 64 == 0 and time.perf_counter() > deadline:
                break
        return found

    def candidate_expression(self) -> Optional[BoundedExpression]:
        """Words of the finished tree in depth-first order, loops at their nodes."""
        words: list = []

        def loop_words(edges):
            flat = []
            for kind, x in edges:
                flat.extend((x,) if kind == "a" else x)
            out = [tuple(flat)]
            for kind, x in edges:
                if kind == "w":
                    out.append(tuple(x))
            out.extend((a,) for a in flat)
            return out

        stack = [0]
        while stack:
            nid = stack.pop()
            node = self.nodes[nid]
            if node.edge is not None:
                kind, x = node.edge
                if kind == "a":
                    words.append((x,))
                else:
                    words.append(tuple(x))
                    words.extend((a,) for a in x)
            for lp in node.loops:
                words.extend(loop_words(lp))
            stack.extend(reversed(node.children))
        words = simplify_words(words)
        if not words:
            words = [(self.sys.alphabet.symbols[0],)]
        return BoundedExpression(tuple(words))


def iter_forks(sys: System, max_nodes: int = DEFAULT_NODE_BUDGET) -> Iterator[ForkWitness]:
    """Forks in discovery order (the search keeps going after each one)."""
    search = ForkSearch(sys)
    while not search.exhausted and search.expanded < max_nodes:
        for f in search.run(1, stop_at_fork=False):
            yield f


def find_increasing_fork(sys: System, budget: int = DEFAULT_NODE_BUDGET,
                         search: ForkSearch | None = None) -> tuple:
    """(fork or None, search).  Pass ``search`` back in to resume."""
    search = search or ForkSearch(sys)
    while not search.exhausted and search.expanded < budget:
        fs = search.run(budget - search.expanded)
        if fs:
            return fs[0], search
    return None, search


# ---------------------------------------------------------------------------
# cover


@dataclass
class CloverResult:
    basis: list
    partial: bool
    nodes: int


class CloverSearch:
    """Resumable cover computation with global subsumption.

    Besides the tree it keeps the covering graph: every successor either
    becomes a node or gets an edge to a node dominating it, so each trace
    of the system labels a path of the graph.
    """

    def __init__(self, sys: System):
        self.sys = sys
        self.configs = [sys.initial]
        self.parent = [None]
        self.letter = [None]
        self.edges: list = []  # (src, letter, dst)
        self.buckets: dict = {sys.key(sys.initial): [0]}
        self.queue = deque([0])
        self.expanded = 0

    @property
    def done(self) -> bool:
        return not self.queue

    def _dominator(self, c, skip=None):
        for i in self.buckets.get(self.sys.key(c), ()):
            if i != skip and self.sys.leq(c, self.configs[i]):
                return i
        return None

    def _path_word(self, anc, nid):
        w = []
        while nid != anc:
            w.append(self.letter[nid])
            nid = self.parent[nid]
        return tuple(reversed(w))

    def run(self, max_nodes: int) -> bool:
        sys = self.sys
        n = 0
        while self.queue and n < max_nodes:
            nid = self.queue.popleft()
            n += 1
            self.expanded += 1
            conf = self.configs[nid]
            for a in sys.alphabet:
                c = sys.step(conf, a)
                if c is None:
                    continue
                dom = self._dominator(c)
                if dom is not None:
                    self.edges.append((nid, a, dom))
                    continue
                new_id = len(self.configs)
                self.configs.append(c)
                self.parent.append(nid)
                self.letter.append(a)
                anc = nid
                while anc is not None:
                    ac = self.configs[anc]
                    cur = self.configs[new_id]
                    if sys.leq(ac, cur) and not sys.leq(cur, ac):
                        acc = sys.lub_accelerate(cur, self._path_word(anc, new_id))
                        if acc is not None:
                            self.configs[new_id] = acc
                    anc = self.parent[anc]
                final = self.configs[new_id]
                dom = self._dominator(final)
                if dom is not None:
                    self.configs.pop()
                    self.parent.pop()
                    self.letter.pop()
                    self.edges.append((nid, a, dom))
                    continue
                self.buckets.setdefault(sys.key(final), []).append(new_id)
                self.edges.append((nid, a, new_id))
                self.queue.append(new_id)
        return self.done

    def result(self) -> CloverResult:
        return CloverResult(maximal(self.sys, self.configs), not self.done, self.expanded)

    def candidate_expression(self, max_cycles: int = 64) -> Optional[BoundedExpression]:
        """Linearize the covering graph: components in topological order,
        each contributing its cycles, then its outgoing letters."""
        n, succ = _minimize_graph(len(self.configs), self.edges, tuple(self.sys.alphabet))
        comps = _sccs(n, succ)  # reverse topological order
        comp_of = {v: i for i, comp in enumerate(comps) for v in comp}
        words: list = []
        for ci in reversed(range(len(comps))):
            comp = comps[ci]
            members = set(comp)
            inner = [(u, a, v) for u in comp for a, v in succ.get(u, ()) if v in members]
            if inner:
                for cyc in _simple_cycles(comp, succ, members, max_cycles):
                    flat = [a for a in cyc]
                    words.extend((a,) for a in flat)
                    for i in range(len(flat)):
                        words.append(tuple(flat[i:] + flat[:i]))
                    words.extend((a,) for a in flat)
            for u in comp:
                for a, v in succ.get(u, ()):
                    if comp_of[v] != ci:
                        words.append((a,))
        words = simplify_words(words)
        if not words:
            words = [(self.sys.alphabet.symbols[0],)]
        return BoundedExpression(tuple(words))


def _minimize_graph(n: int, edges, alphabet) -> tuple:
    """Merge language-equivalent nodes of a deterministic, all-accepting graph.

    Returns the number of classes and the successor lists on classes; the
    root stays class 0.
    """
    delta = [dict() for _ in range(n)]
    for u, a, v in edges:
        delta[u][a] = v
    block = [0] * n
    count = 1
    while True:
        sig = {}
        new = [0] * n
        for v in range(n):
            key = (block[v],) + tuple(block[delta[v][a]] if a in delta[v] else -1 for a in alphabet)
            new[v] = sig.setdefault(key, len(sig))
        if len(sig) == count:
            break
        block, count = new, len(sig)
    # renumber so that the root's class is 0
    ren = {block[0]: 0}
    for v in range(n):
        ren.setdefault(block[v], len(ren))
    succ: dict = {}
    done = set()
    for v in range(n):
        b = ren[block[v]]
        if b in done:
            continue
        done.add(b)
        succ[b] = [(a, ren[block[delta[v][a]]]) for a in alphabet if a in delta[v]]
    return len(ren), succ


def _sccs(n: int, succ: dict) -> list:
    """Tarjan, iteratively; components come out in reverse topological order."""
    index = [None] * n
    low = [0] * n
    on = [False] * n
    stack: list = []
    comps: list = []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            nbrs = succ.get(v, ())
            recurse = False
            while i < len(nbrs):
                w = nbrs[i][1]
                i += 1
                if index[w] is None:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comps


def _simple_cycles(comp, succ, members, limit) -> list:
    """Up to ``limit`` simple cycles (as letter lists) inside one component."""
    out = []
    order = {v: i for i, v in enumerate(comp)}
    for s in comp:
        stack = [(s, [], {s})]
        while stack and len(out) < limit:
            v, word, seen = stack.pop()
            for a, w in succ.get(v, ()):
                if w not in members or order[w] < order[s]:
                    continue
                if w == s:
                    out.append(word + [a])
                elif w not in seen:
                    stack.append((w, word + [a], seen | {w}))
        if len(out) >= limit:
            break
    return out


def clover(sys: System, budget: int = DEFAULT_NODE_BUDGET) -> CloverResult:
    """Maximal elements of the cover, via accelerations along tree paths."""
    search = CloverSearch(sys)
    search.run(budget)
    return search.result()


def maximal(sys: System, cs) -> list:
    out: list = []
    for c in cs:
        if any(sys.leq(c, d) for d in out):
            continue
        out = [d for d in out if not sys.leq(d, c)]
        out.append(c)
    return out


def cover_prune(sys: System, basis) -> callable:
    return lambda c: any(sys.leq(c, m) for m in basis)


# ---------------------------------------------------------------------------
# verdicts


def shrink_expression(sys: System, expr: BoundedExpression, res: InclusionResult, prune=None) -> tuple:
    """Drop words greedily while the trace set stays included."""
    words = list(expr.words)
    i = 0
    while i < len(words) and len(words) > 1:
        trial = simplify_words(words[:i] + words[i + 1:])
        r = check_trace_inclusion(sys, BoundedExpression(tuple(trial)), prune, detail=True)
        if r.included:
            words, res = trial, r
        else:
            i += 1
    return BoundedExpression(tuple(words)), res


@dataclass
class Bounded:
    expr: BoundedExpression
    transcript: dict
    kind: str = "bounded"


@dataclass
class Unbounded:
    fork: ForkWitness
    kind: str = "unbounded"


@dataclass
class Unknown:
    report: dict
    kind: str = "unknown"


Verdict = Bounded | Unbounded | Unknown


def decide_boundedness(sys: System, node_budget: int = DEFAULT_NODE_BUDGET,
                       expr_budget: int = DEFAULT_EXPR_BUDGET, chunk: int = 512,
                       time_limit: float | None = None) -> Verdict:
    """Round robin between the fork search and candidate expressions.

    Candidates come first from the covering graph and the finished fork
    tree, then from the fair enumeration.  Node budgets are shared by the
    fork tree and the cover computation.
    """
    deadline = None if time_limit is None else time.perf_counter() + time_limit
    search = ForkSearch(sys)
    cover = CloverSearch(sys)
    exprs = enumerate_bounded_expressions(sys.alphabet)
    tried = 0
    cover_done = tree_done = False
    prune = None
    stats = {"nodes": 0, "cover_nodes": 0, "expressions": 0}

    def certify(expr, source):
        res = check_trace_inclusion(sys, expr, prune, detail=True)
        if res.included:
            if res.seconds < 0.25 and len(expr.words) <= 32:
                expr, res = shrink_expression(sys, expr, res, prune)
            tr = res.to_json()
            tr["source"] = source
            tr.update(stats)
            return Bounded(expr, tr)
        return None

    while True:
        if not search.exhausted and search.expanded < node_budget:
            fs = search.run(min(chunk, node_budget - search.expanded), deadline=deadline)
            stats["nodes"] = search.expanded
            for f in fs:
                if f.check(sys) is None:
                    return Unbounded(f)
        if not cover.done and cover.expanded < node_budget:
            cover.run(min(chunk, node_budget - cover.expanded))
            stats["cover_nodes"] = cover.expanded
        if cover.done and not cover_done:
            cover_done = True
            basis = maximal(sys, cover.configs)
            prune = cover_prune(sys, basis)
            v = certify(cover.candidate_expression(), "cover")
            if v is not None:
                return v
        if search.exhausted and not tree_done:
            tree_done = True
            v = certify(search.candidate_expression(), "tree")
            if v is not None:
                return v
        if tried < expr_budget:
            expr = next(exprs)
            tried += 1
            stats["expressions"] = tried
            v = certify(expr, "enumeration")
            if v is not None:
                return v
        nodes_left = ((not search.exhausted and search.expanded < node_budget)
                      or (not cover.done and cover.expanded < node_budget))
        if not nodes_left and tried >= expr_budget:
            return Unknown(dict(stats, reason="budget exhausted"))
        if deadline is not None and time.perf_counter() > deadline:
            return Unknown(dict(stats, reason="time limit"))


# ---------------------------------------------------------------------------
# replay helpers


def find_concretization(sys: System, w: AcceleratedWord, suffix=(), K: int = 32,
                        start=None) -> Optional[tuple]:
    """Loop counts k_i <= K making the concretized word plus ``suffix`` a trace."""
    start = sys.initial if start is None else start
    suffix = tuple(suffix)
    n = w.loop_count
    for k in range(K, -1, -1):
        counts = (k,) * n
        if sys.run(start, w.concretize(counts) + suffix) is not None:
            return counts
        if n == 0:
            return None
    segs = w.segments

    def dfs(i, c, counts):
        if i == len(segs):
            return counts if sys.run(c, suffix) is not None else None
        seg = segs[i]
        if isinstance(seg, Plain):
            d = sys.run(c, seg.word)
            return None if d is None else dfs(i + 1, d, counts)
        cur = c
        options = []
        for k in range(K + 1):
            options.append((k, cur))
            cur = sys.run(cur, seg.word)
            if cur is None:
                break
        for k, d in reversed(options):
            r = dfs(i + 1, d, counts + (k,))
            if r is not None:
                return r
        return None

    return dfs(0, start, ())


def pumping_word(fork: ForkWitness, m: int) -> AcceleratedWord:
    return fork.stem + fork.a_branch + AcceleratedWord.plain(fork.b_branch * m)
