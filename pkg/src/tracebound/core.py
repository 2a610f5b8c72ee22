"""Class-independent machinery shared by every system class.

A *system* is a complete deterministic WSTS exposed through a handful of
methods (see :class:`System`).  Configurations are plain immutable Python
values (tuples, strings, frozensets) so they hash, compare and travel
between threads freely.
"""
from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Iterator, Sequence

Word = tuple  # tuple[str, ...]


class TraceboundError(Exception):
    """Base class for errors raised by this package."""


class ModelError(TraceboundError):
    """A model is malformed or inconsistent (bad arcs, mismatched alphabets)."""


class UnsupportedModelError(ModelError):
    pass


class UsageError(TraceboundError, ValueError):
    """An operation was called outside its domain (empty loop, limit target)."""


class PreconditionError(TraceboundError):
    """A semantic precondition failed; ``witness`` explains why."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class NondeterminismError(ModelError):
    pass


class ControlViolation(AssertionError):
    """A growth bound that must hold for every run was exceeded."""


# Growth-bound assertions are opt-in: they cost a few comparisons per step.
CONTROL_CHECKS = os.environ.get("TRACEBOUND_CHECK_CONTROL", "").lower() in ("1", "true", "yes")
control_stats: Counter = Counter()


def set_control_checks(enabled: bool) -> None:
    global CONTROL_CHECKS
    CONTROL_CHECKS = enabled


def control_assert(kind: str, ok: bool, detail: str = "") -> None:
    control_stats[kind] += 1
    if not ok:
        control_stats[kind + ":violations"] += 1
        raise ControlViolation(f"{kind} bound exceeded: {detail}")


# ---------------------------------------------------------------------------
# Alphabets and accelerated words


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(self.symbols)
        if not syms:
            raise ModelError("alphabet must be non-empty")
        if len(set(syms)) != len(syms):
            raise ModelError(f"duplicate symbols in alphabet {syms}")
        object.__setattr__(self, "symbols", syms)

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, a):
        return a in self.symbols

    def index(self, a) -> int:
        return self.symbols.index(a)


@dataclass(frozen=True)
class Plain:
    word: tuple

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))


@dataclass(frozen=True)
class OmegaLoop:
    word: tuple

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        if not self.word:
            raise UsageError("an omega loop needs a non-empty word")


Segment = Plain | OmegaLoop


@dataclass(frozen=True)
class AcceleratedWord:
    """A word of ordinal length below omega squared.

    Alternates finite segments and omega-iterated loops; loop payloads are
    plain words, so accelerations never nest.
    """

    segments: tuple = ()

    def __post_init__(self):
        merged: list = []
        for seg in self.segments:
            if isinstance(seg, Plain):
                if not seg.word:
                    continue
                if merged and isinstance(merged[-1], Plain):
                    merged[-1] = Plain(merged[-1].word + seg.word)
                    continue
            elif not isinstance(seg, OmegaLoop):
                raise UsageError(f"not a segment: {seg!r}")
            merged.append(seg)
        object.__setattr__(self, "segments", tuple(merged))

    @classmethod
    def plain(cls, word: Iterable[str]) -> "AcceleratedWord":
        return cls((Plain(tuple(word)),))

    def __add__(self, other: "AcceleratedWord") -> "AcceleratedWord":
        return AcceleratedWord(self.segments + other.segments)

    def __len__(self):
        return len(self.segments)

    @property
    def is_plain(self) -> bool:
        return all(isinstance(s, Plain) for s in self.segments)

    def first_letter(self):
        for s in self.segments:
            return s.word[0]
        return None

    def letters(self) -> tuple:
        """The finite letters in order, loop payloads counted once."""
        out: tuple = ()
        for s in self.segments:
            out += s.word
        return out

    def plain_word(self) -> tuple:
        if not self.is_plain:
            raise UsageError("accelerated word is not plain")
        return self.letters()

    def concretize(self, counts: Sequence[int]) -> tuple:
        """Replace the i-th omega loop by counts[i] copies of its payload."""
        out: tuple = ()
        it = iter(counts)
        for s in self.segments:
            out += s.word if isinstance(s, Plain) else s.word * next(it)
        return out

    @property
    def loop_count(self) -> int:
        return sum(isinstance(s, OmegaLoop) for s in self.segments)

    def __str__(self):
        parts = []
        for s in self.segments:
            w = " ".join(s.word)
            parts.append(w if isinstance(s, Plain) else f"({w})^w")
        return " . ".join(parts) if parts else "eps"

    def to_json(self) -> list:
        return [{"plain" if isinstance(s, Plain) else "omega": list(s.word)} for s in self.segments]

    @classmethod
    def from_json(cls, data: list) -> "AcceleratedWord":
        segs = []
        for item in data:
            if "plain" in item:
                segs.append(Plain(tuple(item["plain"])))
            elif "omega" in item:
                segs.append(OmegaLoop(tuple(item["omega"])))
            else:
                raise ModelError(f"bad segment {item!r}")
        return cls(tuple(segs))


# ---------------------------------------------------------------------------
# The system contract


class System:
    """Capability contract of a complete deterministic WSTS.

    Subclasses provide ``alphabet``, ``initial`` and override the methods
    below.  ``step`` is a partial function returning ``None`` when the label
    cannot fire.
    """

    alphabet: Alphabet
    initial: Any

    def step(self, c, a):
        raise NotImplementedError

    def leq(self, x, y) -> bool:
        raise NotImplementedError

    def key(self, c) -> Hashable:
        """Partition key: ``leq(x, y)`` implies ``key(x) == key(y)``."""
        return None

    def lub_accelerate(self, c, u: Sequence[str]):
        raise NotImplementedError

    def pred_basis(self, target, a) -> list:
        """Minimal plain predecessors of the upward closure of ``target``."""
        raise NotImplementedError

    def min_basis(self) -> list:
        raise NotImplementedError

    def is_limit(self, c) -> bool:
        return False

    def join(self, x, y):
        raise UnsupportedModelError(f"{type(self).__name__} has no join")

    def enabled(self, c) -> list:
        return [a for a in self.alphabet if self.step(c, a) is not None]

    def check_label(self, a) -> None:
        if a not in self.alphabet:
            raise ModelError(f"label {a!r} is not in the alphabet")

    def run(self, c, word: Iterable[str]):
        for a in word:
            self.check_label(a)
            c = self.step(c, a)
            if c is None:
                return None
        return c

    def format_config(self, c) -> str:
        return repr(c)

    def config_to_json(self, c) -> Any:
        return c

    def config_from_json(self, data) -> Any:
        return data

    def equiv(self, x, y) -> bool:
        return self.leq(x, y) and self.leq(y, x)


def lub_accelerate(s: System, c, u: Sequence[str]):
    """Limit of ``u`` iterated from ``c``, or ``None`` when not increasing."""
    u = tuple(u)
    if not u:
        raise UsageError("acceleration needs a non-empty loop word")
    for a in u:
        s.check_label(a)
    return s.lub_accelerate(c, u)


def apply_accelerated_word(s: System, c, w: AcceleratedWord):
    for seg in w.segments:
        if c is None:
            return None
        if isinstance(seg, Plain):
            c = s.run(c, seg.word)
        else:
            c = lub_accelerate(s, c, seg.word)
    return c


def accelerated_states(s: System, c, w: AcceleratedWord) -> Iterator:
    """Yield the configuration after every single or accelerated step."""
    yield c
    for seg in w.segments:
        if isinstance(seg, Plain):
            for a in seg.word:
                c = s.step(c, a)
                if c is None:
                    return
                yield c
        else:
            c = lub_accelerate(s, c, seg.word)
            if c is None:
                return
            yield c


# ---------------------------------------------------------------------------
# Finite automata


class Dfa(System):
    """Deterministic, possibly partial, finite automaton.

    Doubles as a finite-state system ordered by equality, which is what the
    synchronous product needs from its right-hand factor.
    """

    def __init__(self, states, initial, alphabet, delta, accepting=()):
        self.states = tuple(states)
        self.initial = initial
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
        self.delta = dict(delta)
        self.accepting = frozenset(accepting)
        known = set(self.states)
        if initial not in known:
            raise ModelError(f"initial state {initial!r} not among states")
        for (q, a), r in self.delta.items():
            if q not in known or r not in known:
                raise ModelError(f"transition {(q, a, r)!r} uses an unknown state")
            if a not in self.alphabet:
                raise ModelError(f"transition label {a!r} outside the alphabet")
        if not self.accepting <= known:
            raise ModelError("accepting states must be states")
        self._pred: dict = {}
        for (q, a), r in self.delta.items():
            self._pred.setdefault((r, a), []).append(q)

    def step(self, q, a):
        return self.delta.get((q, a))

    def leq(self, x, y):
        return x == y

    def key(self, c):
        return c

    def lub_accelerate(self, q, u):
        return q if self.run(q, u) == q else None

    def predecessors(self, q, a) -> list:
        return self._pred.get((q, a), [])

    def pred_basis(self, target, a):
        out = []
        for q in target:
            out.extend(self._pred.get((q, a), []))
        return list(dict.fromkeys(out))

    def min_basis(self):
        return list(self.states)

    def join(self, x, y):
        return x if x == y else None

    def accepts(self, word) -> bool:
        q = self.run(self.initial, word)
        return q is not None and q in self.accepting

    def completed(self, sink="__sink__") -> "Dfa":
        if all((q, a) in self.delta for q in self.states for a in self.alphabet):
            return self
        states = self.states + (sink,)
        delta = dict(self.delta)
        for q in states:
            for a in self.alphabet:
                delta.setdefault((q, a), sink)
        return Dfa(states, self.initial, self.alphabet, delta, self.accepting)

    def complement(self) -> "Dfa":
        full = self.completed()
        return Dfa(full.states, full.initial, full.alphabet, full.delta,
                   set(full.states) - set(full.accepting))

    def reachable(self) -> "Dfa":
        seen = {self.initial}
        todo = [self.initial]
        while todo:
            q = todo.pop()
            for a in self.alphabet:
                r = self.delta.get((q, a))
                if r is not None and r not in seen:
                    seen.add(r)
                    todo.append(r)
        states = [q for q in self.states if q in seen]
        delta = {k: v for k, v in self.delta.items() if k[0] in seen}
        return type(self)._rebuild(self, states, delta)

    def _rebuild(self, states, delta):
        return Dfa(states, self.initial, self.alphabet, delta, set(self.accepting) & set(states))

    def trim(self) -> "Dfa":
        """Keep states that are reachable and can still reach acceptance."""
        r = self.reachable()
        alive = set(r.accepting)
        changed = True
        while changed:
            changed = False
            for (q, a), t in r.delta.items():
                if t in alive and q not in alive:
                    alive.add(q)
                    changed = True
        if r.initial not in alive:
            alive.add(r.initial)
        states = [q for q in r.states if q in alive]
        delta = {k: v for k, v in r.delta.items() if k[0] in alive and v in alive}
        return Dfa(states, r.initial, r.alphabet, delta, set(r.accepting) & alive)

    def __repr__(self):
        return f"Dfa(|Q|={len(self.states)}, |Sigma|={len(self.alphabet)})"


class DBuchi(Dfa):
    """Deterministic Buchi automaton; ``accepting`` must be hit infinitely often."""

    def _rebuild(self, states, delta):
        return DBuchi(states, self.initial, self.alphabet, delta, set(self.accepting) & set(states))


class DRabin(Dfa):
    """Deterministic Rabin automaton over a complete transition map."""

    def __init__(self, states, initial, alphabet, delta, pairs):
        super().__init__(states, initial, alphabet, delta, ())
        known = set(self.states)
        self.pairs = tuple((frozenset(e), frozenset(f)) for e, f in pairs)
        for e, f in self.pairs:
            if not (e <= known and f <= known):
                raise ModelError("Rabin pairs must be subsets of the states")

    def _rebuild(self, states, delta):
        keep = set(states)
        return DRabin(states, self.initial, self.alphabet, delta,
                      [(e & keep, f & keep) for e, f in self.pairs])

    def accepts_lasso(self, prefix, loop) -> bool:
        """Membership of ``prefix . loop^omega``; a missing move rejects."""
        q = self.run(self.initial, prefix)
        if q is None or not loop:
            return False
        seen: dict = {}
        visits = []
        while q not in seen:
            seen[q] = len(visits)
            states = [q]
            r = q
            for a in loop:
                r = self.step(r, a)
                if r is None:
                    return False
                states.append(r)
            visits.append(states[:-1])
            q = r
        inf = {s for block in visits[seen[q]:] for s in block}
        return any(not (inf & e) and (inf & f) for e, f in self.pairs)


# ---------------------------------------------------------------------------
# Synchronous product


class ProductSystem(System):
    """Synchronous product of a system with a finite automaton.

    Configurations are pairs ``(s, q)``; the order is ``<=`` on ``s`` and
    equality on ``q``.  Traces are the intersection of both trace sets.
    """

    def __init__(self, left: System, right: Dfa):
        extra = [a for a in right.alphabet if a not in left.alphabet]
        if extra:
            raise ModelError(f"automaton letters {extra} are not system labels")
        self.left = left
        self.right = right
        self.alphabet = left.alphabet
        self.initial = (left.initial, right.initial)

    def step(self, c, a):
        s, q = c
        r = self.right.step(q, a) if a in self.right.alphabet else None
        if r is None:
            return None
        t = self.left.step(s, a)
        if t is None:
            return None
        return (t, r)

    def leq(self, x, y):
        return x[1] == y[1] and self.left.leq(x[0], y[0])

    def key(self, c):
        return (self.left.key(c[0]), c[1])

    def lub_accelerate(self, c, u):
        s, q = c
        if self.right.run(q, u) != q:
            return None
        t = self.left.lub_accelerate(s, u)
        return None if t is None else (t, q)

    def pred_basis(self, target, a):
        out = []
        if a not in self.right.alphabet:
            return out
        for s, q in target:
            preds = self.right.predecessors(q, a)
            if not preds:
                continue
            for p in self.left.pred_basis([s], a):
                out.extend((p, r) for r in preds)
        return out

    def min_basis(self):
        return [(s, q) for s in self.left.min_basis() for q in self.right.states]

    def is_limit(self, c):
        return self.left.is_limit(c[0])

    def join(self, x, y):
        if x[1] != y[1]:
            return None
        j = self.left.join(x[0], y[0])
        return None if j is None else (j, x[1])

    def format_config(self, c):
        return f"({self.left.format_config(c[0])}, {c[1]})"

    def config_to_json(self, c):
        return {"system": self.left.config_to_json(c[0]), "automaton": _jsonable_state(c[1])}

    def config_from_json(self, data):
        return (self.left.config_from_json(data["system"]), _state_from_json(data["automaton"]))


def _jsonable_state(q):
    if isinstance(q, tuple):
        return {"tuple": [_jsonable_state(x) for x in q]}
    if isinstance(q, frozenset):
        return {"set": sorted((_jsonable_state(x) for x in q), key=repr)}
    return q


def _state_from_json(d):
    if isinstance(d, dict) and "tuple" in d:
        return tuple(_state_from_json(x) for x in d["tuple"])
    if isinstance(d, dict) and "set" in d:
        return frozenset(_state_from_json(x) for x in d["set"])
    if isinstance(d, list):
        return tuple(_state_from_json(x) for x in d)
    return d


def synchronous_product(s: System, a: Dfa) -> ProductSystem:
    return ProductSystem(s, a)


def universal_dfa(alphabet) -> Dfa:
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(tuple(alphabet))
    return Dfa(["u"], "u", alphabet, {("u", a): "u" for a in alphabet}, ["u"])


def bfs_traces(s: System, depth: int, start=None) -> set:
    """All traces of length at most ``depth`` (an oracle for small checks)."""
    start = s.initial if start is None else start
    out = {()}
    layer = [((), start)]
    for _ in range(depth):
        nxt = []
        for w, c in layer:
            for a in s.alphabet:
                d = s.step(c, a)
                if d is not None:
                    nxt.append((w + (a,), d))
                    out.add(w + (a,))
        layer = nxt
    return out


def bfs_configs(s: System, depth: int, start=None) -> list:
    """Configurations reachable with at most ``depth`` single steps."""
    start = s.initial if start is None else start
    seen = {start}
    layer = [start]
    for _ in range(depth):
        nxt = []
        for c in layer:
            for a in s.alphabet:
                d = s.step(c, a)
                if d is not None and d not in seen:
                    seen.add(d)
                    nxt.append(d)
        layer = nxt
    return list(seen)
