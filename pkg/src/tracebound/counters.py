"""Petri nets (plain, reset, transfer) and affine counter systems.

Configurations are tuples over naturals extended with ``OMEGA``.  Every
net flavour compiles down to guarded affine maps ``X -> A X + b``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import core
from .core import Alphabet, ModelError, NondeterminismError, System, UsageError

OMEGA = math.inf


def is_omega(x) -> bool:
    return x == OMEGA


def fmt_value(x) -> str:
    return "ω" if x == OMEGA else str(int(x))


def weight(X) -> int:
    """Largest finite coordinate (0 for the all-omega vector)."""
    return max([0] + [int(x) for x in X if x != OMEGA])


def _dot(row, X):
    s = 0
    for a, x in zip(row, X):
        if a:
            s += a * x  # a >= 1 so a * inf stays inf
    return s


@dataclass(frozen=True)
class AffineTransition:
    label: str
    guard: tuple
    A: tuple  # rows
    b: tuple

    def __post_init__(self):
        k = len(self.guard)
        object.__setattr__(self, "guard", tuple(int(g) for g in self.guard))
        object.__setattr__(self, "A", tuple(tuple(int(v) for v in row) for row in self.A))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        if len(self.A) != k or any(len(r) != k for r in self.A) or len(self.b) != k:
            raise ModelError(f"transition {self.label!r}: dimensions disagree")
        if any(v < 0 for row in self.A for v in row):
            raise ModelError(f"transition {self.label!r}: matrix entries must be natural")
        if any(g < 0 for g in self.guard):
            raise ModelError(f"transition {self.label!r}: guard must be natural")

    @property
    def dim(self) -> int:
        return len(self.guard)

    def apply(self, X):
        """Guarded evaluation; ``None`` when not firable."""
        if any(x < g for x, g in zip(X, self.guard)):
            return None
        out = tuple(_dot(row, X) + c for row, c in zip(self.A, self.b))
        if any(y < 0 for y in out):
            return None
        return out

    def compose(self, then: "AffineTransition") -> tuple:
        """Matrix and offset of ``then . self`` (self fires first)."""
        k = self.dim
        A = tuple(tuple(sum(then.A[i][m] * self.A[m][j] for m in range(k)) for j in range(k))
                  for i in range(k))
        b = tuple(sum(then.A[i][m] * self.b[m] for m in range(k)) + then.b[i] for i in range(k))
        return A, b


def identity(k: int) -> tuple:
    return tuple(tuple(int(i == j) for j in range(k)) for i in range(k))


@dataclass(frozen=True)
class NetTransition:
    """One transition of a (reset/transfer) Petri net, keyed by place name.

    ``reads`` is sugar for a place both in ``pre`` and ``post`` with weight 1.
    """

    label: str
    pre: Mapping[str, int] = field(default_factory=dict)
    post: Mapping[str, int] = field(default_factory=dict)
    resets: frozenset = frozenset()
    transfers: Mapping[str, str] = field(default_factory=dict)
    reads: frozenset = frozenset()


def compile_net(places: Sequence[str], transitions: Sequence[NetTransition], initial,
                name: str = "net") -> "CounterSystem":
    """Compile a net into an affine counter system.

    Firing is ``X >= pre`` followed by ``A (X - pre) + post``: resets zero a
    row, a transfer ``p -> p'`` moves column ``p`` onto row ``p'``.  Hence
    ``G = pre`` and ``b = post - A pre``.
    """
    places = tuple(places)
    if len(set(places)) != len(places):
        raise ModelError("duplicate place names")
    idx = {p: i for i, p in enumerate(places)}
    k = len(places)

    def vec(m: Mapping[str, int], what: str, label: str):
        v = [0] * k
        for p, n in m.items():
            if p not in idx:
                raise ModelError(f"transition {label!r}: unknown place {p!r} in {what}")
            if n < 0:
                raise ModelError(f"transition {label!r}: negative weight on {p!r}")
            v[idx[p]] += int(n)
        return v

    out = []
    for t in transitions:
        pre = vec(t.pre, "pre", t.label)
        post = vec(t.post, "post", t.label)
        for p in t.reads:
            if p not in idx:
                raise ModelError(f"transition {t.label!r}: unknown place {p!r} in reads")
            pre[idx[p]] += 1
            post[idx[p]] += 1
        resets = set(t.resets)
        srcs = set(t.transfers)
        if resets & srcs:
            raise ModelError(f"transition {t.label!r}: places {sorted(resets & srcs)} both reset and transferred")
        for p in resets | srcs | set(t.transfers.values()):
            if p not in idx:
                raise ModelError(f"transition {t.label!r}: unknown place {p!r}")
        A = [list(r) for r in identity(k)]
        for p in resets:
            A[idx[p]][idx[p]] = 0
        for p, q in t.transfers.items():
            if p == q:
                continue
            i, j = idx[p], idx[q]
            A[i][i] = 0
            A[j][i] += 1
        b = [post[i] - sum(A[i][m] * pre[m] for m in range(k)) for i in range(k)]
        out.append(AffineTransition(t.label, tuple(pre), tuple(map(tuple, A)), tuple(b)))
    cs = CounterSystem(out, initial, places=places, name=name)
    cs.net_transitions = tuple(transitions)  # kept for serialization
    return cs


class CounterSystem(System):
    """Affine counter system completed over (N + omega)^k.

    Several transitions may share a label; ``step`` then fires the unique
    enabled one and raises :class:`NondeterminismError` if two are enabled.
    """

    def __init__(self, transitions: Sequence[AffineTransition], initial, places=None, name="acs"):
        transitions = tuple(transitions)
        if not transitions:
            raise ModelError("a counter system needs at least one transition")
        k = transitions[0].dim
        if any(t.dim != k for t in transitions):
            raise ModelError("transitions have different dimensions")
        initial = tuple(initial)
        if len(initial) != k:
            raise ModelError(f"initial vector has dimension {len(initial)}, expected {k}")
        if any(x == OMEGA or x < 0 for x in initial):
            raise ModelError("initial configuration must be finite and natural")
        self.dim = k
        self.transitions = transitions
        self.places = tuple(places) if places is not None else tuple(f"x{i}" for i in range(k))
        if len(self.places) != k:
            raise ModelError("place list does not match the dimension")
        self.name = name
        self.net_transitions = None
        self.initial = tuple(int(x) for x in initial)
        self.alphabet = Alphabet(tuple(dict.fromkeys(t.label for t in transitions)))
        self.by_label: dict = {}
        for t in transitions:
            self.by_label.setdefault(t.label, []).append(t)
        self.m1 = max(1, max(v for t in transitions for row in t.A for v in row))
        self.m2 = max(0, max(v for t in transitions for v in t.b))

    @property
    def free_labeled(self) -> bool:
        return all(len(ts) == 1 for ts in self.by_label.values())

    def _check_dim(self, X):
        if len(X) != self.dim:
            raise ModelError(f"configuration {X!r} has wrong dimension")

    def step(self, X, a):
        self._check_dim(X)
        res = None
        for t in self.by_label.get(a, ()):
            y = t.apply(X)
            if y is not None:
                if res is not None and y != res:
                    raise NondeterminismError(f"label {a!r} has two enabled transitions at {self.format_config(X)}")
                res = y
        if res is not None and core.CONTROL_CHECKS:
            bound = self.dim * self.m1 * weight(X) + self.m2
            core.control_assert("affine.step", weight(res) <= bound,
                                f"rho={weight(res)} > {bound}")
        return res

    def leq(self, x, y):
        if len(x) != len(y):
            raise ModelError("comparing vectors of different dimensions")
        return all(a <= b for a, b in zip(x, y))

    def lub_accelerate(self, X, u):
        return accelerate_affine(self, X, u)

    def pred_basis(self, target, a):
        out = []
        for m in target:
            for t in self.by_label.get(a, ()):
                out.extend(pred_basis_affine(t, m))
        return minimal_vectors(out)

    def min_basis(self):
        return [tuple([0] * self.dim)]

    def is_limit(self, X):
        return any(x == OMEGA for x in X)

    def join(self, x, y):
        return tuple(max(a, b) for a, b in zip(x, y))

    def domain_bases(self) -> list:
        """(label, transition, basis of its domain) for every transition."""
        zero = tuple([0] * self.dim)
        return [(t.label, t, pred_basis_affine(t, zero)) for t in self.transitions]

    def format_config(self, X):
        return "(" + ",".join(fmt_value(x) for x in X) + ")"

    def config_to_json(self, X):
        return ["omega" if x == OMEGA else int(x) for x in X]

    def config_from_json(self, data):
        X = tuple(OMEGA if v == "omega" else int(v) for v in data)
        self._check_dim(X)
        return X

    def __repr__(self):
        return f"CounterSystem({self.name}, k={self.dim}, |T|={len(self.transitions)})"


def fire_affine(sys: CounterSystem, X, label):
    sys.check_label(label)
    return sys.step(tuple(X), label)


def accelerate_affine(sys: CounterSystem, X, u):
    """lub of u^n(X), or ``None`` unless u fires from X and u(X) >= X.

    A coordinate still growing between the (k+1)-th and (2k+1)-th iterate
    grows forever; otherwise it is frozen from the k-th iterate on.
    """
    u = tuple(u)
    if not u:
        raise UsageError("acceleration needs a non-empty loop word")
    X = tuple(X)
    k = sys.dim
    Z = [X]
    for n in range(2 * k + 1):
        nxt = sys.run(Z[-1], u)
        if nxt is None:
            return None
        if n == 0 and not sys.leq(X, nxt):
            return None
        Z.append(nxt)
    res = tuple(
        OMEGA if Z[2 * k + 1][j] == OMEGA or Z[2 * k + 1][j] > Z[k + 1][j] else Z[k][j]
        for j in range(k)
    )
    if core.CONTROL_CHECKS:
        n = len(u)
        bound = (k * sys.m1) ** (n * k) * (weight(X) + n * k * sys.m2)
        core.control_assert("affine.accelerate", weight(res) <= bound,
                            f"rho={weight(res)} > {bound}")
    return res


def pred_basis_affine(t: AffineTransition, m) -> list:
    """Minimal X with X >= G and A X + b >= m.

    Coordinates appearing only in single-entry rows get a closed-form lower
    bound; the rest are enumerated in the box bounded by max(m - b, 0).
    """
    m = tuple(m)
    if any(x == OMEGA for x in m):
        raise UsageError("pred_basis needs finite target vectors")
    k = t.dim
    c = [max(mi - bi, 0) for mi, bi in zip(m, t.b)]
    low = list(t.guard)
    coupled_rows = []
    for j in range(k):
        nz = [i for i in range(k) if t.A[j][i]]
        if not nz:
            if c[j] > 0:
                return []
        elif len(nz) == 1:
            i = nz[0]
            low[i] = max(low[i], -(-c[j] // t.A[j][i]))
        elif c[j] > 0:
            coupled_rows.append(j)
    free = sorted({i for j in coupled_rows for i in range(k) if t.A[j][i]})
    if not free:
        return [tuple(low)]
    cmax = max(c)
    ranges = [range(low[i], max(low[i], cmax) + 1) for i in free]
    sols = []
    for vals in itertools.product(*ranges):
        X = list(low)
        for i, v in zip(free, vals):
            X[i] = v
        if all(_dot(t.A[j], X) >= c[j] for j in coupled_rows):
            sols.append(tuple(X))
    return minimal_vectors(sols)


def minimal_vectors(vs) -> list:
    vs = sorted(set(vs), key=lambda v: (sum(v), v))
    out: list = []
    for v in vs:
        if not any(all(a <= b for a, b in zip(w, v)) for w in out):
            out.append(v)
    return out
