"""Backward coverability over any system honouring the core contract."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .core import System, UnsupportedModelError, UsageError


@dataclass
class UpSet:
    """Upward closure of a finite basis of plain configurations."""

    basis: list

    def __contains__(self, item):  # needs a system for the order
        raise TypeError("use UpSet.contains(sys, c)")

    def contains(self, sys: System, c) -> bool:
        return any(sys.leq(m, c) for m in self.basis)

    def __len__(self):
        return len(self.basis)

    def __iter__(self):
        return iter(self.basis)


def minimize(sys: System, cs: Iterable) -> list:
    out: list = []
    for c in dict.fromkeys(cs):
        if any(sys.leq(d, c) for d in out):
            continue
        out = [d for d in out if not sys.leq(c, d)]
        out.append(c)
    return out


@dataclass
class Saturation:
    covered: bool
    basis: list
    iterations: int = 0
    witness: Optional[object] = None
    stats: dict = field(default_factory=dict)


def saturate(sys: System, init, target: Iterable, prune: Callable | None = None,
             early_exit: bool = True) -> Saturation:
    """Compute a basis of Pred*(up(target)).

    ``prune(c)`` may reject basis elements known to be uncoverable from the
    start configuration; it must only reject such elements.
    """
    target = list(target)
    for m in target:
        if sys.is_limit(m):
            raise UsageError(f"limit configuration {sys.format_config(m)} in a coverability target")
    buckets: dict = {}
    alive: set = set()
    queue: deque = deque()
    iterations = 0

    def insert(c) -> bool:
        k = sys.key(c)
        bucket = buckets.setdefault(k, [])
        for d in bucket:
            if sys.leq(d, c):
                return False
        keep = []
        for d in bucket:
            if sys.leq(c, d):
                alive.discard(d)
            else:
                keep.append(d)
        keep.append(c)
        buckets[k] = keep
        alive.add(c)
        queue.append(c)
        return True

    for m in target:
        if prune is not None and not prune(m):
            continue
        insert(m)
        if early_exit and sys.leq(m, init):
            return Saturation(True, [m], 0, witness=m)
    while queue:
        m = queue.popleft()
        if m not in alive:
            continue
        iterations += 1
        for a in sys.alphabet:
            for p in sys.pred_basis([m], a):
                if prune is not None and not prune(p):
                    continue
                if insert(p) and early_exit and sys.leq(p, init):
                    return Saturation(True, list(alive), iterations, witness=p)
    basis = [c for b in buckets.values() for c in b]
    covered = any(sys.leq(m, init) for m in basis)
    return Saturation(covered, basis, iterations)


def backward_coverable(sys: System, init, target, prune: Callable | None = None) -> bool:
    basis = target.basis if isinstance(target, UpSet) else list(target)
    return saturate(sys, init, basis, prune).covered


def language_empty(sys: System, final, prune: Callable | None = None) -> bool:
    return not backward_coverable(sys, sys.initial, final, prune)


def _joins(sys: System, x, y) -> list:
    if hasattr(sys, "join_basis"):
        return sys.join_basis(x, y)
    j = sys.join(x, y)
    return [] if j is None else [j]


def check_determinism(sys: System) -> bool:
    """True iff no reachable configuration enables two same-label transitions."""
    if not hasattr(sys, "domain_bases"):
        raise UnsupportedModelError(f"{type(sys).__name__} exposes no transition domains")
    doms = sys.domain_bases()
    for i in range(len(doms)):
        for j in range(i + 1, len(doms)):
            (la, ta, ba), (lb, tb, bb) = doms[i], doms[j]
            if la != lb:
                continue
            joint = []
            for x in ba:
                for y in bb:
                    joint.extend(_joins(sys, x, y))
            if joint and backward_coverable(sys, sys.initial, minimize(sys, joint)):
                return False
    return True
