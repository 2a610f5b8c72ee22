"""Direct LTL semantics on ultimately periodic words, used as a test oracle."""
import random


def eval_lasso(f, prefix, loop):
    w = list(prefix) + list(loop)
    n, p = len(w), len(prefix)

    def nxt(i):
        return i + 1 if i + 1 < n else p

    memo = {}

    def ev(g):
        if g in memo:
            return memo[g]
        op = g[0]
        if op == "true":
            r = [True] * n
        elif op == "false":
            r = [False] * n
        elif op == "atom":
            r = [x == g[1] for x in w]
        elif op == "not":
            r = [not x for x in ev(g[1])]
        elif op == "and":
            a, b = ev(g[1]), ev(g[2])
            r = [x and y for x, y in zip(a, b)]
        elif op == "or":
            a, b = ev(g[1]), ev(g[2])
            r = [x or y for x, y in zip(a, b)]
        elif op == "imp":
            a, b = ev(g[1]), ev(g[2])
            r = [(not x) or y for x, y in zip(a, b)]
        elif op == "X":
            a = ev(g[1])
            r = [a[nxt(i)] for i in range(n)]
        elif op in ("U", "F"):
            a = ev(g[1]) if op == "U" else [True] * n
            b = ev(g[2] if op == "U" else g[1])
            r = list(b)
            # least fixpoint: iterate until stable
            for _ in range(2 * n + 2):
                r = [b[i] or (a[i] and r[nxt(i)]) for i in range(n)]
        elif op in ("R", "G"):
            a = ev(g[1]) if op == "R" else [False] * n
            b = ev(g[2] if op == "R" else g[1])
            r = [True] * n
            for _ in range(2 * n + 2):
                r = [b[i] and (a[i] or r[nxt(i)]) for i in range(n)]
        else:
            raise ValueError(op)
        memo[g] = r
        return r

    return ev(f)[0]


def random_formula(rng: random.Random, letters, depth):
    if depth == 0 or rng.random() < 0.25:
        return ("atom", rng.choice(letters)) if rng.random() < 0.9 else ("true",)
    op = rng.choice(["not", "and", "or", "X", "U", "R", "G", "F", "imp"])
    if op in ("not", "X", "G", "F"):
        return (op, random_formula(rng, letters, depth - 1))
    return (op, random_formula(rng, letters, depth - 1), random_formula(rng, letters, depth - 1))


def rabin_product_empty(lts, init, dra):
    """Emptiness of a finite deterministic LTS times a Rabin automaton.

    ``lts`` maps (state, letter) to state.  A pair is satisfied by a reachable
    strongly connected set avoiding E and meeting F.
    """
    letters = list(dra.alphabet)
    start = (init, dra.initial)
    seen = {start}
    todo = [start]
    succ = {}
    while todo:
        s, q = x = todo.pop()
        out = []
        for a in letters:
            t = lts.get((s, a))
            r = dra.step(q, a)
            if t is None or r is None:
                continue
            out.append((t, r))
        succ[x] = out
        for y in out:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    for E, F in dra.pairs:
        nodes = {x for x in seen if x[1] not in E}
        for x in nodes:
            if x[1] not in F:
                continue
            # x on a cycle within nodes
            stack = [y for y in succ[x] if y in nodes]
            vis = set()
            while stack:
                y = stack.pop()
                if y == x:
                    return False
                if y in vis:
                    continue
                vis.add(y)
                stack.extend(z for z in succ[y] if z in nodes)
    return True


def lts_net(lts, states, init):
    from tracebound.counters import NetTransition, compile_net

    places = tuple(f"s{q}" for q in states)
    ts = [NetTransition(a, pre={f"s{q}": 1}, post={f"s{r}": 1}) for (q, a), r in sorted(lts.items())]
    m0 = tuple(1 if q == init else 0 for q in states)
    return compile_net(places, ts, m0, name="lts")
