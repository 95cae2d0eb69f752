"""Decision problems as structure classes, brute-force deciders, generators.

The deciders here are plain imperative algorithms (BFS, enumeration,
backtracking).  They never touch the formula evaluator, which lets the
tests use them as oracles for it.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .logic import Formula, parse
from .structures import (GRAPH, Structure, StructureError, Vocabulary, graph,
                         new_structure)

CNF = Vocabulary((("P", 2), ("N", 2)))
ALT_GRAPH = Vocabulary((("E", 2), ("U", 1)))
STRING = Vocabulary((("S", 1),))

PROBLEMS = ("reach", "reachd", "reacha", "3sat", "3col", "maj")


def _need(A: Structure, vocab: Vocabulary, what: str):
    if A.vocab != vocab:
        raise StructureError(f"{what} expects vocabulary {vocab}, got {A.vocab}")


def successors(G: Structure) -> list[list[int]]:
    out = [[] for _ in range(G.size)]
    for a, b in sorted(G.tables["E"]):
        out[a].append(b)
    return out


def reachable_from(G: Structure, source: int = 0) -> set[int]:
    """Vertices reachable from ``source`` (including itself), by BFS."""
    succ = successors(G)
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def bfs_distances(G: Structure, source: int = 0) -> dict[int, int]:
    succ = successors(G)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def layer_counts(G: Structure) -> tuple[int, ...]:
    """``n_d`` for d = 0..n-1: vertices within distance ``d`` of min."""
    dist = bfs_distances(G)
    return tuple(sum(1 for v in dist.values() if v <= d) for d in range(G.size))


def decide_reach(G: Structure) -> bool:
    if G.vocab != GRAPH and G.vocab != ALT_GRAPH:
        _need(G, GRAPH, "reach")
    return G.size - 1 in reachable_from(G)


def outdegree(G: Structure) -> int:
    return max((len(s) for s in successors(G)), default=0)


def decide_reachd(G: Structure) -> bool:
    """Outdegree at most 1 everywhere and max reached from min by following
    the unique out-edges."""
    _need(G, GRAPH, "reachd")
    succ = successors(G)
    if any(len(s) > 1 for s in succ):
        return False
    v = 0
    for _ in range(G.size):
        if v == G.size - 1:
            return True
        if not succ[v]:
            return False
        v = succ[v][0]
    return v == G.size - 1


def decide_reacha(G: Structure) -> bool:
    """Alternating reachability: least fixpoint of

    * max is winning;
    * an existential vertex is winning if some successor is;
    * a universal vertex (``U``) is winning if it has a successor and all
      successors are winning.

    Answers whether min is winning.
    """
    _need(G, ALT_GRAPH, "reacha")
    n = G.size
    succ = successors(G)
    universal = {u for (u,) in G.tables["U"]}
    win = {n - 1}
    changed = True
    while changed:
        changed = False
        for v in range(n):
            if v in win:
                continue
            if v in universal:
                ok = bool(succ[v]) and all(w in win for w in succ[v])
            else:
                ok = any(w in win for w in succ[v])
            if ok:
                win.add(v)
                changed = True
    return 0 in win


# ------------------------------------------------------------------ 3SAT

def clauses(A: Structure) -> list[list[tuple[int, bool]]]:
    """Clause ``c`` as (variable, positive) pairs: positive occurrences by
    variable index, then negative ones."""
    _need(A, CNF, "cnf")
    out = []
    for c in range(A.size):
        pos = [(v, True) for v in range(A.size) if (v, c) in A.tables["P"]]
        neg = [(v, False) for v in range(A.size) if (v, c) in A.tables["N"]]
        out.append(pos + neg)
    return out


def is_3cnf(A: Structure) -> bool:
    return all(len(c) <= 3 for c in clauses(A))


def cnf_structure(n: int, cnf: Iterable[Iterable[int]]) -> Structure:
    """Build from DIMACS-like clauses over variables ``1..n`` (``-v`` is a
    negated literal); clause ``i`` gets index ``i``.  Missing clause slots
    stay empty."""
    P, N = set(), set()
    cnf = [list(c) for c in cnf]
    if len(cnf) > n:
        raise StructureError(f"{len(cnf)} clauses do not fit in size {n}")
    for c, clause in enumerate(cnf):
        for lit in clause:
            v = abs(lit) - 1
            if not 0 <= v < n or lit == 0:
                raise StructureError(f"literal {lit} out of range for size {n}")
            (P if lit > 0 else N).add((v, c))
    return new_structure(CNF, n, {"P": P, "N": N})


def decide_3sat(A: Structure) -> bool:
    """Satisfiability by trying all 2^n assignments.

    Every clause index is a clause slot; a slot with no occurrences is
    unused and counts as satisfied.
    """
    _need(A, CNF, "3sat")
    n = A.size
    pos = [0] * n
    neg = [0] * n
    for v, c in A.tables["P"]:
        pos[c] |= 1 << v
    for v, c in A.tables["N"]:
        neg[c] |= 1 << v
    full = (1 << n) - 1
    for a in range(1 << n):
        if all((pos[c] & a) or (neg[c] & ~a & full) or not (pos[c] | neg[c])
               for c in range(n)):
            return True
    return False


# ------------------------------------------------------------------ 3COL

def three_coloring(G: Structure) -> dict[int, int] | None:
    """A proper 3-coloring (edges read as undirected), or ``None``.

    Backtracking with forward checking and most-constrained-vertex order.
    The uncolored part is split into connected components that are solved
    independently, so a failure never backtracks into an unrelated part of
    the graph.  Isolated vertices are colored 0.
    """
    n = G.size
    adj = [set() for _ in range(n)]
    for a, b in G.tables["E"]:
        if a == b:
            return None
        adj[a].add(b)
        adj[b].add(a)
    colors = {v: 0 for v in range(n) if not adj[v]}
    domain = [0b111] * n
    ncolors = [0]  # colors 0..ncolors-1 are in use somewhere

    def components(todo):
        left, out = set(todo), []
        while left:
            root = left.pop()
            comp, stack = [root], [root]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w in left:
                        left.remove(w)
                        comp.append(w)
                        stack.append(w)
            out.append(comp)
        return out

    def solve(todo):
        if not todo:
            return True
        comps = components(todo)
        if len(comps) > 1:
            saved = (dict(colors), list(domain), ncolors[0])
            for comp in sorted(comps, key=len):
                if not solve(comp):
                    colors.clear()
                    colors.update(saved[0])
                    domain[:] = saved[1]
                    ncolors[0] = saved[2]
                    return False
            return True
        comp = comps[0]
        v = min(comp, key=lambda u: (bin(domain[u]).count("1"), -len(adj[u]), u))
        rest = [u for u in comp if u != v]
        opened = ncolors[0]
        for c in range(3):
            if not domain[v] >> c & 1:
                continue
            # colors above the ones in use are interchangeable
            if c > opened:
                break
            colors[v] = c
            ncolors[0] = max(opened, c + 1)
            changed = []
            ok = True
            for w in adj[v]:
                if w not in colors and domain[w] >> c & 1:
                    domain[w] &= ~(1 << c)
                    changed.append(w)
                    if not domain[w]:
                        ok = False
                        break
            if ok and solve(rest):
                return True
            for w in changed:
                domain[w] |= 1 << c
            del colors[v]
            ncolors[0] = opened
        return False

    todo = [v for v in range(n) if adj[v]]
    if not solve(todo):
        return None
    return dict(sorted(colors.items()))


def decide_3col(G: Structure) -> bool:
    _need(G, GRAPH, "3col")
    return three_coloring(G) is not None


def three_color_sentence() -> Formula:
    """The existential second-order sentence for 3-colorability."""
    return parse(
        "exR R/1. exR Y/1. exR B/1. all x. all y. "
        "((R(x) | Y(x) | B(x)) & "
        "(E(x,y) -> !(R(x) & R(y)) & !(Y(x) & Y(y)) & !(B(x) & B(y))))", GRAPH)


def reach_sentence() -> Formula:
    return parse("TC[(x;y). E(x,y)](min;max)", GRAPH)


def outdegree_le1_sentence() -> Formula:
    return parse("all x. all y. all z. (E(x,y) & E(x,z) -> y=z)", GRAPH)


def reachd_sentence() -> Formula:
    """Deterministic reachability together with outdegree at most 1."""
    return parse("DTC[(x;y). E(x,y)](min;max) & "
                 "all x. all y. all z. (E(x,y) & E(x,z) -> y=z)", GRAPH)


# ------------------------------------------------------------------- MAJ

def decide_maj(w) -> bool:
    """Strict majority of ones; ``w`` is a bit string or a string structure."""
    if isinstance(w, Structure):
        _need(w, STRING, "maj")
        ones = len(w.tables["S"])
        return 2 * ones > w.size
    if set(w) - {"0", "1"}:
        raise ValueError("bit string expected")
    return 2 * w.count("1") > len(w)


def string_structure(w: str) -> Structure:
    return new_structure(STRING, len(w), {"S": [(i,) for i, b in enumerate(w) if b == "1"]})


DECIDERS = {
    "reach": decide_reach, "reachd": decide_reachd, "reacha": decide_reacha,
    "3sat": decide_3sat, "3col": decide_3col, "maj": decide_maj,
}


# ------------------------------------------------------------- generators

def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")


def _check_p(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def path(n: int) -> Structure:
    _check_n(n)
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Structure:
    _check_n(n)
    return graph(n, [(i, (i + 1) % n) for i in range(n)] if n > 1 else [])


def complete(n: int) -> Structure:
    _check_n(n)
    return graph(n, [(i, j) for i in range(n) for j in range(n) if i != j])


def gnp_graph(n: int, p: float, seed, loops: bool = False) -> Structure:
    """Directed G(n, p); self-loops only when ``loops`` is set."""
    _check_n(n)
    _check_p(p)
    rng = np.random.default_rng(seed)
    adj = rng.random((n, n)) < p
    if not loops:
        np.fill_diagonal(adj, False)
    return graph(n, map(tuple, np.argwhere(adj).tolist()))


def random_cnf(n: int, seed, max_width: int = 3) -> Structure:
    """``n`` clauses over ``n`` variables, each with 1..max_width literals
    on distinct variables."""
    _check_n(n)
    if max_width < 1:
        raise ValueError("max_width must be >= 1")
    rng = np.random.default_rng(seed)
    P, N = set(), set()
    for c in range(n):
        width = int(rng.integers(1, min(max_width, n) + 1))
        for v in rng.choice(n, size=width, replace=False):
            (P if rng.random() < 0.5 else N).add((int(v), c))
    return new_structure(CNF, n, {"P": P, "N": N})


def random_altgraph(n: int, p: float, q: float, seed) -> Structure:
    _check_n(n)
    _check_p(p)
    _check_p(q, "q")
    rng = np.random.default_rng(seed)
    adj = rng.random((n, n)) < p
    np.fill_diagonal(adj, False)
    uni = rng.random(n) < q
    return new_structure(ALT_GRAPH, n, {
        "E": map(tuple, np.argwhere(adj).tolist()),
        "U": [(int(u),) for u in np.flatnonzero(uni)]})


def random_graphs(count: int, n_range: Sequence[int], seed, p=None) -> list[Structure]:
    """``count`` seeded graphs with sizes drawn from ``n_range`` (inclusive)
    and edge density drawn uniformly from [0.1, 0.6] unless ``p`` is given."""
    rng = np.random.default_rng(seed)
    lo, hi = n_range
    out = []
    for _ in range(count):
        n = int(rng.integers(lo, hi + 1))
        dens = float(rng.uniform(0.1, 0.6)) if p is None else p
        out.append(gnp_graph(n, dens, int(rng.integers(2 ** 32))))
    return out


GENERATORS = {"path": path, "cycle": cycle, "complete": complete}
