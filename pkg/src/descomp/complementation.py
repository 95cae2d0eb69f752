"""Inductive counting: non-reachability with positive transitive closure.

Counts of reachable vertices are carried around as universe elements: the
count ``c`` (1 <= c <= n) is the element ``c - 1``.  Distances are plain
elements, 0 being ``min``.

Formula builders
    :func:`build_dist`, :func:`build_ndist`, :func:`build_delta` and
    :func:`build_nonreach` assemble the FO(pos TC) sentence for
    "x is not reachable from min".
Imperative side
    :func:`inductive_count` recomputes the counts round by round, and
    :func:`make_certificate` / :func:`verify_certificate` produce and check
    a round-by-round transcript that a verifier can read once while holding
    only a handful of counters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .logic import (MAX, MIN, TC, Formula, Term, Var, atom, conj, disj, eq,
                    exists, forall, neq, suc, term)
from .problems import bfs_distances, successors
from .structures import GRAPH, Structure, StructureError


def count_element(count: int) -> int:
    """Universe element encoding a count in ``1..n``."""
    return count - 1


def _names(avoid: Iterable, *bases: str) -> list[str]:
    taken = {t.name if isinstance(t, Var) else t for t in avoid}
    out = []
    for base in bases:
        name, k = base, 0
        while name in taken:
            k += 1
            name = f"{base}{k}"
        taken.add(name)
        out.append(name)
    return out


def _tc(pre, post, body, src, dst) -> TC:
    return TC(tuple(pre), tuple(post), body,
              tuple(term(t) for t in src), tuple(term(t) for t in dst))


def build_dist(x="x", d="d") -> Formula:
    """Path of length at most ``d`` from min to ``x``.

    Closure over (vertex, step) pairs: each step either follows an edge or
    stays put, and advances the step counter by one.
    """
    a, i, b, j = "a", "i", "b", "j"
    step = (atom("E", a, b) | eq(a, b)) & suc(i, j)
    return _tc((a, i), (b, j), step, (MIN, MIN), (x, d))


def build_ndist(x="x", d="d", m="m") -> Formula:
    """When ``m`` encodes ``n_d``: no path of length at most ``d`` from min
    to ``x``.

    Walks the vertices in order while counting those other than ``x``
    that are provably within distance ``d``.  Starting at (min, count 1)
    counts min itself, which is only sound when ``x`` is not min; that
    condition sits outside the closure so that it also holds when the
    closure is trivial (one-element universe).
    """
    v, c, v2, c2 = _names((x, d, m), "v", "c", "v2", "c2")
    step = suc(v, v2) & (eq(c, c2) | (suc(c, c2) & build_dist(v2, d) & neq(v2, x)))
    return neq(x, MIN) & _tc((v, c), (v2, c2), step, (MIN, MIN), (MAX, m))


def build_gamma(d="d", m="m", d2="d2") -> tuple[tuple[str, str, str, str], Formula]:
    """Edge relation used by ``delta``; returns its bound names and body.

    From (v, c) step to (v+1, c+1) when v+1 is within distance d+1, or to
    (v+1, c) when every z is either certified beyond distance d or is
    neither v+1 nor an in-neighbour of v+1.
    """
    v, c, v2, c2, z = _names((d, m, d2), "v", "c", "v2", "c2", "z")
    beyond = forall(z, build_ndist(z, d, m) | (neq(z, v2) & ~atom("E", z, v2)))
    body = suc(v, v2) & ((suc(c, c2) & build_dist(v2, d2)) | (eq(c, c2) & beyond))
    return (v, c, v2, c2), body


def build_delta(d="d", m="m", d2="d2", m2="m2") -> Formula:
    """When ``m`` encodes ``n_d`` and ``d2 = d + 1``: ``m2`` encodes ``n_{d+1}``."""
    (v, c, v2, c2), gamma = build_gamma(d, m, d2)
    return suc(d, d2) & _tc((v, c), (v2, c2), gamma, (MIN, MIN), (MAX, m2))


def build_count(m="m") -> Formula:
    """``m`` encodes the number of vertices reachable from min."""
    d, mm, d2, m2 = _names((m,), "e", "k", "e2", "k2")
    return _tc((d, mm), (d2, m2), build_delta(d, mm, d2, m2), (MIN, MIN), (MAX, m))


def build_nonreach(x="x") -> Formula:
    """No path from min to ``x``, using transitive closure only positively."""
    (m,) = _names((x,), "m")
    return exists(m, build_count(m) & build_ndist(x, MAX, m))


# ---------------------------------------------------------- imperative side

def _within(succ, z: int, d: int) -> bool:
    """Is ``z`` reachable from vertex 0 in at most ``d`` steps?  Recomputed
    from scratch on every call; nothing is remembered between calls."""
    frontier = {0}
    for _ in range(d):
        if z in frontier:
            return True
        frontier = frontier | {w for u in frontier for w in succ[u]}
    return z in frontier


def inductive_count(G: Structure) -> tuple[int, ...]:
    """Counts ``n_0..n_{n-1}``, each derived from the previous one only.

    For round d+1 every candidate vertex re-enumerates the vertices within
    distance d; the enumeration must find exactly ``n_d`` of them, and the
    candidate is counted when it is min, one of them, or a successor of one.
    """
    if G.vocab != GRAPH:
        raise StructureError("inductive_count expects a graph")
    n = G.size
    succ = successors(G)
    edge = {(a, b) for a, b in G.tables["E"]}
    counts = [1]
    for d in range(n - 1):
        prev = counts[-1]
        nxt = 0
        for v in range(n):
            seen = 0
            hit = v == 0
            for z in range(n):
                if _within(succ, z, d):
                    seen += 1
                    hit = hit or z == v or (z, v) in edge
            if seen != prev:
                raise AssertionError(f"round {d}: enumerated {seen}, certified {prev}")
            nxt += hit
        counts.append(nxt)
    return tuple(counts)


# ------------------------------------------------------------ certificates

ROUND, REACH, UNREACH, WIT, END = -1, -2, -3, -4, -5
_OPNAMES = {ROUND: "round", REACH: "v", UNREACH: "u", WIT: "w", END: "end"}


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class Certificate:
    """Flat token stream.

    For each round ``d = 1..n-1``: ``ROUND d count`` and then, for every
    vertex in increasing order, either ``REACH v L p0..pL`` (a path of
    ``L <= d`` edges from min to ``v``) or ``UNREACH v`` followed by one
    ``WIT w L p0..pL`` record for each of the previous round's reachable
    vertices, in increasing order.  The stream ends with ``END``.
    """

    tokens: tuple[int, ...]

    def to_text(self) -> str:
        lines, it = [], iter(self.tokens)
        for tok in it:
            if tok == ROUND:
                d, c = next(it), next(it)
                lines.append(f"round {d} count {c}")
            elif tok in (REACH, WIT):
                label, length = next(it), next(it)
                path = [next(it) for _ in range(length + 1)]
                lines.append(f"{_OPNAMES[tok]} {label}: " + ",".join(map(str, path)))
            elif tok == UNREACH:
                lines.append(f"u {next(it)}")
            elif tok == END:
                lines.append("end")
            else:
                raise CertificateError(f"stray token {tok}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        toks = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                if line.startswith("round"):
                    _, d, word, c = line.split()
                    if word != "count":
                        raise ValueError
                    toks += [ROUND, int(d), int(c)]
                elif line[0] in "vw":
                    head, path = line[1:].split(":")
                    verts = [int(p) for p in path.split(",")]
                    toks += [REACH if line[0] == "v" else WIT, int(head),
                             len(verts) - 1, *verts]
                elif line[0] == "u":
                    toks += [UNREACH, int(line[1:])]
                elif line == "end":
                    toks.append(END)
                else:
                    raise ValueError
            except ValueError:
                raise CertificateError(f"line {lineno}: cannot parse {line!r}") from None
        return cls(tuple(toks))


def _shortest_paths(G: Structure) -> dict[int, list[int]]:
    succ = successors(G)
    paths = {0: [0]}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for w in succ[u]:
                if w not in paths:
                    paths[w] = paths[u] + [w]
                    nxt.append(w)
        frontier = nxt
    return paths


def make_certificate(G: Structure, x: int) -> Certificate:
    """Certificate that ``x`` is unreachable from min in ``G``."""
    if G.vocab != GRAPH:
        raise StructureError("certificates are for graphs")
    n = G.size
    if not 0 <= x < n:
        raise CertificateError(f"target {x} outside the universe")
    paths = _shortest_paths(G)
    if x in paths:
        raise CertificateError(f"target reachable: {x} is reachable from min")
    dist = {v: len(p) - 1 for v, p in paths.items()}
    toks = []
    for d in range(1, n):
        within = [v for v in range(n) if dist.get(v, n) <= d]
        before = [v for v in range(n) if dist.get(v, n) <= d - 1]
        toks += [ROUND, d, len(within)]
        for v in range(n):
            if v in dist and dist[v] <= d:
                toks += [REACH, v, dist[v], *paths[v]]
            else:
                toks += [UNREACH, v]
                for w in before:
                    toks += [WIT, w, dist[w], *paths[w]]
    toks.append(END)
    return Certificate(tuple(toks))


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = "ok"

    def __bool__(self):
        return self.ok


def _path(toks, i, L, n, adj, end, bound):
    """Check a ``len p0 .. p_len`` record at ``i``; returns the next
    position and a reason code (``None`` if the path is fine)."""
    if i >= L:
        return i, "malformed"
    length = toks[i]
    i += 1
    if length < 0 or i + length + 1 > L:
        return i, "malformed"
    if length > bound:
        return i, "bad-path"
    p = toks[i]
    if p != 0:
        return i, "bad-path"
    for j in range(i + 1, i + length + 1):
        q = toks[j]
        if not 0 <= q < n:
            return j, "malformed"
        if not adj[p][q]:
            return j, "bad-path"
        p = q
    if p != end:
        return i, "bad-path"
    return i + length + 1, None


def verify_certificate(G: Structure, x: int, cert: Certificate | Iterable[int]) -> Verdict:
    """Check a certificate in one left-to-right pass.

    Working state: the round, the previous round's certified count, the
    running count, the vertex being examined, the last witness seen, the
    witness tally and the current path position.  Each is a number below
    ``n + 2`` (plus the read position).  Reason codes: ``malformed``,
    ``bad-path``, ``bad-count``, ``order``, ``bad-witness``,
    ``target-present``.
    """
    n = G.size
    adj = G.array("E").tolist()
    toks = cert.tokens if isinstance(cert, Certificate) else tuple(cert)
    L = len(toks)
    if not 0 <= x < n:
        return Verdict(False, "malformed")
    i = 0
    prev = 1
    for d in range(1, n):
        if i + 3 > L or toks[i] != ROUND:
            return Verdict(False, "malformed")
        if toks[i + 1] != d:
            return Verdict(False, "order")
        claimed = toks[i + 2]
        i += 3
        reached = 0
        for v in range(n):
            if i + 2 > L:
                return Verdict(False, "malformed")
            op, label = toks[i], toks[i + 1]
            i += 2
            if op == REACH:
                if label != v:
                    return Verdict(False, "order")
                i, why = _path(toks, i, L, n, adj, v, d)
                if why:
                    return Verdict(False, why)
                if v == x:
                    return Verdict(False, "target-present")
                reached += 1
            elif op == UNREACH:
                if label != v:
                    return Verdict(False, "order")
                last = -1
                for _ in range(prev):
                    if i + 2 > L or toks[i] != WIT:
                        return Verdict(False, "malformed")
                    w = toks[i + 1]
                    if not 0 <= w < n:
                        return Verdict(False, "malformed")
                    if w <= last:
                        return Verdict(False, "order")
                    last = w
                    i, why = _path(toks, i + 2, L, n, adj, w, d - 1)
                    if why:
                        return Verdict(False, why)
                    if w == v or adj[w][v]:
                        return Verdict(False, "bad-witness")
            else:
                return Verdict(False, "malformed")
        if reached != claimed:
            return Verdict(False, "bad-count")
        prev = claimed
    if i != L - 1 or toks[i] != END:
        return Verdict(False, "malformed")
    if n == 1:
        # min is the only vertex and it reaches itself
        return Verdict(False, "target-present")
    return Verdict(True)


def certificate_fields(cert: Certificate) -> list[tuple[str, int, tuple]]:
    """Label every token of a well-formed certificate with its field kind.

    Kinds: ``op``, ``round``, ``count``, ``label``, ``len``, ``first``,
    ``last`` and ``mid`` (with its neighbours on the path).
    """
    toks = cert.tokens
    out, i = [], 0
    while i < len(toks):
        op = toks[i]
        out.append(("op", i, ()))
        if op == ROUND:
            out += [("round", i + 1, ()), ("count", i + 2, ())]
            i += 3
        elif op in (REACH, WIT):
            out += [("label", i + 1, ()), ("len", i + 2, ())]
            length = toks[i + 2]
            start = i + 3
            for j in range(length + 1):
                pos = start + j
                if j == 0:
                    out.append(("first", pos, ()))
                elif j == length:
                    out.append(("last", pos, ()))
                else:
                    out.append(("mid", pos, (toks[pos - 1], toks[pos + 1])))
            i = start + length + 1
        elif op == UNREACH:
            out.append(("label", i + 1, ()))
            i += 2
        else:
            i += 1
    return out


_OPS = (ROUND, REACH, UNREACH, WIT, END)


def mutation_choices(G: Structure, cert: Certificate, fields=None) -> list[tuple[str, int, list]]:
    """Every field with the replacement values that make it invalid.

    Interior path vertices only get replacements that break an edge of
    the path; every other field has no valid alternative value, so any
    change (kept within ``0..n`` for numbers) is a defect.
    """
    n = G.size
    adj = G.array("E")
    out = []
    for kind, pos, extra in (certificate_fields(cert) if fields is None else fields):
        cur = cert.tokens[pos]
        if kind == "op":
            choices = [o for o in _OPS if o != cur]
        elif kind == "mid":
            a, b = extra
            choices = [q for q in range(n) if q != cur and not (adj[a, q] and adj[q, b])]
        else:
            choices = [q for q in range(n + 1) if q != cur]
        if choices:
            out.append((kind, pos, choices))
    return out


def mutate_certificate(G: Structure, cert: Certificate, rng, count: int = 1,
                       choices=None) -> list[tuple[Certificate, str, int]]:
    """``count`` random single-field mutants of ``cert``, each invalid.

    Returns ``(mutant, field kind, token position)`` triples.
    """
    choices = mutation_choices(G, cert) if choices is None else choices
    if not choices:
        raise CertificateError("no mutable field")
    picks = rng.integers(len(choices), size=count)
    fracs = rng.random(count)
    base = list(cert.tokens)
    out = []
    for f, r in zip(picks, fracs):
        kind, pos, vals = choices[f]
        toks = base.copy()
        toks[pos] = int(vals[int(r * len(vals))])
        out.append((Certificate(tuple(toks)), kind, pos))
    return out


def certificate_oracle(G: Structure, x: int, cert: Certificate) -> bool:
    """Validity by direct comparison with BFS ground truth.

    A certificate is valid iff it is exactly shaped as described in
    :class:`Certificate`, every REACH path is a genuine path of allowed
    length, every UNREACH claim is true, every witness list is the full
    set of vertices within the previous distance with genuine paths, every
    count is the true count, and ``x`` is unreachable.
    """
    n = G.size
    edges = set(G.tables["E"])
    dist = bfs_distances(G)
    if x in dist or not 0 <= x < n:
        return False
    toks = list(cert.tokens)

    def good_path(p, label, bound):
        return (len(p) - 1 <= bound and p[0] == 0 and p[-1] == label
                and all(0 <= q < n for q in p)
                and all((p[i], p[i + 1]) in edges for i in range(len(p) - 1)))

    try:
        i = 0
        for d in range(1, n):
            if toks[i:i + 2] != [ROUND, d]:
                return False
            if toks[i + 2] != sum(1 for v in dist.values() if v <= d):
                return False
            i += 3
            truth_prev = sorted(v for v, k in dist.items() if k <= d - 1)
            for v in range(n):
                op, label = toks[i], toks[i + 1]
                if label != v:
                    return False
                if op == REACH:
                    length = toks[i + 2]
                    if length < 0:
                        return False
                    p = toks[i + 3:i + 4 + length]
                    if len(p) != length + 1 or not good_path(p, v, d):
                        return False
                    i += 4 + length
                elif op == UNREACH:
                    if dist.get(v, n) <= d:
                        return False
                    i += 2
                    for w in truth_prev:
                        if toks[i:i + 2] != [WIT, w]:
                            return False
                        length = toks[i + 2]
                        if length < 0:
                            return False
                        p = toks[i + 3:i + 4 + length]
                        if len(p) != length + 1 or not good_path(p, w, d - 1):
                            return False
                        i += 4 + length
                else:
                    return False
        return toks[i:] == [END]
    except IndexError:
        return False


# ------------------------------------------------------------ diagnostics

def reading_diagnostic(G: Structure, x: int, d: int) -> list[str]:
    """Compare two readings of "at least m vertices v with v != x and
    within distance d of min" at ``m = n_d``.

    The counting construction needs the distance condition on ``v``; the
    alternative reading puts it on ``x``.  Returns printable lines.
    """
    dist = bfs_distances(G)
    n_d = sum(1 for k in dist.values() if k <= d)
    on_v = sum(1 for v in range(G.size) if v != x and dist.get(v, G.size) <= d)
    on_x = sum(1 for v in range(G.size) if v != x) if dist.get(x, G.size) <= d else 0
    truth = dist.get(x, G.size) > d
    return [
        f"instance: n={G.size} x={x} d={d} n_d={n_d}",
        f"condition on v: count={on_v} -> ndist={on_v >= n_d}",
        f"condition on x: count={on_x} -> ndist={on_x >= n_d}",
        f"ground truth (x beyond distance d): {truth}",
    ]
