"""Reduction from CNF satisfiability to 3-colorability.

Two constructions are provided and cross-checked:

* :func:`build_gadget_graph` builds one six-vertex OR gadget per clause and
  wires the clause's literals to its inputs by position.  It reads the
  whole clause, so it is not a projection; it serves as the oracle.
* :func:`sat2col_interpretation` is a quantifier-free projection of arity
  5.  Every clause gets a chain of gadgets, one per variable, so that each
  edge depends on one input bit only.

Gadget: triangle {a, b, d}, edge d-e, triangle {e, c, f}.  With ``f``
also joined to ``R``, ``f`` can be colored T iff one of the vertices
adjacent to ``a``, ``b``, ``c`` from outside (the "stubs") is colored T.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np

from .interpretations import Interpretation, apply, apply_batch, xvars
from .logic import MAX, MIN, Formula, atom, conj, disj, eq, neq, suc
from .problems import (CNF, clauses, decide_3col, decide_3sat, random_cnf,
                       three_coloring)
from .structures import (GRAPH, Structure, StructureError, all_structures,
                         graph, new_structure)

ROLES = ("a", "b", "c", "d", "e", "f")
GADGET_EDGES = (("a", "b"), ("a", "d"), ("b", "d"), ("d", "e"),
                ("e", "c"), ("e", "f"), ("c", "f"))


@dataclass(frozen=True)
class GadgetLayout:
    """Vertex names of a gadget graph, in vertex-index order."""
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise StructureError("duplicate vertex names in layout")

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def _index(self):
        cache = self.__dict__.get("_idx")
        if cache is None:
            cache = {v: i for i, v in enumerate(self.names)}
            object.__setattr__(self, "_idx", cache)
        return cache

    def __len__(self):
        return len(self.names)


def _lit_name(v: int, positive: bool) -> str:
    return f"x{v}" if positive else f"~x{v}"


def clause_gadgets(lits: list) -> list[tuple]:
    """Input triples for the gadget chain of one clause.

    Up to three literals fill one gadget, the last literal repeated; longer
    clauses continue in further gadgets whose first input is the previous
    output.  An empty clause gets one gadget with every input on T.
    """
    if not lits:
        return [("T", "T", "T")]
    names = [_lit_name(v, p) for v, p in lits]
    first = (names + [names[-1]] * 3)[:3]
    out = [tuple(first)]
    rest = names[3:]
    while rest:
        pair = (rest + [rest[-1]])[:2]
        out.append(("prev",) + tuple(pair))
        rest = rest[2:]
    return out


def build_gadget_graph(A: Structure) -> tuple[Structure, GadgetLayout]:
    """Palette triangle T-F-R, a rung ``x_v - ~x_v`` per variable with both
    ends joined to R, and per clause its gadget chain.  Each gadget's output
    is joined to R; the clause's final output is also joined to F."""
    if A.vocab != CNF:
        raise StructureError(f"expected a CNF structure, got {A.vocab}")
    n = A.size
    names = ["T", "F", "R"]
    edges = [("T", "F"), ("F", "R"), ("T", "R")]
    for v in range(n):
        names += [f"x{v}", f"~x{v}"]
        edges += [(f"x{v}", f"~x{v}"), (f"x{v}", "R"), (f"~x{v}", "R")]
    for c, lits in enumerate(clauses(A)):
        chain = clause_gadgets(lits)
        for g, inputs in enumerate(chain):
            tag = f"{c}.{g}"
            vs = {r: f"{r}{tag}" for r in ROLES}
            names += list(vs.values())
            edges += [(vs[p], vs[q]) for p, q in GADGET_EDGES]
            edges.append((vs["f"], "R"))
            for role, src in zip("abc", inputs):
                stub = f"f{c}.{g - 1}" if src == "prev" else src
                edges.append((vs[role], stub))
        edges.append((f"f{c}.{len(chain) - 1}", "F"))
    layout = GadgetLayout(tuple(names))
    idx = [(layout.index(p), layout.index(q)) for p, q in edges]
    return graph(len(names), idx + [(q, p) for p, q in idx]), layout


T_, F_, R_ = 0, 1, 2


def _colorings(vertices, edges, stubs, fixed):
    """Colors of a small gadget avoiding the stub colors; brute force."""
    free = [v for v in vertices if v not in fixed]
    for col in product(range(3), repeat=len(free)):
        c = dict(zip(free, col), **fixed)
        if any(c[p] == c[q] for p, q in edges):
            continue
        if any(c[r] == s for r, s in stubs.items()):
            continue
        yield c


def gadget_or_property_check() -> list[tuple[tuple[str, ...], bool, bool]]:
    """For every T/F coloring of three stubs (outside vertices adjacent to
    a, b, c), can the gadget be properly colored with f = T?  Rows are
    ``(stub colors, extendable, expected)``; expected is "some stub is T"."""
    rows = []
    for stubs in product((T_, F_), repeat=3):
        ok = any(True for _ in _colorings(ROLES, GADGET_EDGES,
                                          dict(zip("abc", stubs)), {"f": T_}))
        rows.append((tuple("TF"[s] for s in stubs), ok, T_ in stubs))
    return rows


def gadget_chain_check() -> list[tuple[str, tuple[str, ...], frozenset, bool]]:
    """Output colors reachable by the two gadgets of the interpretation's
    chains, with the output joined to R: the full gadget (three stubs) and
    the starting triangle {b, c, f} (two stubs).  A row passes when some
    color is reachable and T is reachable iff some stub is T.  Rows are
    ``(gadget, stub colors, reachable output colors, passes)``."""
    rows = []
    shapes = [("gadget", ROLES, GADGET_EDGES, "abc"),
              ("start", ("b", "c", "f"), (("b", "c"), ("b", "f"), ("c", "f")), "bc")]
    for label, verts, edges, inputs in shapes:
        for stubs in product((T_, F_), repeat=len(inputs)):
            outs = frozenset(
                "TF"[o] for o in (T_, F_)
                if any(True for _ in _colorings(verts, edges,
                                                dict(zip(inputs, stubs)), {"f": o})))
            ok = bool(outs) and (("T" in outs) == (T_ in stubs))
            rows.append((label, tuple("TF"[s] for s in stubs), outs, ok))
    return rows


# ------------------------------------------------------------ interpretation
#
# A vertex is a 5-tuple (s1, s2, s3, v, c).  With s1..s3 in {min, max} the
# bits [s_i = max] give a role code:
#
#   0..5  gadget roles a..f at (variable v, clause c)
#   6     x_v when c = min, g(v, P) when c = max
#   7     ~x_v when c = min, g(v, N) when c = max
#
# At v = min a clause's chain starts with a triangle {b, c, f}, which frees
# codes 0, 3, 4 there; at (min, min) they hold the palette T, F, R.  The
# g vertices are forced to color F and join the clause output to it when
# the clause contains the literal, so only nonempty clauses are enforced.
# All other tuples are isolated padding.  Every guard requires min != max,
# so n = 1 yields a single isolated vertex (every 1-clause CNF is
# satisfiable).

K = 5
CODE = {r: i for i, r in enumerate(ROLES)}
CODE.update({"lit": 6, "nlit": 7})


def _role(y: list[str], code: int) -> list[Formula]:
    return [eq(y[i], MAX if code >> (2 - i) & 1 else MIN) for i in range(3)]


def _vertex(kind: str, y: list[str]) -> list[Formula]:
    v, c = y[3], y[4]
    if kind in ("a", "d", "e"):
        return _role(y, CODE[kind]) + [neq(v, MIN)]
    if kind in ("b", "c", "f"):
        return _role(y, CODE[kind])
    if kind == "x":
        return _role(y, 6) + [eq(c, MIN)]
    if kind == "nx":
        return _role(y, 7) + [eq(c, MIN)]
    if kind == "gP":
        return _role(y, 6) + [eq(c, MAX)]
    if kind == "gN":
        return _role(y, 7) + [eq(c, MAX)]
    palette = {"T": 0, "F": 3, "R": 4}
    return _role(y, palette[kind]) + [eq(v, MIN), eq(c, MIN)]


def _edge_cases(y: list[str], z: list[str]):
    """(guard conjuncts, literal or None) for one orientation y -> z."""
    same = [eq(y[3], z[3]), eq(y[4], z[4])]
    same_v = [eq(y[3], z[3])]
    V = _vertex
    consts = [
        V("T", y) + V("F", z), V("F", y) + V("R", z), V("T", y) + V("R", z),
        V("x", y) + V("nx", z) + same_v,
        V("x", y) + V("R", z), V("nx", y) + V("R", z),
        V("gP", y) + V("T", z), V("gP", y) + V("R", z),
        V("gN", y) + V("T", z), V("gN", y) + V("R", z),
        V("f", y) + V("R", z),
        V("c", y) + V("f", z) + same,
        # start triangle {b, c, f} at v = min
        V("b", y) + V("c", z) + same + [eq(y[3], MIN)],
        V("b", y) + V("f", z) + same + [eq(y[3], MIN)],
        # chain link: a(v, c) - f(v-1, c)
        V("a", y) + V("f", z) + [suc(z[3], y[3]), eq(y[4], z[4])],
    ]
    for p, q in GADGET_EDGES:
        if p in ("a", "d", "e") or q in ("a", "d", "e"):
            consts.append(V(p, y) + V(q, z) + same)
    lits = [
        (V("b", y) + V("x", z) + [eq(y[3], z[3])], atom("P", y[3], y[4])),
        (V("b", y) + V("F", z), ~atom("P", y[3], y[4])),
        (V("c", y) + V("nx", z) + [eq(y[3], z[3])], atom("N", y[3], y[4])),
        (V("c", y) + V("F", z), ~atom("N", y[3], y[4])),
        (V("f", y) + [eq(y[3], MAX)] + V("gP", z), atom("P", z[3], y[4])),
        (V("f", y) + [eq(y[3], MAX)] + V("gN", z), atom("N", z[3], y[4])),
    ]
    return consts, lits


def sat2col_interpretation() -> Interpretation:
    y, z = xvars(2 * K)[:K], xvars(2 * K)[K:]
    guard = neq(MIN, MAX)
    c1, l1 = _edge_cases(y, z)
    c2, l2 = _edge_cases(z, y)
    alpha = disj(*[conj(guard, *g) for g in c1 + c2])
    cases = [conj(guard, *g) & lit for g, lit in l1 + l2]
    return Interpretation(K, CNF, GRAPH, (disj(alpha, *cases),))


def interpretation_vertex_name(t: tuple[int, ...], n: int) -> str:
    """Name of output vertex ``t`` (a 5-tuple) in the layout above."""
    if n < 2 or any(s not in (0, n - 1) for s in t[:3]):
        return "pad"
    code = sum((s == n - 1) << (2 - i) for i, s in enumerate(t[:3]))
    v, c = t[3], t[4]
    if code <= 5:
        role = ROLES[code]
        if v == 0 and role in "ade":
            if c == 0:
                return {"a": "T", "d": "F", "e": "R"}[role]
            return "pad"
        return f"{role}({v},{c})"
    if c == 0:
        return f"x{v}" if code == 6 else f"~x{v}"
    if c == n - 1:
        return f"g{'P' if code == 6 else 'N'}({v})"
    return "pad"


def interpretation_layout(n: int) -> GadgetLayout:
    from .structures import unrank_lex
    names = []
    for i in range(n ** K):
        nm = interpretation_vertex_name(unrank_lex(i, K, n), n)
        names.append(nm if nm != "pad" else f"pad{i}")
    return GadgetLayout(tuple(names))


def named_vertex_count(n: int) -> int:
    return 1 if n == 1 else 6 * n * n + n + 3


# ------------------------------------------------------------- verification

@dataclass
class EquivalenceReport:
    checked: int
    counterexamples: list

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def cnf_instances(n_max: int, trials: int, seed, exhaustive_up_to: int = 2) -> Iterator[Structure]:
    """All CNF structures up to ``exhaustive_up_to``, then ``trials`` seeded
    random ones per larger size."""
    rng = np.random.default_rng(seed)
    for n in range(1, min(n_max, exhaustive_up_to) + 1):
        for batch in all_structures(CNF, n):
            yield from batch
    for n in range(exhaustive_up_to + 1, n_max + 1):
        for _ in range(trials):
            width = int(rng.integers(1, 4))
            yield random_cnf(n, int(rng.integers(2 ** 32)), max_width=width)


def verify_equivalence(n_max: int = 5, trials: int = 100, seed=0,
                       exhaustive_up_to: int = 2) -> EquivalenceReport:
    """decide_3sat = 3COL(gadget graph) = 3COL(interpretation image)."""
    I = sat2col_interpretation()
    bad, count = [], 0
    pending: dict[int, list] = {}

    def flush(n):
        items = pending.pop(n, [])
        if not items:
            return
        images = apply_batch(I, _stack(items))
        for i, A in enumerate(items):
            a = decide_3sat(A)
            b = decide_3col(build_gadget_graph(A)[0])
            c = decide_3col(images.structure(i))
            if not a == b == c:
                bad.append((A, a, b, c))

    for A in cnf_instances(n_max, trials, seed, exhaustive_up_to):
        count += 1
        pending.setdefault(A.size, []).append(A)
        if len(pending[A.size]) >= max(1, 64 // A.size ** 2):
            flush(A.size)
    for n in list(pending):
        flush(n)
    return EquivalenceReport(count, bad)


def _stack(items):
    from .structures import StructureBatch
    return StructureBatch.from_structures(items)
