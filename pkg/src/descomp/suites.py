"""Property suites behind ``descomp suite``.

Each suite yields :class:`Check` records; the CLI prints one line per
check, ``PASS|FAIL <property-id> <cases> <seed>``.  Every suite is
deterministic for a given seed.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import complementation as cm
from .evaluator import eval_formula, relation, relations
from .interpretations import (dynamic_projection_test, format_interpretation,
                              is_qfp, parse_interpretation)
from .logic import parse, random_formula, to_text
from .problems import (ALT_GRAPH, CNF, STRING, decide_3col, decide_reach,
                       decide_reacha, decide_reachd, gnp_graph, layer_counts,
                       random_altgraph, random_graphs, reach_sentence,
                       reachd_sentence, three_color_sentence)
from .sat2col import (gadget_chain_check, gadget_or_property_check,
                      sat2col_interpretation, verify_equivalence)
from .structures import (GRAPH, StructureBatch, Vocabulary, all_structures,
                         decode, decode_bits, encode, encode_bits,
                         format_structure, parse_structure)


@dataclass
class Check:
    prop: str
    cases: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, detail):
        self.failures.append(detail)

    def line(self, seed) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.prop} {self.cases} {seed}"


@dataclass
class Params:
    nmax: int
    trials: int
    seed: int

    def rng(self, salt: int = 0):
        return np.random.default_rng([self.seed, salt])


def graph_grid(p: Params, lo: int = 5, hi: int = 7, exhaustive_max: int = 4,
               chunk: int = 2048) -> Iterator[StructureBatch]:
    """All graphs with n <= min(nmax, exhaustive_max), then ``trials``
    seeded random graphs with n in [lo, hi], batched by size."""
    for n in range(1, min(p.nmax, exhaustive_max) + 1):
        yield from all_structures(GRAPH, n, chunk=chunk)
    if p.trials:
        gs = random_graphs(p.trials, (lo, hi), p.seed)
        for n in sorted({g.size for g in gs}):
            same = [g for g in gs if g.size == n]
            for i in range(0, len(same), 64):
                yield StructureBatch.from_structures(same[i:i + 64])


def reach_layers(adj: np.ndarray) -> np.ndarray:
    """``R[b, d, v]``: vertex v within distance d of min in graph b."""
    B, n = adj.shape[:2]
    R = np.zeros((B, n, n), dtype=bool)
    cur = np.zeros((B, n), dtype=bool)
    cur[:, 0] = True
    for d in range(n):
        R[:, d] = cur
        cur = cur | (cur[:, :, None] & adj).any(axis=1)
    return R


# ------------------------------------------------------------------ reach

def suite_reach(p: Params):
    phi = reach_sentence()
    tc = Check("reach.tc-vs-bfs")
    for batch in _grid_upto8(p):
        got = eval_formula(batch, phi)
        for i, G in enumerate(batch):
            tc.cases += 1
            if bool(got[i]) != decide_reach(G):
                tc.fail(format_structure(G))
    yield tc

    closure = Check("reach.closure-vs-bfs")
    mono = Check("reach.tc-monotone")
    rng = p.rng(1)
    psi = parse("TC[(u;v). E(u,v)](x;y)", GRAPH)
    for _ in range(p.trials):
        n = int(rng.integers(1, 6))
        G = gnp_graph(n, float(rng.uniform(0.1, 0.6)), int(rng.integers(2 ** 32)))
        got = relation(G, psi, ["x", "y"])
        from .evaluator import tc_closure
        want = tc_closure({((a,), (b,)) for a, b in G.tables["E"]}, n, 1)
        closure.cases += 1
        if {(a, b) for a, b in np.argwhere(got).tolist()} != {(s[0], t[0]) for s, t in want}:
            closure.fail(format_structure(G))
        extra = gnp_graph(n, 0.3, int(rng.integers(2 ** 32)))
        from .structures import graph
        H = graph(n, set(G.tables["E"]) | set(extra.tables["E"]))
        mono.cases += 1
        if (got & ~relation(H, psi, ["x", "y"])).any():
            mono.fail(format_structure(G))
    yield closure
    yield mono


def _grid_upto8(p: Params):
    for n in range(1, min(p.nmax, 4) + 1):
        yield from all_structures(GRAPH, n, chunk=4096)
    rng = p.rng(7)
    gs = [gnp_graph(int(rng.integers(1, 9)), float(rng.uniform(0.05, 0.5)),
                    int(rng.integers(2 ** 32))) for _ in range(p.trials)]
    for n in sorted({g.size for g in gs}):
        yield StructureBatch.from_structures([g for g in gs if g.size == n])


def suite_dtc(p: Params):
    phi = reachd_sentence()
    d_rel = parse("DTC[(u;v). E(u,v)](x;y)", GRAPH)
    t_rel = parse("TC[(u;v). E(u,v)](x;y)", GRAPH)
    eq = Check("dtc.reachd-vs-decider")
    sub = Check("dtc.subset-of-tc")
    for batch in _grid_upto8(p):
        got = eval_formula(batch, phi)
        d, t = relations(batch, [(d_rel, ["x", "y"]), (t_rel, ["x", "y"])])
        bad = np.flatnonzero((d & ~t).reshape(len(batch), -1).any(axis=1))
        sub.cases += len(batch)
        for i in bad:
            sub.fail(format_structure(batch.structure(int(i))))
        for i, G in enumerate(batch):
            eq.cases += 1
            if bool(got[i]) != decide_reachd(G):
                eq.fail(format_structure(G))
    yield eq
    yield sub


# ----------------------------------------------------------------- reacha

def attractor_reacha(G) -> bool:
    """Backward attractor with successor counters; independent of the
    fixpoint loop in :func:`problems.decide_reacha`."""
    n = G.size
    pred = [[] for _ in range(n)]
    left = [0] * n
    for a, b in G.tables["E"]:
        pred[b].append(a)
        left[a] += 1
    universal = {u for (u,) in G.tables["U"]}
    win = [False] * n
    win[n - 1] = True
    queue = deque([n - 1])
    while queue:
        w = queue.popleft()
        for u in pred[w]:
            if win[u]:
                continue
            if u in universal:
                left[u] -= 1
                if left[u]:
                    continue
            win[u] = True
            queue.append(u)
    return win[0]


def suite_reacha(p: Params):
    rng = p.rng(3)
    plain = Check("reacha.no-universal-equals-reach")
    alt = Check("reacha.vs-attractor")
    from .structures import graph
    for _ in range(p.trials):
        n = int(rng.integers(1, max(2, p.nmax + 2) + 1))
        A = random_altgraph(n, float(rng.uniform(0.1, 0.5)), 0.0, int(rng.integers(2 ** 32)))
        plain.cases += 1
        if decide_reacha(A) != decide_reach(graph(n, A.tables["E"])):
            plain.fail(format_structure(A))
        B = random_altgraph(n, float(rng.uniform(0.1, 0.5)), 0.5, int(rng.integers(2 ** 32)))
        alt.cases += 1
        if decide_reacha(B) != attractor_reacha(B):
            alt.fail(format_structure(B))
    for n in range(1, min(p.nmax, 3) + 1):
        for batch in all_structures(ALT_GRAPH, n):
            for A in batch:
                alt.cases += 1
                if decide_reacha(A) != attractor_reacha(A):
                    alt.fail(format_structure(A))
    yield plain
    yield alt


# ------------------------------------------------------------- complement

NONREACH = cm.build_nonreach("x")
DIST = cm.build_dist("x", "d")
NDIST = cm.build_ndist("z", "e", "k")
DELTA = cm.build_delta("e", "k", "e2", "k2")


def complement_batch(batch: StructureBatch) -> dict[str, np.ndarray]:
    """Per-graph failure flags for the four formula contracts."""
    n, B = batch.size, len(batch)
    nr, dist, ndist, delta = relations(batch, [
        (NONREACH, ["x"]), (DIST, ["x", "d"]),
        (NDIST, ["z", "e", "k"]), (DELTA, ["e", "k", "e2", "k2"])])
    R = reach_layers(batch.tables["E"])          # (B, d, v)
    counts = R.sum(axis=2)                       # n_d, (B, d)
    bad = {}
    bad["nonreach"] = (nr != ~R[:, n - 1]).any(axis=1)
    bad["dist"] = (dist != R.transpose(0, 2, 1)).reshape(B, -1).any(axis=1)
    b_idx = np.arange(B)[:, None, None]
    z_idx = np.arange(n)[None, None, :]
    d_idx = np.arange(n)[None, :, None]
    at_count = ndist[b_idx, z_idx, d_idx, (counts - 1)[:, :, None]]  # (B, d, z)
    bad["ndist"] = (at_count != ~R).reshape(B, -1).any(axis=1)
    if n > 1:
        d = np.arange(n - 1)
        rows = delta[np.arange(B)[:, None], d[None, :], counts[:, :-1] - 1, d[None, :] + 1]
        want = np.zeros_like(rows)
        want[np.arange(B)[:, None], d[None, :], counts[:, 1:] - 1] = True
        bad["delta"] = (rows != want).reshape(B, -1).any(axis=1)
    else:
        bad["delta"] = np.zeros(B, dtype=bool)
    return bad


def suite_complement(p: Params, diagnostics: Callable[[str], None] | None = None):
    pos = Check("complement.tc-positive", 1)
    if not _positive():
        pos.fail("nonreach uses TC under negation")
    yield pos
    checks = {k: Check(f"complement.{k}") for k in ("nonreach", "dist", "ndist", "delta")}
    count = Check("complement.inductive-count")
    for batch in graph_grid(p):
        bad = complement_batch(batch)
        for k, flags in bad.items():
            checks[k].cases += len(batch)
            for i in np.flatnonzero(flags)[:5]:
                checks[k].fail(format_structure(batch.structure(int(i))))
        for G in batch:
            count.cases += 1
            seq = cm.inductive_count(G)
            if seq != layer_counts(G) or seq[0] != 1 or list(seq) != sorted(seq):
                count.fail(format_structure(G))
    yield from checks.values()
    yield count
    if diagnostics:
        from .structures import graph
        G = graph(4, [(0, 1), (1, 2)])
        diagnostics("ndist readings, P3 plus an isolated vertex:")
        for x in (2, 3):
            for line in cm.reading_diagnostic(G, x, 3):
                diagnostics("  " + line)


def _positive() -> bool:
    from .logic import is_tc_positive
    return is_tc_positive(cm.build_nonreach())


# ------------------------------------------------------------------ fagin

def suite_fagin(p: Params):
    phi = three_color_sentence()
    chk = Check("fagin.3col-sentence")
    for n in range(1, min(p.nmax, 4) + 1):
        for batch in all_structures(GRAPH, n, chunk=1024):
            got = eval_formula(batch, phi)
            for i, G in enumerate(batch):
                chk.cases += 1
                if bool(got[i]) != decide_3col(G):
                    chk.fail(format_structure(G))
    rng = p.rng(4)
    for _ in range(p.trials):
        n = int(rng.integers(5, 7))
        G = gnp_graph(n, float(rng.uniform(0.2, 0.7)), int(rng.integers(2 ** 32)))
        chk.cases += 1
        if eval_formula(G, phi) != decide_3col(G):
            chk.fail(format_structure(G))
    yield chk


# ---------------------------------------------------------------- sat2col

def suite_sat2col(p: Params):
    g = Check("sat2col.gadget-or", 8)
    for stubs, ok, want in gadget_or_property_check():
        if ok != want:
            g.fail(stubs)
    yield g
    c = Check("sat2col.gadget-chain")
    for row in gadget_chain_check():
        c.cases += 1
        if not row[-1]:
            c.fail(row)
    yield c
    rep = verify_equivalence(p.nmax, p.trials, p.seed)
    e = Check("sat2col.equivalence", rep.checked)
    for A, *answers in rep.counterexamples[:5]:
        e.fail((format_structure(A), answers))
    yield e
    I = sat2col_interpretation()
    q = Check("sat2col.qfp", 1)
    if not is_qfp(I, 8):
        q.fail("not a qfp")
    yield q
    sizes = list(range(2, p.nmax + 1))
    dyn = dynamic_projection_test(I, sizes, r=20, seed=p.seed)
    d = Check("sat2col.dynamic-projection", sum(len(s.kinds) for s in dyn.sizes))
    if not dyn.ok:
        d.fail(str(dyn))
    yield d


# -------------------------------------------------------------- roundtrip

_VOCABS = (GRAPH, CNF, ALT_GRAPH, STRING, Vocabulary.of("T/3", "C/1"))


def suite_roundtrip(p: Params):
    rng = p.rng(5)
    f = Check("roundtrip.formula")
    for i in range(p.trials):
        vocab = _VOCABS[i % len(_VOCABS)]
        phi = random_formula(rng, vocab, int(rng.integers(0, 7)))
        f.cases += 1
        if parse(to_text(phi), vocab) != phi:
            f.fail(to_text(phi))
    yield f
    enc = Check("roundtrip.encoding")
    for batch in graph_grid(p, chunk=8192):
        back = decode_bits(GRAPH, batch.size, encode_bits(batch))
        enc.cases += len(batch)
        if not np.array_equal(back.tables["E"], batch.tables["E"]):
            enc.fail(batch.size)
    for i in range(min(p.trials, 200)):
        n = int(rng.integers(1, 6))
        G = gnp_graph(n, 0.4, int(rng.integers(2 ** 32)))
        enc.cases += 1
        if decode(GRAPH, n, encode(G)) != G or parse_structure(format_structure(G)) != G:
            enc.fail(format_structure(G))
    yield enc
    it = Check("roundtrip.interpretation-file", 1)
    I = sat2col_interpretation()
    if parse_interpretation(format_interpretation(I)) != I:
        it.fail("sat2col")
    yield it
    cli = Check("roundtrip.cli-determinism")
    from .cli import main
    for argv in (["gen", "--graph", "gnp", "--n", "6", "--seed", str(p.seed)],
                 ["gen", "--cnf", "--n", "4", "--seed", str(p.seed)],
                 ["suite", "reacha", "--trials", "20", "--nmax", "3", "--seed", str(p.seed)]):
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            code = main(argv, stdout=buf)
            outs.append((code, buf.getvalue()))
        cli.cases += 1
        if outs[0] != outs[1]:
            cli.fail(argv)
    yield cli


# ------------------------------------------------------------------ certs

def suite_certs(p: Params, mutations: int = 100):
    acc = Check("certs.accept")
    rej = Check("certs.reject-mutants")
    err = Check("certs.reachable-target-refused")
    rng = p.rng(6)
    for batch in graph_grid(p, chunk=8192):
        R = reach_layers(batch.tables["E"])[:, -1]
        for i in range(len(batch)):
            G = None
            for x in range(batch.size):
                if R[i, x]:
                    continue
                G = G or batch.structure(i)
                cert = cm.make_certificate(G, x)
                acc.cases += 1
                v = cm.verify_certificate(G, x, cert)
                if not v:
                    acc.fail((format_structure(G), x, v.reason))
                for mutant, kind, pos in cm.mutate_certificate(G, cert, rng, mutations):
                    rej.cases += 1
                    if cm.verify_certificate(G, x, mutant):
                        rej.fail((format_structure(G), x, kind, pos))
            if i % 97 == 0:
                G = G or batch.structure(i)
                x = int(np.flatnonzero(R[i])[-1])
                err.cases += 1
                try:
                    cm.make_certificate(G, x)
                    err.fail((format_structure(G), x))
                except cm.CertificateError:
                    pass
    yield acc
    yield rej
    yield err


# --------------------------------------------------------------- registry

SUITES = {
    "reach": (suite_reach, 4, 200),
    "dtc": (suite_dtc, 4, 200),
    "reacha": (suite_reacha, 4, 200),
    "complement": (suite_complement, 4, 200),
    "fagin": (suite_fagin, 4, 100),
    "sat2col": (suite_sat2col, 5, 100),
    "roundtrip": (suite_roundtrip, 4, 1000),
    "certs": (suite_certs, 4, 200),
}


def run_suite(name: str, nmax=None, trials=None, seed: int = 0,
              emit: Callable[[str], None] = print, verbose: bool = False) -> list[Check]:
    """Run one suite, emitting a summary line per check (and, when
    ``verbose``, up to three failure details and any diagnostics)."""
    fn, d_nmax, d_trials = SUITES[name]
    p = Params(d_nmax if nmax is None else nmax, d_trials if trials is None else trials, seed)
    kwargs = {}
    if name == "complement" and verbose:
        kwargs["diagnostics"] = lambda s: emit("# " + s)
    out = []
    for chk in fn(p, **kwargs):
        emit(chk.line(seed))
        if verbose:
            for detail in chk.failures[:3]:
                emit("#   " + " ".join(str(detail).split()))
        out.append(chk)
    return out
