import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from descomp.evaluator import (EvaluationError, clear_cache, eval_formula,
                               reference_eval, relation, relations,
                               satisfying_assignments, soe_cap, tc_closure)
from descomp.logic import free_vars, is_numeric, parse, random_formula
from descomp.problems import complete, gnp_graph, three_color_sentence
from descomp.structures import (GRAPH, StructureBatch, Vocabulary, decode_bits,
                                graph, new_structure)

REACH = parse("TC[(x;y). E(x,y)](min;max)", GRAPH)


def test_reach_examples(p3):
    assert eval_formula(p3, REACH)
    assert not eval_formula(graph(2), REACH)
    assert eval_formula(graph(1), REACH)


def test_three_color_examples():
    phi = three_color_sentence()
    assert not eval_formula(complete(4), phi)
    assert eval_formula(complete(3), phi)


def test_satisfying_assignments(p3):
    assert satisfying_assignments(p3, parse("E(x,y)", GRAPH), ["x", "y"]) == {(0, 1), (1, 2)}
    closure = parse("TC[(u;v).E(u,v)](x;y)", GRAPH)
    assert satisfying_assignments(p3, closure, ["x", "y"]) == {
        (0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)}
    assert satisfying_assignments(p3, parse("x!=x", GRAPH), ["x"]) == set()


def test_tc_closure_examples():
    assert tc_closure(set(), 2, 1) == {((0,), (0,)), ((1,), (1,))}
    got = tc_closure({((0,), (1,)), ((1,), (2,))}, 3, 1)
    assert ((0,), (2,)) in got and all(((i,), (i,)) in got for i in range(3))


def test_tc_closure_pairs_chain():
    chain = [(0, 0), (0, 1), (1, 0), (1, 1)]
    pairs = set(zip(chain, chain[1:]))
    got = tc_closure(pairs, 2, 2)
    want = {(a, b) for i, a in enumerate(chain) for b in chain[i:]}
    want |= {(t, t) for t in chain}
    assert got == want


def fixpoint_closure(pairs, n, k):
    from itertools import product
    rel = {(t, t) for t in product(range(n), repeat=k)} | set(pairs)
    while True:
        more = rel | {(a, d) for a, b in rel for c, d in rel if b == c}
        if more == rel:
            return rel
        rel = more


@settings(max_examples=40)
@given(st.integers(1, 3), st.sets(st.tuples(st.integers(0, 8), st.integers(0, 8))))
def test_tc_closure_vs_fixpoint(n, raw):
    tuples = [(i // n % n, i % n) for i in range(n * n)]
    pairs = {(tuples[a % len(tuples)], tuples[b % len(tuples)]) for a, b in raw}
    assert tc_closure(pairs, n, 2) == fixpoint_closure(pairs, n, 2)


def test_tc_formula_on_pairs():
    # 2-tuple TC: (min,min) to (max,max) moving along E in the first
    # coordinate and suc in the second.
    phi = parse("TC[(a,b;c,d). E(a,c) & suc(b,d)](min,min;max,max)", GRAPH)
    assert eval_formula(graph(3, [(0, 1), (1, 2)]), phi)
    assert not eval_formula(graph(3, [(0, 2)]), phi)


def test_dtc_ignores_branching():
    phi = parse("DTC[(x;y). E(x,y)](min;max)", GRAPH)
    assert eval_formula(graph(3, [(0, 1), (1, 2)]), phi)
    assert not eval_formula(graph(3, [(0, 1), (0, 2), (1, 2)]), phi)
    assert eval_formula(graph(3, [(0, 1), (1, 2), (2, 0), (2, 1)]), phi)


def test_env_and_errors(p3):
    f = parse("E(x,y)", GRAPH)
    assert eval_formula(p3, f, {"x": 0, "y": 1})
    with pytest.raises(EvaluationError):
        eval_formula(p3, f, {"x": 0})
    with pytest.raises(EvaluationError):
        eval_formula(p3, f, {"x": 0, "y": 5})
    with pytest.raises(EvaluationError):
        eval_formula(p3, parse("suc(min, 7)", GRAPH))


def test_free_relation_variable():
    f = parse("exR Q/1. Q(x) & S(x)", Vocabulary.of("E/2", "S/1"))
    A = new_structure(Vocabulary.of("E/2", "S/1"), 2, {"S": [(1,)]})
    assert eval_formula(A, f, {"x": 1}) and not eval_formula(A, f, {"x": 0})


def test_soe_cap(monkeypatch):
    # the cap counts cells of the quantified table: n ** arity
    phi = parse("exR S/3. S(min,min,min)", GRAPH)
    with pytest.raises(EvaluationError):
        eval_formula(graph(3), phi)
    assert eval_formula(graph(2), phi)
    monkeypatch.setenv("DESCOMP_SOE_CAP", "8")
    assert soe_cap() == 8
    psi = parse("exR S/2. S(min,max)", GRAPH)
    assert eval_formula(graph(2), psi)
    with pytest.raises(EvaluationError):
        eval_formula(graph(3), psi)


def test_batch_matches_single():
    gs = [gnp_graph(4, 0.4, s) for s in range(12)]
    batch = StructureBatch.from_structures(gs)
    phi = parse("all x. (TC[(u;v).E(u,v)](min;x) | ex y. E(x,y))", GRAPH)
    got = eval_formula(batch, phi)
    assert list(got) == [eval_formula(G, phi) for G in gs]


def test_relations_shares_and_agrees():
    G = gnp_graph(5, 0.3, 1)
    qs = [(parse("TC[(u;v).E(u,v)](x;y)", GRAPH), ["x", "y"]),
          (parse("ex y. TC[(u;v).E(u,v)](x;y) & y=max", GRAPH), ["x"])]
    a, b = relations(G, qs)
    assert np.array_equal(a, relation(G, *qs[0]))
    assert np.array_equal(b, a[:, -1])


def test_wide_or_sparse_guard():
    # Many guarded disjuncts exercise the flattened-Or path.
    parts = [f"(x={i} & y={j} & E(x,y))" for i in range(3) for j in range(3)]
    phi = parse(" | ".join(parts + ["x=min & y=max"]), GRAPH)
    G = gnp_graph(4, 0.5, 3)
    want = {(i, j) for i, j in G.tables["E"] if i < 3 and j < 3} | {(0, 3)}
    assert satisfying_assignments(G, phi, ["x", "y"]) == want


def _random_vs_reference(vocab, sizes, count, seed, so):
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(count):
        phi = random_formula(rng, vocab, int(rng.integers(0, 5)), so=so)
        n = int(rng.choice(sizes))
        bits = rng.random(sum(n ** a for _, a in vocab.relations)) < 0.4
        A = decode_bits(vocab, n, bits[None]).structure(0)
        env = {v: int(rng.integers(n)) for v in ("x", "y")}
        try:
            want = reference_eval(A, phi, env)
        except EvaluationError:
            with pytest.raises(EvaluationError):
                eval_formula(A, phi, _bind(phi, env))
            continue
        if eval_formula(A, phi, _bind(phi, env)) != want:
            bad.append((phi, A))
    return bad


def _bind(phi, env):
    return {v: env[v] for v in free_vars(phi)}


def test_random_first_order_vs_reference():
    clear_cache()
    assert _random_vs_reference(GRAPH, [1, 2, 3], 600, 0, so=False) == []


def test_random_second_order_vs_reference():
    assert _random_vs_reference(GRAPH, [1, 2], 200, 1, so=True) == []


def test_random_other_vocab_vs_reference():
    assert _random_vs_reference(Vocabulary.of("T/3", "C/1"), [1, 2], 200, 2, so=False) == []


def test_numeric_formulas_ignore_input():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 60:
        phi = random_formula(rng, GRAPH, 3, so=False)
        if not is_numeric(phi):
            continue
        checked += 1
        n = int(rng.integers(1, 5))
        a = relation(gnp_graph(n, 0.0, 0), phi, ["x", "y"])
        b = relation(gnp_graph(n, 1.0, 0, loops=True), phi, ["x", "y"])
        assert np.array_equal(a, b)
