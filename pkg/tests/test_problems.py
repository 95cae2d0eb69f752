from itertools import product

import numpy as np
import pytest

from descomp.problems import (ALT_GRAPH, CNF, DECIDERS, bfs_distances, clauses,
                              cnf_structure, complete, cycle, decide_3col,
                              decide_3sat, decide_maj, decide_reach,
                              decide_reacha, decide_reachd, gnp_graph,
                              layer_counts, path, random_altgraph, random_cnf,
                              random_graphs, string_structure, three_coloring)
from descomp.structures import GRAPH, StructureError, all_structures, graph, new_structure
from descomp.suites import attractor_reacha


def brute_3col(G):
    edges = [(a, b) for a, b in G.tables["E"]]
    if any(a == b for a, b in edges):
        return False
    return any(all(c[a] != c[b] for a, b in edges) for c in product(range(3), repeat=G.size))


def brute_sat(A):
    cs = clauses(A)
    return any(all(not c or any(a[v] == s for v, s in c) for c in cs)
               for a in product((False, True), repeat=A.size))


def test_reach_basics():
    assert decide_reach(path(3))
    assert not decide_reach(graph(2))
    assert decide_reach(graph(1))


def test_reachd_needs_determinism():
    assert decide_reachd(path(4))
    assert not decide_reachd(graph(3, [(0, 1), (0, 2), (1, 2)]))


def test_reacha_examples():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        G = gnp_graph(n, 0.3, int(rng.integers(1 << 30)))
        A = new_structure(ALT_GRAPH, n, {"E": G.tables["E"]})
        assert decide_reacha(A) == decide_reach(G)
    # universal min with successors 1 and 2; only 1 reaches max
    A = new_structure(ALT_GRAPH, 4, {"E": [(0, 1), (0, 2), (1, 3)], "U": [(0,)]})
    assert not decide_reacha(A)
    B = new_structure(ALT_GRAPH, 4, {"E": [(0, 1), (0, 2), (1, 3), (2, 3)], "U": [(0,)]})
    assert decide_reacha(B)
    assert decide_reacha(new_structure(ALT_GRAPH, 1, {"U": [(0,)]}))


def test_reacha_universal_dead_end_loses():
    A = new_structure(ALT_GRAPH, 3, {"E": [(0, 1)], "U": [(1,)]})
    assert not decide_reacha(A)


def test_reacha_vs_attractor():
    for seed in range(200):
        A = random_altgraph(6, 0.3, 0.5, seed)
        assert decide_reacha(A) == attractor_reacha(A)


def test_3sat_examples():
    assert decide_3sat(new_structure(CNF, 1, {"P": [(0, 0)]}))
    assert not decide_3sat(new_structure(CNF, 2, {"P": [(0, 0)], "N": [(0, 1)]}))
    assert decide_3sat(new_structure(CNF, 3, {}))


def test_3sat_vs_enumeration():
    for n in (1, 2):
        for batch in all_structures(CNF, n):
            for A in batch:
                assert decide_3sat(A) == brute_sat(A)
    for seed in range(150):
        A = random_cnf(1 + seed % 4, seed)
        assert decide_3sat(A) == brute_sat(A)


def test_cnf_structure():
    A = cnf_structure(3, [[1, -2], [3]])
    assert clauses(A) == [[(0, True), (1, False)], [(2, True)], []]
    with pytest.raises(StructureError):
        cnf_structure(2, [[3]])


def test_3col_examples():
    assert decide_3col(complete(3)) and not decide_3col(complete(4))
    assert decide_3col(cycle(5)) and not decide_3col(graph(2, [(0, 0)]))


def test_3col_exhaustive_small():
    for n in (1, 2, 3):
        for batch in all_structures(GRAPH, n):
            for G in batch:
                assert decide_3col(G) == brute_3col(G)


def test_3col_random_with_witness():
    for seed in range(80):
        G = gnp_graph(7, 0.35 + 0.2 * (seed % 3) / 2, seed)
        col = three_coloring(G)
        assert (col is not None) == brute_3col(G)
        if col is not None:
            assert all(col[a] != col[b] for a, b in G.tables["E"])


def test_3col_disconnected_mix():
    # K4 far from a colorable component: whole graph not colorable
    edges = [(a, b) for a in range(4) for b in range(4) if a < b] + [(5, 6)]
    assert not decide_3col(graph(8, edges))


def test_maj():
    assert decide_maj("110") and not decide_maj("10") and not decide_maj("")
    assert decide_maj(string_structure("0111"))
    with pytest.raises(ValueError):
        decide_maj("12")


def test_layers(p3_plus):
    assert bfs_distances(p3_plus) == {0: 0, 1: 1, 2: 2}
    assert layer_counts(p3_plus) == (1, 2, 3, 3)


def test_generators_deterministic():
    assert gnp_graph(6, 0.3, 4) == gnp_graph(6, 0.3, 4)
    assert random_cnf(5, 9) == random_cnf(5, 9)
    assert random_altgraph(5, 0.3, 0.4, 2) == random_altgraph(5, 0.3, 0.4, 2)
    gs = random_graphs(10, (5, 7), 1)
    assert gs == random_graphs(10, (5, 7), 1)
    assert all(5 <= g.size <= 7 for g in gs)


def test_generator_validation():
    with pytest.raises(ValueError):
        path(0)
    with pytest.raises(ValueError):
        gnp_graph(3, 1.5, 0)


def test_random_cnf_is_3cnf():
    for seed in range(30):
        assert all(len(c) <= 3 for c in clauses(random_cnf(6, seed)))


def test_decider_names():
    assert set(DECIDERS) == {"reach", "reachd", "reacha", "3sat", "3col", "maj"}


def test_wrong_vocabulary():
    with pytest.raises(StructureError):
        decide_3sat(graph(2))
