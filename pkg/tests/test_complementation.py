import numpy as np
import pytest

from descomp import complementation as cm
from descomp.evaluator import eval_formula, relation
from descomp.logic import free_vars, is_tc_positive
from descomp.problems import bfs_distances, complete, gnp_graph, layer_counts, path
from descomp.structures import GRAPH, StructureBatch, all_structures, graph
from descomp.suites import complement_batch, reach_layers

DIST = cm.build_dist()
NDIST = cm.build_ndist()
DELTA = cm.build_delta()
NONREACH = cm.build_nonreach()
c = cm.count_element


def test_free_variables():
    assert set(free_vars(DIST)) == {"x", "d"}
    assert set(free_vars(NDIST)) == {"x", "d", "m"}
    assert set(free_vars(DELTA)) == {"d", "m", "d2", "m2"}
    assert set(free_vars(NONREACH)) == {"x"}
    assert free_vars(cm.build_count()) == ("m",)


def test_builders_rename_cleanly():
    f = cm.build_ndist("a", "i", "j")
    assert set(free_vars(f)) == {"a", "i", "j"}
    G = graph(4, [(0, 1), (1, 2)])
    assert np.array_equal(relation(G, f, ["a", "i", "j"]), relation(G, NDIST, ["x", "d", "m"]))


def test_positive():
    assert is_tc_positive(NONREACH)


def test_dist_examples(p3):
    assert eval_formula(p3, DIST, {"x": 2, "d": 2})
    assert not eval_formula(p3, DIST, {"x": 2, "d": 1})
    for G in (p3, graph(1), gnp_graph(5, 0.3, 0)):
        assert eval_formula(G, DIST, {"x": 0, "d": 0})


def test_ndist_examples(p3, p3_plus):
    assert not eval_formula(p3, NDIST, {"x": 2, "d": 2, "m": c(3)})
    assert eval_formula(p3_plus, NDIST, {"x": 3, "d": 3, "m": c(3)})


def test_ndist_unreachable_exhaustive():
    for n in range(1, 5):
        for batch in all_structures(GRAPH, n, chunk=8192):
            nd = relation(batch, NDIST, ["x", "d", "m"])
            R = reach_layers(batch.tables["E"])[:, -1]
            counts = R.sum(axis=1)
            at = nd[np.arange(len(batch)), :, n - 1, counts - 1]
            assert np.array_equal(at[~R], np.ones((~R).sum(), bool))


def test_delta_examples(p3):
    assert eval_formula(p3, DELTA, {"d": 0, "m": c(1), "d2": 1, "m2": c(2)})
    assert relation(p3, DELTA, ["d", "m", "d2", "m2"])[0, c(1), 1].sum() == 1
    E3 = graph(3)
    for d in range(2):
        row = relation(E3, DELTA, ["d", "m", "d2", "m2"])[d, c(1), d + 1]
        assert row.tolist() == [True, False, False]
    row = relation(complete(3), DELTA, ["d", "m", "d2", "m2"])[0, c(1), 1]
    assert row.tolist() == [False, False, True]


def test_delta_wrong_count_gives_nothing(p3):
    # from a wrong n_0 no successor count is produced
    assert not relation(p3, DELTA, ["d", "m", "d2", "m2"])[0, c(2), 1].any()


def test_nonreach_examples(p3, p3_plus):
    assert not eval_formula(p3, NONREACH, {"x": 2})
    assert eval_formula(p3_plus, NONREACH, {"x": 3})
    assert not eval_formula(graph(1), NONREACH, {"x": 0})


def test_count_formula(p3_plus):
    got = relation(p3_plus, cm.build_count(), ["m"])
    assert np.flatnonzero(got).tolist() == [c(3)]


def test_contracts_on_n3_exhaustive():
    for batch in all_structures(GRAPH, 3):
        for name, bad in complement_batch(batch).items():
            assert not bad.any(), name


def test_contracts_random_n5():
    gs = [gnp_graph(5, p, s) for s, p in enumerate(np.linspace(0.05, 0.5, 24))]
    for name, bad in complement_batch(StructureBatch.from_structures(gs)).items():
        assert not bad.any(), name


@pytest.mark.parametrize("G,want", [
    (path(3), (1, 2, 3)), (graph(3), (1, 1, 1)), (complete(3), (1, 3, 3))])
def test_inductive_count(G, want):
    assert cm.inductive_count(G) == want


def test_inductive_count_random():
    for s in range(50):
        G = gnp_graph(6, 0.25, s)
        assert cm.inductive_count(G) == layer_counts(G)


# --------------------------------------------------------------- certificates

def test_certificate_example(p3_plus):
    cert = cm.make_certificate(p3_plus, 3)
    rounds = [line for line in cert.to_text().splitlines() if line.startswith("round")]
    assert rounds[-1] == "round 3 count 3"
    assert cm.verify_certificate(p3_plus, 3, cert)
    assert cm.certificate_oracle(p3_plus, 3, cert)


def test_decremented_count_rejected(p3_plus):
    toks = list(cm.make_certificate(p3_plus, 3).tokens)
    toks[2] -= 1
    v = cm.verify_certificate(p3_plus, 3, cm.Certificate(tuple(toks)))
    assert not v and v.reason == "bad-count"


def test_reachable_target_refused(p3):
    with pytest.raises(cm.CertificateError, match="target reachable"):
        cm.make_certificate(p3, 2)


def test_cert_for_wrong_target(p3_plus):
    cert = cm.make_certificate(p3_plus, 3)
    assert not cm.verify_certificate(p3_plus, 2, cert)
    assert not cm.verify_certificate(graph(1), 0, cm.Certificate((cm.END,)))


def test_text_roundtrip():
    for s in range(30):
        G = gnp_graph(6, 0.2, s)
        far = [v for v in range(6) if v not in bfs_distances(G)]
        for x in far:
            cert = cm.make_certificate(G, x)
            assert cm.Certificate.from_text(cert.to_text()) == cert


def test_from_text_errors():
    with pytest.raises(cm.CertificateError):
        cm.Certificate.from_text("round 1 cnt 2\n")
    with pytest.raises(cm.CertificateError):
        cm.Certificate.from_text("bogus\n")


def test_truncated_and_extended_streams(p3_plus):
    toks = cm.make_certificate(p3_plus, 3).tokens
    assert not cm.verify_certificate(p3_plus, 3, toks[:-1])
    assert not cm.verify_certificate(p3_plus, 3, toks + (cm.END,))
    assert not cm.verify_certificate(p3_plus, 3, ())


def _unreachable_pairs(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 7))
        G = gnp_graph(n, float(rng.uniform(0.05, 0.4)), int(rng.integers(1 << 30)))
        far = [v for v in range(n) if v not in bfs_distances(G)]
        if far:
            out.append((G, int(rng.choice(far))))
    return out


def test_designed_mutants_rejected():
    rng = np.random.default_rng(1)
    for G, x in _unreachable_pairs(1, 60):
        cert = cm.make_certificate(G, x)
        for mutant, kind, pos in cm.mutate_certificate(G, cert, rng, 40):
            assert not cm.verify_certificate(G, x, mutant), (kind, pos)
            assert not cm.certificate_oracle(G, x, mutant), (kind, pos)


def test_verifier_agrees_with_oracle_on_arbitrary_edits():
    # unconstrained edits, some of which keep the certificate valid
    rng = np.random.default_rng(2)
    kept = 0
    for G, x in _unreachable_pairs(2, 80):
        toks = list(cm.make_certificate(G, x).tokens)
        for _ in range(40):
            t = toks.copy()
            op = rng.integers(3)
            i = int(rng.integers(len(t)))
            if op == 0:
                t[i] = int(rng.integers(-6, G.size + 1))
            elif op == 1:
                del t[i]
            else:
                t.insert(i, int(rng.integers(-5, G.size)))
            cert = cm.Certificate(tuple(t))
            got = bool(cm.verify_certificate(G, x, cert))
            assert got == cm.certificate_oracle(G, x, cert), (G, x, t)
            kept += got
    assert kept > 0


def test_mid_path_swap_that_keeps_edges_is_valid():
    # two parallel routes 0-1-3 and 0-2-3 make vertex 1 replaceable by 2
    G = graph(5, [(0, 1), (0, 2), (1, 3), (2, 3)])
    cert = cm.make_certificate(G, 4)
    toks = list(cert.tokens)
    j = next(j for j in range(len(toks)) if toks[j] == cm.REACH and toks[j + 1] == 3)
    toks[j + 4] = 2 if toks[j + 4] == 1 else 1   # interior vertex of the path 0,?,3
    swapped = cm.Certificate(tuple(toks))
    assert swapped != cert
    assert cm.verify_certificate(G, 4, swapped) and cm.certificate_oracle(G, 4, swapped)


def test_reading_diagnostic(p3_plus):
    lines = cm.reading_diagnostic(p3_plus, 3, 3)
    assert lines[1].endswith("ndist=True") and lines[2].endswith("ndist=False")
    assert lines[3].endswith("True")
