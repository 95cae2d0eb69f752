import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from descomp.problems import CNF
from descomp.structures import (GRAPH, Structure, StructureBatch, StructureError,
                                Vocabulary, all_structures, decode, decode_bits,
                                encode, encode_bits, encoding_length,
                                format_structure, graph, new_structure,
                                parse_structure, rank_lex, unrank_lex)


def test_new_structure_path():
    A = new_structure(GRAPH, 3, {"E": [(0, 1), (1, 2)]})
    assert A.size == 3
    assert A.tables["E"] == {(0, 1), (1, 2)}


def test_out_of_range_rejected():
    with pytest.raises(StructureError):
        new_structure(GRAPH, 2, {"E": [(0, 2)]})


def test_single_vertex():
    A = new_structure(GRAPH, 1, {})
    assert A.size == 1 and not A.tables["E"]


@pytest.mark.parametrize("spec", [("suc", 2), ("E", 0), ("1x", 1)])
def test_vocabulary_invariants(spec):
    with pytest.raises(StructureError):
        Vocabulary((spec,))


def test_duplicate_relation():
    with pytest.raises(StructureError):
        Vocabulary.of("E/2", "E/1")


def test_extra_table_rejected():
    with pytest.raises(StructureError):
        new_structure(GRAPH, 2, {"E": [], "F": []})


@pytest.mark.parametrize("edges,bits", [
    ([(0, 1)], "0100"), ([], "0000"), ([(0, 1), (1, 0)], "0110")])
def test_encode_examples(edges, bits):
    assert encode(graph(2, edges)) == bits
    assert decode(GRAPH, 2, bits) == graph(2, edges)


def test_decode_errors_and_loop():
    with pytest.raises(StructureError):
        decode(GRAPH, 2, "010")
    assert decode(GRAPH, 1, "1").tables["E"] == {(0, 0)}


def test_rank_examples():
    assert rank_lex((1, 2), 3) == 5
    assert unrank_lex(5, 2, 3) == (1, 2)
    assert all(rank_lex((j,), 7) == j for j in range(7))


@given(st.integers(1, 5), st.integers(1, 4), st.data())
def test_rank_inverse(n, k, data):
    i = data.draw(st.integers(0, n ** k - 1))
    t = unrank_lex(i, k, n)
    assert len(t) == k and rank_lex(t, n) == i


def test_encoding_length():
    assert encoding_length(CNF, 3) == 18
    assert encoding_length(Vocabulary.of("E/2", "U/1"), 4) == 20


def test_all_structures_complete_and_ordered():
    seen = []
    for batch in all_structures(GRAPH, 2, chunk=5):
        seen.extend(encode(A) for A in batch)
    assert seen == [format(i, "04b") for i in range(16)]


def test_batch_roundtrip():
    gs = [graph(3, [(0, 1)]), graph(3, [(2, 2), (1, 0)])]
    batch = StructureBatch.from_structures(gs)
    assert list(batch) == gs
    assert batch[1].structure(0) == gs[1]
    back = decode_bits(GRAPH, 3, encode_bits(batch))
    assert np.array_equal(back.tables["E"], batch.tables["E"])


def test_mixed_batch_rejected():
    with pytest.raises(StructureError):
        StructureBatch.from_structures([graph(2), graph(3)])


@settings(max_examples=50)
@given(st.integers(1, 4), st.data())
def test_text_roundtrip(n, data):
    tuples = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))
    unary = data.draw(st.sets(st.integers(0, n - 1)))
    vocab = Vocabulary.of("E/2", "U/1")
    A = new_structure(vocab, n, {"E": tuples, "U": [(u,) for u in unary]})
    assert parse_structure(format_structure(A)) == A


def test_parse_errors():
    with pytest.raises(StructureError):
        parse_structure("vocab E/2\nsize 2\nE: (0,5)\n")
    with pytest.raises(StructureError):
        parse_structure("size 2\n")


def test_structure_is_hashable():
    assert len({graph(2, [(0, 1)]), graph(2, [(0, 1)])}) == 1
    assert isinstance(graph(2), Structure)
