import numpy as np
import pytest

from descomp.logic import (DTC, TC, And, Atom, Eq, Exists, FormulaError, Min,
                           Max, Not, Var, check_formula, free_vars,
                           is_numeric, is_quantifier_free, is_tc_positive,
                           parse, random_formula, substitute, to_text)
from descomp.problems import CNF, three_color_sentence
from descomp.structures import GRAPH, Vocabulary


def P(text, free=None):
    return parse(text, GRAPH, free)


def test_parse_conjunction():
    f = P("E(x,y) & x=y")
    assert isinstance(f, And)
    assert f.left == Atom("E", (Var("x"), Var("y")))
    assert f.right == Eq(Var("x"), Var("y"))


def test_parse_tc():
    f = P("TC[(x;y). E(x,y) | x=y](min; max)")
    assert isinstance(f, TC)
    assert f.pre == ("x",) and f.post == ("y",)
    assert f.src == (Min(),) and f.dst == (Max(),)


def test_arity_error():
    with pytest.raises(FormulaError):
        P("E(x)")


def test_unknown_relation():
    with pytest.raises(FormulaError):
        P("F(x,y)")


def test_error_has_position():
    with pytest.raises(FormulaError) as e:
        P("E(x,) & y")
    assert e.value.pos == 4


def test_scoping():
    with pytest.raises(FormulaError):
        P("E(x,y)", free=("x",))
    P("ex y. E(x,y)", free=("x",))


def test_tc_bound_vars_distinct():
    with pytest.raises(FormulaError):
        P("TC[(x;x). E(x,x)](min;max)")


def test_so_atom_arity():
    P("exR S/2. S(x,y)", free=("x", "y"))
    with pytest.raises(FormulaError):
        P("exR S/2. S(x)", free=("x",))


@pytest.mark.parametrize("text,want", [
    ("E(x,y)", ("x", "y")),
    ("ex y. E(x,y)", ("x",)),
    ("TC[(x;y).E(x,y)](u;max)", ("u",)),
])
def test_free_vars(text, want):
    assert set(free_vars(P(text))) == set(want)


@pytest.mark.parametrize("text,want", [
    ("suc(x,y) & x!=min", True), ("E(x,y)", False), ("x=y", True),
    ("x<=y | 3=x", True), ("ex z. suc(x,z)", True),
])
def test_is_numeric(text, want):
    assert is_numeric(P(text)) is want


@pytest.mark.parametrize("text,want", [
    ("E(x,y) | (suc(x,y) & !E(y,x))", True),
    ("ex z. E(x,z)", False),
    ("TC[(x;y).E(x,y)](min;max)", False),
])
def test_quantifier_free(text, want):
    assert is_quantifier_free(P(text)) is want


@pytest.mark.parametrize("text,want", [
    ("TC[(x;y).E(x,y)](min;max)", True),
    ("!TC[(x;y).E(x,y)](min;max)", False),
    ("!E(x,y) & TC[(u;v).E(u,v)](min;max)", True),
    ("TC[(u;v).E(u,v)](min;max) -> E(x,y)", False),
    ("E(x,y) -> TC[(u;v).E(u,v)](min;max)", True),
    ("TC[(u;v).E(u,v)](min;max) <-> E(x,y)", False),
    ("TC[(u;v). !TC[(a;b).E(a,b)](u;v)](min;max)", False),
    ("!DTC[(u;v).E(u,v)](min;max)", False),
])
def test_tc_positive(text, want):
    assert is_tc_positive(P(text)) is want


def test_print_precedence():
    f = P("(E(x,y) | E(y,x)) & !(x=y) -> ex z. E(x,z)")
    assert to_text(f) == "(E(x,y) | E(y,x)) & x!=y -> (ex z. E(x,z))"
    assert P(to_text(f)) == f


def test_implication_right_assoc():
    f = P("E(x,y) -> E(y,x) -> x=y")
    assert P(to_text(f)) == f
    g = P("(E(x,y) -> E(y,x)) -> x=y")
    assert f != g and P(to_text(g)) == g


def test_numerals_parse():
    f = P("suc(0, 1) & x <= 2")
    assert P(to_text(f)) == f


@pytest.mark.parametrize("vocab", [GRAPH, CNF, Vocabulary.of("T/3", "C/1")])
def test_random_roundtrip(vocab):
    rng = np.random.default_rng(11)
    for _ in range(300):
        f = random_formula(rng, vocab, int(rng.integers(0, 6)))
        check_formula(f, vocab, ("x", "y"))
        assert parse(to_text(f), vocab) == f


def test_random_formula_covers_node_kinds():
    rng = np.random.default_rng(0)
    from descomp.logic import iter_nodes
    kinds = set()
    for _ in range(400):
        kinds.update(type(n).__name__ for n in iter_nodes(random_formula(rng, GRAPH, 4)))
    assert {"TC", "DTC", "ExistsRel", "Forall", "Exists", "Suc", "Le", "Iff"} <= kinds


def test_fagin_sentence_shape():
    f = three_color_sentence()
    assert not free_vars(f)
    assert "exR R/1." in to_text(f)


def test_substitute_avoids_capture():
    f = P("ex y. E(x,y)")
    g = substitute(f, {"x": Var("y")})
    assert isinstance(g, Exists) and g.var != "y"
    assert set(free_vars(g)) == {"y"}


def test_substitute_in_tc_source():
    f = P("TC[(a;b).E(a,b)](x;max)")
    g = substitute(f, {"x": Min()})
    assert isinstance(g, TC) and g.src == (Min(),)


def test_not_eq_prints_as_neq():
    assert to_text(Not(Eq(Var("x"), Max()))) == "x!=max"


def test_dtc_roundtrip():
    f = P("DTC[(x,y;u,v). E(x,u) & suc(y,v)](min,min;max,max)")
    assert isinstance(f, DTC) and P(to_text(f)) == f
