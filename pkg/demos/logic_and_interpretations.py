"""
Formulas, structures and interpretations
========================================

Formulas are parsed from text and printed back.  An interpretation of
arity ``k`` defines a new structure on ``k``-tuples of the old universe;
interpretations compose.
"""

import numpy as np

from descomp.evaluator import relation
from descomp.interpretations import (Interpretation, apply, compose,
                                     format_interpretation, is_qfp)
from descomp.logic import free_vars, is_numeric, parse, random_formula, to_text
from descomp.structures import GRAPH, encode, format_structure, graph

phi = parse("all x. (x != max -> ex y. suc(x,y) & (E(x,y) | E(y,x)))", GRAPH)
print(to_text(phi), "| free:", free_vars(phi), "| numeric:", is_numeric(phi))

rng = np.random.default_rng(0)
for _ in range(3):
    f = random_formula(rng, GRAPH, 3)
    assert parse(to_text(f), GRAPH) == f
    print("random:", to_text(f))

G = graph(3, [(0, 1), (2, 1)])
print("bits:", encode(G))
print(relation(G, phi, []))

###############################################################################
# The "grid" interpretation: vertex (a, b) steps along E in a and along suc in b.

grid = Interpretation(2, GRAPH, GRAPH, (
    parse("E(x1,x3) & x2=x4 | x1=x3 & suc(x2,x4)", GRAPH),))
print(format_interpretation(grid))
print("quantifier-free projection:", is_qfp(grid))
H = apply(grid, G)
print(format_structure(H))

twice = compose(grid, grid)
print("composed arity:", twice.k, "same as applying twice:",
      apply(twice, graph(2, [(0, 1)])) == apply(grid, apply(grid, graph(2, [(0, 1)]))))
