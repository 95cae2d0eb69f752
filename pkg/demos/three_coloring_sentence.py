"""
3-colorability as an existential second-order sentence
======================================================

"There are three sets covering the vertices such that no edge stays
inside one set."  The evaluator enumerates the relation variables and
checks the first-order part on all of them at once.
"""

from descomp.evaluator import eval_formula
from descomp.logic import to_text
from descomp.problems import (complete, cycle, decide_3col, gnp_graph,
                              three_color_sentence, three_coloring)
from descomp.structures import GRAPH, all_structures

phi = three_color_sentence()
print(to_text(phi))

for name, G in [("K3", complete(3)), ("K4", complete(4)), ("C5", cycle(5))]:
    print(f"{name}: sentence={eval_formula(G, phi)} solver={decide_3col(G)} "
          f"coloring={three_coloring(G)}")

###############################################################################
# All 3-vertex graphs in one batch: the sentence and the solver agree.

agree = total = 0
for batch in all_structures(GRAPH, 3):
    got = eval_formula(batch, phi)
    for i, G in enumerate(batch):
        total += 1
        agree += bool(got[i]) == decide_3col(G)
print(f"agreement on all 3-vertex graphs: {agree}/{total}")

for seed in range(5):
    G = gnp_graph(5, 0.45, seed)
    print(f"G(5, 0.45) seed {seed}: sentence={eval_formula(G, phi)} solver={decide_3col(G)}")
