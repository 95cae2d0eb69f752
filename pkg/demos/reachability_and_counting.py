"""
Reachability, its complement, and counting
==========================================

Reachability from ``min`` to a vertex is a single transitive closure.
Its complement looks like it needs a negated closure.  Counting the
vertices within each distance avoids that: once the exact number of
vertices within distance ``d`` is known, "x is not within distance d" can
be confirmed positively by exhibiting that many *other* vertices.
"""

import numpy as np

from descomp import complementation as cm
from descomp.evaluator import eval_formula, relation
from descomp.logic import is_tc_positive, parse, to_text
from descomp.problems import bfs_distances, layer_counts
from descomp.structures import GRAPH, format_structure, graph

# A path 0 -> 1 -> 2 plus an isolated vertex 3.
G = graph(4, [(0, 1), (1, 2)])
print(format_structure(G))

###############################################################################
# Plain reachability is one closure.

reach = parse("TC[(x;y). E(x,y)](min;y)", GRAPH)
print("reachable:", np.flatnonzero(relation(G, reach, ["y"])).tolist())

###############################################################################
# The counting sequence n_0, n_1, ... and the formula that computes it.
# Counts are stored as universe elements: count c is element c - 1.

print("BFS layer counts:   ", layer_counts(G))
print("inductive counting: ", cm.inductive_count(G))
count = relation(G, cm.build_count(), ["m"])
print("count formula holds at element", np.flatnonzero(count).tolist(),
      "i.e. count", int(np.flatnonzero(count)[0]) + 1)

###############################################################################
# The non-reachability formula uses closures only positively.

nonreach = cm.build_nonreach()
print("positive closures only:", is_tc_positive(nonreach))
print("formula length:", len(to_text(nonreach)), "characters")
print("unreachable:", np.flatnonzero(relation(G, nonreach, ["x"])).tolist())
print("x=3 unreachable:", eval_formula(G, nonreach, {"x": 3}))

###############################################################################
# The same argument as a checkable transcript.  Each round states the count,
# gives a path for every vertex within the distance, and for every other
# vertex lists the previous round's vertices to show none of them reaches it.

cert = cm.make_certificate(G, 3)
print(cert.to_text())
print("verify:", cm.verify_certificate(G, 3, cert))

toks = list(cert.tokens)
toks[2] -= 1                      # understate the first count
print("tampered:", cm.verify_certificate(G, 3, cm.Certificate(tuple(toks))))

###############################################################################
# Which vertex does the distance condition belong to?  Counting only works
# when the condition is on the vertices being counted.

for line in cm.reading_diagnostic(G, 3, 3):
    print(line)
print("distances:", bfs_distances(G))
