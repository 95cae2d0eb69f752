"""
From satisfiability to 3-coloring
=================================

A CNF formula with ``n`` variables and ``n`` clause slots is a structure
with ``P(v, c)`` (variable ``v`` occurs positively in clause ``c``) and
``N(v, c)``.  Two reductions to graph 3-coloring are compared: a direct
gadget construction and a quantifier-free interpretation of arity 5
whose every edge depends on at most one input bit.
"""

from descomp.interpretations import (apply, check_projection_form,
                                     dynamic_projection_test)
from descomp.problems import clauses, cnf_structure, decide_3col, decide_3sat
from descomp.sat2col import (build_gadget_graph, gadget_or_property_check,
                             interpretation_layout, named_vertex_count,
                             sat2col_interpretation)

###############################################################################
# The OR gadget: with its output joined to R, the output can take color T
# exactly when some input sees T.

for stubs, ok, want in gadget_or_property_check():
    print("inputs", "".join(stubs), "-> output can be T:", ok)

###############################################################################
# (x1 | x2) & (!x1) & (!x2) is unsatisfiable; drop the last clause and it
# becomes satisfiable.

bad = cnf_structure(3, [[1, 2], [-1], [-2]])
good = cnf_structure(3, [[1, 2], [-1]])
for name, A in [("unsat", bad), ("sat", good)]:
    G, layout = build_gadget_graph(A)
    print(f"{name}: clauses={clauses(A)} sat={decide_3sat(A)} "
          f"gadget graph: {G.size} vertices, 3-colorable={decide_3col(G)}")

###############################################################################
# The interpretation maps the same structures to graphs on n**5 vertices,
# most of them isolated padding.

I = sat2col_interpretation()
for name, A in [("unsat", bad), ("sat", good)]:
    H = apply(I, A)
    print(f"{name}: image has {H.size} vertices, {named_vertex_count(A.size)} in use, "
          f"{len(H.tables['E']) // 2} edges, 3-colorable={decide_3col(H)}")

layout = interpretation_layout(3)
print("some vertex names:", [nm for nm in layout.names if not nm.startswith("pad")][:12])

###############################################################################
# Projection form, checked syntactically and by flipping input bits.

form = check_projection_form(I)
print("guarded cases:", sum(len(cs) for cs in form.cases.values()))
report = dynamic_projection_test(I, [2, 3])
for s in report.sizes:
    print(s.summary())
