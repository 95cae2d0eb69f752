import numpy as np
import pytest

from descomp.problems import bfs_distances, gnp_graph
from descomp.structures import StructureBatch
from descomp.suites import SUITES, Check, Params, graph_grid, reach_layers, run_suite


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_small(name):
    lines = []
    checks = run_suite(name, nmax=3 if name != "sat2col" else 2, trials=6, seed=1,
                       emit=lines.append)
    assert checks and all(c.ok for c in checks), [c.failures[:1] for c in checks]
    assert lines == [c.line(1) for c in checks]


def test_check_line():
    c = Check("x.y", 3)
    assert c.line(7) == "PASS x.y 3 7"
    c.fail("boom")
    assert c.line(7) == "FAIL x.y 3 7" and not c.ok


def test_graph_grid_counts():
    sizes = [len(b) for b in graph_grid(Params(3, 10, 0))]
    assert sum(sizes) == 2 + 16 + 512 + 10


def test_reach_layers_vs_bfs():
    gs = [gnp_graph(6, 0.25, s) for s in range(20)]
    R = reach_layers(StructureBatch.from_structures(gs).tables["E"])
    for b, G in enumerate(gs):
        dist = bfs_distances(G)
        for d in range(6):
            assert set(np.flatnonzero(R[b, d])) == {v for v, k in dist.items() if k <= d}
