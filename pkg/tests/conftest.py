"""Shared oracles and fixtures.  The brute-force helpers here are deliberately
naive so that they can serve as independent references for the optimized code."""
import itertools
from fractions import Fraction
from pathlib import Path

import networkx as nx
import pytest

from cfi_lasserre.graph_core import ColoredGraph

DATA = Path(__file__).parent / "data"


def from_nx(h) -> ColoredGraph:
    h = nx.convert_node_labels_to_integers(h)
    return ColoredGraph.from_edges(h.number_of_nodes(), h.edges())


def to_nx(g: ColoredGraph):
    h = nx.Graph()
    h.add_nodes_from(range(g.vertex_count))
    h.add_edges_from(g.edge_list)
    return h


def brute_expansion(g: ColoredGraph) -> Fraction:
    n = g.vertex_count
    best = None
    for k in range(1, n // 2 + 1):
        for S in itertools.combinations(range(n), k):
            s = set(S)
            cut = sum(1 for u, v in g.edge_list if (u in s) != (v in s))
            val = Fraction(cut, min(k, n - k))
            if best is None or val < best:
                best = val
    return best


def brute_cutwidth(g: ColoredGraph) -> int:
    best = None
    for perm in itertools.permutations(range(g.vertex_count)):
        placed = set()
        worst = 0
        for v in perm[:-1]:
            placed.add(v)
            worst = max(worst, sum(1 for a, b in g.edge_list if (a in placed) != (b in placed)))
        best = worst if best is None else min(best, worst)
    return best or 0


def connected_atlas(max_n: int):
    """All connected graphs with 1..max_n vertices (max_n <= 7) from the networkx atlas."""
    out = []
    for h in nx.graph_atlas_g():
        if 0 < h.number_of_nodes() <= max_n and nx.is_connected(h):
            out.append(from_nx(h))
    return out


def connected8():
    """Connected 8-vertex graphs, one per isomorphism class (generated by make_connected8.py)."""
    pairs = list(itertools.combinations(range(8), 2))
    out = []
    for line in (DATA / "connected8.txt").read_text().split():
        mask = int(line, 16)
        out.append(ColoredGraph.from_edges(8, [p for i, p in enumerate(pairs) if mask >> i & 1]))
    return out


@pytest.fixture(scope="session")
def atlas7():
    return connected_atlas(7)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        num = int(report.nodeid.split("test_criterion_")[1][:2])
        _CRITERIA.append((num, report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, outcome, detail in sorted(_CRITERIA):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict}  {detail}")
