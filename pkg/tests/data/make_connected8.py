"""Regenerate connected8.txt: all connected graphs on 8 vertices up to isomorphism.

Each line is the hex edge mask over the 28 pairs (i, j), i < j, in lexicographic
order.  Graphs are grown from the networkx atlas (all graphs on 7 vertices) by
adding an eighth vertex in every possible way, then deduplicated with
networkx isomorphism tests inside Weisfeiler-Lehman hash buckets.
"""
import itertools
import sys
from pathlib import Path

import networkx as nx

PAIRS = list(itertools.combinations(range(8), 2))


def main(out: Path):
    buckets = {}
    kept = []
    for g7 in nx.graph_atlas_g():
        if g7.number_of_nodes() != 7:
            continue
        for k in range(1, 1 << 7):
            g = nx.Graph(g7)
            g.add_node(7)
            g.add_edges_from((7, v) for v in range(7) if k >> v & 1)
            if not nx.is_connected(g):
                continue
            h = nx.weisfeiler_lehman_graph_hash(g, iterations=4)
            bucket = buckets.setdefault(h, [])
            if any(nx.is_isomorphic(g, x) for x in bucket):
                continue
            bucket.append(g)
            kept.append(g)
    lines = []
    for g in kept:
        mask = 0
        for i, (a, b) in enumerate(PAIRS):
            if g.has_edge(a, b):
                mask |= 1 << i
        lines.append(f"{mask:07x}")
    out.write_text("\n".join(sorted(lines)) + "\n")
    print(len(lines), "graphs")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).with_name("connected8.txt"))
