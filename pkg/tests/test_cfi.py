import itertools
import json

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from cfi_lasserre import cfi
from cfi_lasserre import graph_core as gc
from cfi_lasserre.cfi import EdgeVertex, Middle, TwistFunction
from cfi_lasserre.graph_core import GraphError

from conftest import DATA, to_nx

K4 = gc.complete_graph(4)
PETERSEN = gc.petersen_graph()


def edge_preserving(g, h, perm) -> bool:
    """Independent check: the image of the edge set is the edge set, colors agree."""
    image = {frozenset((perm[u], perm[v])) for u, v in g.edge_list}
    if image != {frozenset(e) for e in h.edge_list}:
        return False
    return g.colors is None or all(g.colors[i] == h.colors[perm[i]] for i in range(g.vertex_count))


def colored_automorphisms_brute(g):
    classes = {}
    for v, c in enumerate(g.colors):
        classes.setdefault(c, []).append(v)
    groups = list(classes.values())
    count = 0
    for choice in itertools.product(*(itertools.permutations(vs) for vs in groups)):
        perm = [0] * g.vertex_count
        for vs, img in zip(groups, choice):
            for a, b in zip(vs, img):
                perm[a] = b
        count += edge_preserving(g, g, perm)
    return count


# ---------------------------------------------------------------- gadget

def test_gadget_shape():
    g, ids = cfi.cfi_gadget(0, (1, 2, 3))
    assert g.vertex_count == 10
    assert sum(isinstance(x, Middle) for x in ids) == 4
    for v, x in enumerate(ids):
        assert g.degree(v) == (3 if isinstance(x, Middle) else 2)
        if isinstance(x, Middle):
            assert sum(x.bits) % 2 == 0


def test_gadget_automorphisms_brute_force():
    g, _ = cfi.cfi_gadget(0, (1, 2, 3))
    assert colored_automorphisms_brute(g) == 4


def test_gadget_automorphisms_fix_pairs_setwise():
    g, ids = cfi.cfi_gadget(0, (1, 2, 3))
    from cfi_lasserre.iso import automorphisms
    auts = automorphisms(g)
    assert len(auts) == 4
    for a in auts:
        for i, x in enumerate(ids):
            y = ids[a[i]]
            assert type(x) is type(y)
            if isinstance(x, EdgeVertex):
                assert y.u == x.u


def test_gadget_needs_three_neighbors():
    with pytest.raises(GraphError):
        cfi.cfi_gadget(0, (1, 2))
    with pytest.raises(GraphError):
        cfi.cfi_gadget(0, (1, 1, 2))


# ---------------------------------------------------------------- X and Y

@pytest.mark.parametrize("twist", ["zero", "odd"])
def test_k4_counts(twist):
    f = TwistFunction.zero(K4) if twist == "zero" else TwistFunction.odd(K4)
    x = cfi.build_X(K4, f)
    assert x.graph.vertex_count == 40
    assert x.graph.edge_count == 60


@pytest.mark.parametrize("seed", range(4))
def test_counts_random_cubic(seed):
    base = gc.random_3regular(12, seed)
    x = cfi.build_X(base, TwistFunction.odd(base))
    assert x.graph.vertex_count == 10 * base.vertex_count
    assert x.graph.edge_count == 12 * base.vertex_count + 2 * base.edge_count


def test_rejects_non_cubic_base():
    with pytest.raises(GraphError):
        cfi.build_X(gc.cycle_graph(4), TwistFunction.zero(gc.cycle_graph(4)))


def test_twist_must_cover_every_edge():
    with pytest.raises(GraphError):
        TwistFunction(K4, (0, 1))
    with pytest.raises(GraphError):
        TwistFunction(K4, (0, 2, 0, 0, 0, 0))


def test_flat_numbering():
    x = cfi.build_X(K4, TwistFunction.zero(K4))
    assert x.ids[:4] == tuple(Middle(0, b) for b in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)])
    assert x.ids[4:10] == (EdgeVertex(0, 1, 0), EdgeVertex(0, 1, 1), EdgeVertex(0, 2, 0),
                           EdgeVertex(0, 2, 1), EdgeVertex(0, 3, 0), EdgeVertex(0, 3, 1))
    assert all(x.index[vid] == i for i, vid in enumerate(x.ids))
    labels = json.loads(x.index_json())
    assert labels["0"] == "M(0;000)" and labels["4"] == "E(0,1;0)"


def test_cross_edges_follow_twist():
    f = TwistFunction.from_edges(K4, [(0, 1)])
    x = cfi.build_X(K4, f)
    for (u, v) in K4.edge_list:
        for b in (0, 1):
            a = x.index[EdgeVertex(u, v, b)]
            c = x.index[EdgeVertex(v, u, b ^ f[(u, v)])]
            assert x.graph.has_edge(a, c)


def test_color_classes():
    x = cfi.build_X(K4, TwistFunction.zero(K4))
    sizes = sorted(len(c) for c in x.color_classes.values())
    assert sizes == [2] * 12 + [4] * 4
    for c in x.color_classes.values():
        kinds = {type(x.ids[i]) for i in c}
        assert len(kinds) == 1


def test_y_is_uncolored_with_cubic_degrees():
    y = cfi.build_Y(K4, TwistFunction.odd(K4))
    assert y.vertex_count == 40 and y.colors is None
    assert set(y.degrees()) == {3}


def test_distance_three_balls_on_girth_five_base():
    x = cfi.build_X(PETERSEN, TwistFunction.odd(PETERSEN))
    h = to_nx(x.graph)
    for i, vid in enumerate(x.ids):
        ball = len(nx.single_source_shortest_path_length(h, i, cutoff=3))
        assert ball == (19 if isinstance(vid, Middle) else 20)


def test_five_vertex_example_pictures():
    doc = json.loads((DATA / "five_vertex_example.json").read_text())
    base = gc.ColoredGraph.from_edges(5, doc["base_edges"])

    def vid(desc):
        if desc[0] == "m":
            return Middle(desc[1], tuple(desc[2]))
        return EdgeVertex(*desc[1:])

    for twisted, key in (([], "x0_edges"), (doc["xf_twisted"], "xf_edges")):
        x = cfi.build_X(base, TwistFunction.from_edges(base, twisted), general=True)
        names = {n: x.index[vid(s)] for n, s in doc["names"].items()}
        assert sorted(names.values()) == list(range(x.graph.vertex_count))
        expected = {frozenset((names[a], names[b])) for a, b in doc[key]}
        assert {frozenset(e) for e in x.graph.edge_list} == expected


def test_five_vertex_twisted_picture_differs_in_four_edges():
    doc = json.loads((DATA / "five_vertex_example.json").read_text())
    a = {frozenset(e) for e in doc["x0_edges"]}
    b = {frozenset(e) for e in doc["xf_edges"]}
    assert len(a - b) == 4 and len(b - a) == 4


# ---------------------------------------------------------------- parity isomorphisms

def test_parity_isomorphism_identity():
    f = TwistFunction.odd(K4)
    assert cfi.parity_isomorphism(K4, f, f) == tuple(range(40))


def test_parity_isomorphism_adjacent_pair():
    g = TwistFunction.from_edges(K4, [(0, 1), (0, 2)])
    perm = cfi.parity_isomorphism(K4, TwistFunction.zero(K4), g)
    xg = cfi.build_X(K4, g)
    assert edge_preserving(cfi.build_X(K4, TwistFunction.zero(K4)).graph, xg.graph, perm)
    # a single flip moves exactly the 4 middles and 4 pair vertices of gadget 0
    moved = [i for i in range(40) if perm[i] != i]
    assert len(moved) == 8


def test_parity_isomorphism_disjoint_pair():
    z = TwistFunction.zero(K4)
    g = TwistFunction.from_edges(K4, [(0, 1), (2, 3)])
    perm = cfi.parity_isomorphism(K4, z, g)
    assert edge_preserving(cfi.build_X(K4, z).graph, cfi.build_X(K4, g).graph, perm)


def test_parity_mismatch():
    with pytest.raises(cfi.ParityMismatch):
        cfi.parity_isomorphism(K4, TwistFunction.zero(K4), TwistFunction.odd(K4))


@given(st.integers(0, 7), st.data())
@settings(max_examples=25, deadline=None)
def test_parity_isomorphism_random(seed, data):
    base = gc.random_3regular(10, seed)
    m = base.edge_count
    fb = data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))
    gb = data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))
    if sum(fb) % 2 != sum(gb) % 2:
        gb[0] ^= 1
    f, g = TwistFunction(base, tuple(fb)), TwistFunction(base, tuple(gb))
    perm = cfi.parity_isomorphism(base, f, g)
    assert edge_preserving(cfi.build_X(base, f).graph, cfi.build_X(base, g).graph, perm)


def test_twist_parity_and_xor():
    f = TwistFunction.from_edges(K4, [(0, 1), (1, 2), (2, 3)])
    assert f.parity == 1
    assert f.xor(f).bits == (0,) * 6
    assert f.twisted_edges() == [(0, 1), (1, 2), (2, 3)]
    assert f[(1, 0)] == 1
