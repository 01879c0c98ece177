"""CFI gadgets, the graphs X_f(G) and Y_f(G), and parity-preserving isomorphisms."""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .graph_core import ColoredGraph, GraphError


class ParityMismatch(ValueError):
    pass


class Middle(NamedTuple):
    """Middle vertex of gadget ``v``; ``bits[k]`` belongs to the k-th neighbor of v."""
    v: int
    bits: tuple


class EdgeVertex(NamedTuple):
    """Exterior vertex ``(v, u)_bit`` of gadget ``v`` facing neighbor ``u``."""
    v: int
    u: int
    bit: int


def describe(vid) -> str:
    if isinstance(vid, Middle):
        return f"M({vid.v};{''.join(map(str, vid.bits))})"
    return f"E({vid.v},{vid.u};{vid.bit})"


@dataclass(frozen=True)
class TwistFunction:
    """0/1 label per base edge, aligned with ``base.edge_list``."""

    base: ColoredGraph
    bits: tuple

    def __post_init__(self):
        if len(self.bits) != self.base.edge_count:
            raise GraphError("twist must label every base edge exactly once")
        if any(b not in (0, 1) for b in self.bits):
            raise GraphError("twist values must be 0 or 1")

    @classmethod
    def zero(cls, base: ColoredGraph) -> "TwistFunction":
        return cls(base, (0,) * base.edge_count)

    @classmethod
    def odd(cls, base: ColoredGraph, edge: int = 0) -> "TwistFunction":
        """A single twisted edge (by default the first edge of ``edge_list``)."""
        bits = [0] * base.edge_count
        bits[edge] = 1
        return cls(base, tuple(bits))

    @classmethod
    def from_edges(cls, base: ColoredGraph, twisted: Iterable) -> "TwistFunction":
        bits = [0] * base.edge_count
        for u, v in twisted:
            bits[base.edge_id(u, v)] ^= 1
        return cls(base, tuple(bits))

    def __getitem__(self, edge) -> int:
        u, v = edge
        return self.bits[self.base.edge_id(u, v)]

    @property
    def parity(self) -> int:
        return sum(self.bits) % 2

    def xor(self, other: "TwistFunction") -> "TwistFunction":
        return TwistFunction(self.base, tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def twisted_edges(self) -> list:
        return [e for e, b in zip(self.base.edge_list, self.bits) if b]


def even_bit_vectors(d: int) -> list:
    """Even-weight 0/1 tuples of length d in lexicographic order."""
    return [b for b in itertools.product((0, 1), repeat=d) if sum(b) % 2 == 0]


def _check_base(base: ColoredGraph, general: bool):
    if general:
        if any(d == 0 for d in base.degrees()):
            raise GraphError("isolated base vertices have no gadget")
    elif not base.is_regular(3):
        raise GraphError("base graph must be 3-regular")
    if base.colors is not None and len(set(base.colors)) != base.vertex_count:
        raise GraphError("base vertices must carry distinct colors")


def cfi_gadget(v: int, neighbors: Sequence[int], base_color: int = 0):
    """Standalone colored gadget for a degree-3 vertex.

    Returns ``(graph, ids)``.  Middle vertices get color ``base_color``; pair
    ``(v, u_k)`` gets color ``base_color + 1 + k``.
    """
    if len(neighbors) != 3 or len(set(neighbors)) != 3:
        raise GraphError("a gadget needs exactly three distinct neighbors")
    ids = [Middle(v, b) for b in even_bit_vectors(3)]
    ids += [EdgeVertex(v, u, b) for u in neighbors for b in (0, 1)]
    index = {x: i for i, x in enumerate(ids)}
    edges = []
    for b in even_bit_vectors(3):
        for k, u in enumerate(neighbors):
            edges.append((index[Middle(v, b)], index[EdgeVertex(v, u, b[k])]))
    colors = [base_color] * 4 + [base_color + 1 + k for k in range(3) for _ in (0, 1)]
    return ColoredGraph.from_edges(len(ids), edges, colors), tuple(ids)


@dataclass(frozen=True)
class CFIGraph:
    """X_f(G) together with its structured vertex labels."""

    base: ColoredGraph
    twist: TwistFunction
    graph: ColoredGraph
    ids: tuple

    @cached_property
    def index(self) -> dict:
        return {x: i for i, x in enumerate(self.ids)}

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    def vertex(self, vid) -> int:
        return self.index[vid]

    def label(self, i: int):
        return self.ids[i]

    def middles(self, v: int) -> list:
        return [self.index[Middle(v, b)] for b in even_bit_vectors(self.base.degree(v))]

    def pair(self, v: int, u: int) -> tuple:
        return self.index[EdgeVertex(v, u, 0)], self.index[EdgeVertex(v, u, 1)]

    @cached_property
    def color_classes(self) -> dict:
        out = {}
        for i, c in enumerate(self.graph.colors):
            out.setdefault(c, []).append(i)
        return {c: tuple(vs) for c, vs in out.items()}

    def same_color(self, i: int) -> tuple:
        return self.color_classes[self.graph.colors[i]]

    def index_json(self) -> str:
        return json.dumps({str(i): describe(x) for i, x in enumerate(self.ids)}, indent=1)


def _class_colors(base: ColoredGraph) -> dict:
    c = base.colors if base.colors is not None else tuple(range(base.vertex_count))
    keys = []
    for v in range(base.vertex_count):
        keys.append((v, ("m", c[v])))
        for u in base.adjacency[v]:
            keys.append(((v, u), ("p", c[v], c[u])))
    order = {k: i for i, k in enumerate(sorted(k for _, k in keys))}
    return {who: order[k] for who, k in keys}


def build_X(base: ColoredGraph, f: TwistFunction, general: bool = False) -> CFIGraph:
    """Colored X_f(G).  ``general=True`` admits any degree >= 1 (used for fixtures)."""
    _check_base(base, general)
    if f.base.edges != base.edges:
        raise GraphError("twist belongs to a different base graph")
    classes = _class_colors(base)
    ids = []
    colors = []
    for v in range(base.vertex_count):
        nb = base.adjacency[v]
        for b in even_bit_vectors(len(nb)):
            ids.append(Middle(v, b))
            colors.append(classes[v])
        for u in nb:
            for bit in (0, 1):
                ids.append(EdgeVertex(v, u, bit))
                colors.append(classes[(v, u)])
    index = {x: i for i, x in enumerate(ids)}
    edges = []
    for v in range(base.vertex_count):
        nb = base.adjacency[v]
        for b in even_bit_vectors(len(nb)):
            for k, u in enumerate(nb):
                edges.append((index[Middle(v, b)], index[EdgeVertex(v, u, b[k])]))
    for (u, v), t in zip(base.edge_list, f.bits):
        for bit in (0, 1):
            edges.append((index[EdgeVertex(v, u, bit)], index[EdgeVertex(u, v, bit ^ t)]))
    graph = ColoredGraph.from_edges(len(ids), edges, colors)
    return CFIGraph(base, f, graph, tuple(ids))


def build_Y(base: ColoredGraph, f: TwistFunction, general: bool = False) -> ColoredGraph:
    """X_f(G) with all colors removed."""
    return build_X(base, f, general).graph.uncolored()


# ----------------------------------------------------------------------------
# isomorphisms between same-parity twists

def _flip_map(xf: CFIGraph, p: int, x: int, y: int) -> list:
    """Bijection X_h -> X_{h + 1_px + 1_py} that flips the (p,x), (p,y) coordinates of gadget p."""
    nb = xf.base.adjacency[p]
    kx, ky = nb.index(x), nb.index(y)
    perm = list(range(xf.vertex_count))
    for i, vid in enumerate(xf.ids):
        if vid.v != p:
            continue
        if isinstance(vid, Middle):
            bits = list(vid.bits)
            bits[kx] ^= 1
            bits[ky] ^= 1
            perm[i] = xf.index[Middle(p, tuple(bits))]
        elif vid.u in (x, y):
            perm[i] = xf.index[EdgeVertex(p, vid.u, vid.bit ^ 1)]
    return perm


def _edge_path(base: ColoredGraph, e1: tuple, e2: tuple) -> list:
    """Shortest sequence of base edges from e1 to e2, consecutive edges sharing a vertex."""
    prev = {e1: None}
    q = deque([e1])
    while q:
        e = q.popleft()
        if e == e2:
            break
        for p in e:
            for z in base.adjacency[p]:
                nxt = (min(p, z), max(p, z))
                if nxt not in prev:
                    prev[nxt] = e
                    q.append(nxt)
    if e2 not in prev:
        raise GraphError("edges lie in different components")
    path = [e2]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def is_isomorphism(g: ColoredGraph, h: ColoredGraph, perm: Sequence[int]) -> bool:
    """Color- and edge-preserving bijection check."""
    n = g.vertex_count
    if h.vertex_count != n or sorted(perm) != list(range(n)):
        return False
    if (g.colors is None) != (h.colors is None):
        return False
    if g.colors is not None and any(g.colors[i] != h.colors[perm[i]] for i in range(n)):
        return False
    if g.edge_count != h.edge_count:
        return False
    return all(h.has_edge(perm[u], perm[v]) for u, v in g.edges)


def parity_isomorphism(base: ColoredGraph, f: TwistFunction, g: TwistFunction,
                       general: bool = False) -> tuple:
    """Explicit color-preserving isomorphism X_f(G) -> X_g(G) for equal parities."""
    if f.parity != g.parity:
        raise ParityMismatch("twists have different parity")
    xf = build_X(base, f, general)
    diff = f.xor(g).twisted_edges()
    total = list(range(xf.vertex_count))
    current = f
    for e1, e2 in zip(diff[0::2], diff[1::2]):
        path = _edge_path(base, e1, e2)
        for a, b in zip(path, path[1:]):
            (p,) = set(a) & set(b)
            x = a[0] if a[1] == p else a[1]
            y = b[0] if b[1] == p else b[1]
            step = _flip_map(xf, p, x, y)
            total = [step[t] for t in total]
            current = current.xor(TwistFunction.from_edges(base, [a, b]))
    assert current.bits == g.bits
    xg = build_X(base, g, general)
    if not is_isomorphism(xf.graph, xg.graph, total):
        raise AssertionError("constructed map is not an isomorphism")
    return tuple(total)
