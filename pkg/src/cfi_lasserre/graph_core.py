"""Graphs, random cubic generation, expansion, cutwidth/width, clustering and stretchings."""
from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

# exhaustive budgets (vertex counts)
EXPANSION_MAX_VERTICES = 26
CUTWIDTH_MAX_VERTICES = 22
SPECTRAL_SLACK = 1e-9


class GraphError(ValueError):
    pass


class InvalidParameter(GraphError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class InvalidWitness(GraphError):
    pass


@dataclass(frozen=True)
class ColoredGraph:
    """Simple undirected graph on vertices ``0..vertex_count-1``.

    Edges are stored as sorted pairs ``(u, v)`` with ``u < v``. ``colors`` is
    either ``None`` or a tuple assigning one integer color per vertex.
    """

    vertex_count: int
    edges: frozenset
    colors: Optional[tuple] = None

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise GraphError("negative vertex count")
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (0 <= u < v < n):
                raise GraphError(f"edge {(u, v)} not normalized or out of range")
        if self.colors is not None and len(self.colors) != n:
            raise GraphError("colors must assign exactly one color per vertex")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, colors: Optional[Sequence] = None) -> "ColoredGraph":
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            e = (u, v) if u < v else (v, u)
            if e in norm:
                raise GraphError(f"duplicate edge {e}")
            norm.add(e)
        return cls(n, frozenset(norm), None if colors is None else tuple(int(c) for c in colors))

    @cached_property
    def edge_list(self) -> tuple:
        return tuple(sorted(self.edges))

    @cached_property
    def edge_index(self) -> dict:
        return {e: i for i, e in enumerate(self.edge_list)}

    @cached_property
    def adjacency(self) -> tuple:
        nbrs = [[] for _ in range(self.vertex_count)]
        for u, v in self.edge_list:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def neighbor_masks(self) -> tuple:
        return tuple(sum(1 << u for u in nb) for nb in self.adjacency)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list:
        return [len(a) for a in self.adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(u, v) if u < v else (v, u)]

    def uncolored(self) -> "ColoredGraph":
        return ColoredGraph(self.vertex_count, self.edges, None)

    def with_colors(self, colors: Sequence) -> "ColoredGraph":
        return ColoredGraph(self.vertex_count, self.edges, tuple(int(c) for c in colors))

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.vertex_count, self.vertex_count), dtype=np.int8)
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1
        return A

    def is_connected(self) -> bool:
        n = self.vertex_count
        if n == 0:
            return True
        seen = {0}
        todo = [0]
        while todo:
            x = todo.pop()
            for y in self.adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return len(seen) == n

    def is_regular(self, d: int) -> bool:
        return all(len(a) == d for a in self.adjacency)

    def cut_size(self, subset: Iterable[int]) -> int:
        s = set(subset)
        return sum(1 for u, v in self.edges if (u in s) != (v in s))

    def distances_from(self, source: int) -> list:
        dist = [-1] * self.vertex_count
        dist[source] = 0
        q = deque([source])
        while q:
            x = q.popleft()
            for y in self.adjacency[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    q.append(y)
        return dist

    def girth(self) -> Optional[int]:
        best = None
        for s in range(self.vertex_count):
            dist = [-1] * self.vertex_count
            parent = [-1] * self.vertex_count
            dist[s] = 0
            q = deque([s])
            while q:
                x = q.popleft()
                for y in self.adjacency[x]:
                    if dist[y] < 0:
                        dist[y] = dist[x] + 1
                        parent[y] = x
                        q.append(y)
                    elif parent[x] != y:
                        c = dist[x] + dist[y] + 1
                        if best is None or c < best:
                            best = c
        return best


@dataclass(frozen=True)
class CutProfile:
    ordering: tuple
    cut_values: tuple

    @property
    def width(self) -> int:
        return max(self.cut_values, default=0)


@dataclass(frozen=True)
class StretchWitness:
    g_w: tuple  # g_w[v] = image of base vertex v in H
    k: int
    t: int


# ----------------------------------------------------------------------------
# named graphs

def complete_graph(n: int) -> ColoredGraph:
    return ColoredGraph.from_edges(n, itertools.combinations(range(n), 2))


def path_graph(n: int) -> ColoredGraph:
    return ColoredGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> ColoredGraph:
    return ColoredGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> ColoredGraph:
    """Star on ``n`` vertices with center 0."""
    return ColoredGraph.from_edges(n, [(0, i) for i in range(1, n)])


def petersen_graph() -> ColoredGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return ColoredGraph.from_edges(10, outer + spokes + inner)


def disjoint_union(g: ColoredGraph, h: ColoredGraph) -> ColoredGraph:
    off = g.vertex_count
    edges = list(g.edges) + [(u + off, v + off) for u, v in h.edges]
    colors = None
    if g.colors is not None and h.colors is not None:
        colors = g.colors + h.colors
    return ColoredGraph.from_edges(g.vertex_count + h.vertex_count, edges, colors)


def relabel(g: ColoredGraph, perm: Sequence[int]) -> ColoredGraph:
    """Graph whose vertex ``perm[v]`` plays the role of ``v``."""
    colors = None
    if g.colors is not None:
        colors = [0] * g.vertex_count
        for v, c in enumerate(g.colors):
            colors[perm[v]] = c
    return ColoredGraph.from_edges(g.vertex_count, [(perm[u], perm[v]) for u, v in g.edges], colors)


# ----------------------------------------------------------------------------
# random cubic graphs

def random_3regular(n: int, seed: int, max_tries: int = 100000) -> ColoredGraph:
    """Uniform-ish connected simple cubic graph via the pairing model with rejection."""
    if n % 2 or n < 4:
        raise InvalidParameter("n must be even and at least 4")
    rng = random.Random(seed)
    points = [v for v in range(n) for _ in range(3)]
    for _ in range(max_tries):
        rng.shuffle(points)
        pairs = [(points[i], points[i + 1]) for i in range(0, len(points), 2)]
        seen = set()
        ok = True
        for u, v in pairs:
            if u == v:
                ok = False
                break
            e = (u, v) if u < v else (v, u)
            if e in seen:
                ok = False
                break
            seen.add(e)
        if not ok:
            continue
        g = ColoredGraph(n, frozenset(seen))
        if g.is_connected():
            return g
    raise RuntimeError("pairing model rejected every sample")


# ----------------------------------------------------------------------------
# subset enumeration (vectorized)

_LOW_BITS = 20


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int32)


def _subset_chunks(g: ColoredGraph):
    """Yield ``(cut, high_size)`` blocks covering every subset avoiding the last vertex.

    Every cut ``(S, V-S)`` is represented once since the last vertex is always
    on the complement side.  The low vertices are vectorized; the high ones are
    walked in Gray-code order.  Uses cut(S) = sum of degrees in S - 2 e(S).
    The i-th entry of a block is the subset (low bits i) + (current high set).
    """
    n = g.vertex_count
    free = n - 1
    low = min(free, _LOW_BITS)
    high = free - low
    lowmask = (1 << low) - 1
    # cut of each low subset, built by doubling over the low vertices
    base = np.zeros(1, dtype=np.int32)
    for v in range(low):
        idx = np.arange(base.size, dtype=np.int64)
        ext = base + (g.degree(v) - 2 * _popcount(idx & g.neighbor_masks[v]))
        base = np.concatenate([base, ext])
    masks = np.arange(1 << low, dtype=np.int64)
    cross_terms = [_popcount(masks & (g.neighbor_masks[low + j] & lowmask)) for j in range(high)]
    cross = np.zeros(1 << low, dtype=np.int32)
    prev = 0
    for step in range(1 << high):
        gray = step ^ (step >> 1)
        if step:
            j = (gray ^ prev).bit_length() - 1
            if gray >> j & 1:
                cross += cross_terms[j]
            else:
                cross -= cross_terms[j]
            prev = gray
        hset = gray << low
        members = [low + j for j in range(high) if gray >> j & 1]
        hi_deg = sum(g.degree(v) for v in members)
        hi_e = sum(bin(g.neighbor_masks[v] & hset).count("1") for v in members) // 2
        yield base + (hi_deg - 2 * hi_e) - 2 * cross, len(members)


def _low_sizes(n: int) -> np.ndarray:
    low = min(n - 1, _LOW_BITS)
    return _popcount(np.arange(1 << low, dtype=np.int64))


def expansion_exact(g: ColoredGraph) -> Fraction:
    """Exact edge expansion min_S |E(S, V-S)| / min(|S|, |V-S|)."""
    n = g.vertex_count
    if n > EXPANSION_MAX_VERTICES:
        raise BudgetExceeded(f"expansion_exact limited to {EXPANSION_MAX_VERTICES} vertices")
    if n < 2:
        raise GraphError("expansion needs at least two vertices")
    # compare cut/denominator through the integer key cut * (L / denominator)
    L = math.lcm(*range(1, n // 2 + 1))
    low_size = _low_sizes(n)
    mults = {}
    best_key = None
    best = None
    first = True
    for cut, hsize in _subset_chunks(g):
        if hsize not in mults:
            size = low_size + hsize
            denom = np.maximum(np.minimum(size, n - size), 1)
            mults[hsize] = (L // denom).astype(np.int64)
        key = cut * mults[hsize]
        if first:
            key[0] = np.iinfo(np.int64).max  # the empty set
            first = False
        k = int(key.argmin())
        if best_key is None or key[k] < best_key:
            best_key = int(key[k])
            size = int(low_size[k]) + hsize
            best = Fraction(int(cut[k]), min(size, n - size))
    return best


def set_expansion(g: ColoredGraph, subset: Iterable[int]) -> Fraction:
    s = set(subset)
    d = min(len(s), g.vertex_count - len(s))
    if d == 0:
        raise GraphError("expansion of the empty or full set is undefined")
    return Fraction(g.cut_size(s), d)


def laplacian_lambda2(g: ColoredGraph) -> float:
    A = g.adjacency_matrix().astype(float)
    L = np.diag(A.sum(axis=1)) - A
    vals = np.linalg.eigvalsh(L)
    return float(vals[1]) if len(vals) > 1 else 0.0


@dataclass(frozen=True)
class ExpansionBounds:
    lower: float
    upper: Fraction
    lambda2: float
    upper_witness: tuple = field(default=())


def expansion_bounds(g: ColoredGraph, samples: int = 1000, seed: int = 0) -> ExpansionBounds:
    """Spectral lower bound lambda2/2 (minus slack) and a sampled upper bound."""
    n = g.vertex_count
    lam = laplacian_lambda2(g)
    lower = max(0.0, lam / 2 - SPECTRAL_SLACK)
    if lam < 1e-9:
        lower = 0.0
    candidates = [frozenset([v]) for v in range(n)]
    for v in range(n):
        dist = g.distances_from(v)
        for r in range(1, n):
            ball = frozenset(u for u in range(n) if 0 <= dist[u] <= r)
            if len(ball) >= n:
                break
            candidates.append(ball)
    rng = random.Random(seed)
    for _ in range(samples):
        size = rng.randint(1, max(1, n // 2))
        candidates.append(frozenset(rng.sample(range(n), size)))
    best = None
    witness = ()
    for s in candidates:
        if not s or len(s) == n:
            continue
        val = set_expansion(g, s)
        if best is None or val < best:
            best = val
            witness = tuple(sorted(s))
    return ExpansionBounds(lower, best, lam, witness)


# ----------------------------------------------------------------------------
# cutwidth and width

def _all_cuts(g: ColoredGraph) -> np.ndarray:
    n = g.vertex_count
    masks = np.arange(1 << n, dtype=np.int64)
    cut = np.zeros(1 << n, dtype=np.int16)
    for v in range(n):
        inside = ((masks >> v) & 1).astype(np.int16)
        outside_nb = g.degree(v) - _popcount(masks & g.neighbor_masks[v]).astype(np.int16)
        cut += inside * outside_nb
    return cut


def _check_cutwidth_budget(g: ColoredGraph):
    if g.vertex_count > CUTWIDTH_MAX_VERTICES:
        raise BudgetExceeded(f"subset DP limited to {CUTWIDTH_MAX_VERTICES} vertices")


def _prefix_dp(g: ColoredGraph, cut: np.ndarray) -> np.ndarray:
    """best[S] = min over orderings of S of the max prefix cut (S itself included)."""
    n = g.vertex_count
    full = 1 << n
    masks = np.arange(full, dtype=np.int64)
    sizes = _popcount(masks)
    order = np.argsort(sizes, kind="stable")
    bounds = np.searchsorted(sizes[order], np.arange(n + 2))
    best = np.zeros(full, dtype=np.int16)
    big = np.int16(32000)
    for k in range(1, n + 1):
        layer = order[bounds[k]:bounds[k + 1]]
        pred = np.full(layer.shape, big, dtype=np.int16)
        for v in range(n):
            bit = 1 << v
            has = (layer & bit) != 0
            cand = np.where(has, best[layer ^ bit], big)
            np.minimum(pred, cand, out=pred)
        best[layer] = np.maximum(pred, cut[layer])
    return best


def cutwidth(g: ColoredGraph):
    """Exact cutwidth with an optimal ordering (lowest-index vertex first on ties)."""
    _check_cutwidth_budget(g)
    n = g.vertex_count
    if n == 0:
        return 0, CutProfile((), ())
    cut = _all_cuts(g)
    best = _prefix_dp(g, cut)
    full = (1 << n) - 1
    value = int(best[full])
    # best over the remaining suffix from S equals best[V - S] (cuts are symmetric)
    ordering = []
    cuts = []
    s = 0
    for _ in range(n):
        for v in range(n):
            if s >> v & 1:
                continue
            t = s | (1 << v)
            if int(best[full ^ t]) <= value and int(cut[t]) <= value:
                ordering.append(v)
                cuts.append(int(cut[t]))
                s = t
                break
        else:  # pragma: no cover - DP guarantees a choice
            raise AssertionError("witness reconstruction failed")
    return value, CutProfile(tuple(ordering), tuple(cuts))


def ordering_cut_values(g: ColoredGraph, ordering: Sequence[int]) -> tuple:
    placed = set()
    out = []
    for v in ordering:
        placed.add(v)
        out.append(g.cut_size(placed))
    return tuple(out)


def graph_width(g: ColoredGraph) -> int:
    """Monotone-set minimax width W(G).

    For a threshold k, the smallest family containing the empty set that is
    closed downward and closed under single-vertex additions of cost < k
    (cost = larger cut of the two endpoints) is contained in every admissible
    family whose boundary costs are all >= k.  Hence W(G) >= k exactly when
    that closure misses V.
    """
    _check_cutwidth_budget(g)
    n = g.vertex_count
    if n == 0:
        return 0
    cut = _all_cuts(g).astype(np.int32)
    full = (1 << n) - 1
    masks = np.arange(1 << n, dtype=np.int64)
    top = int(cut.max())
    value = 0
    for k in range(1, top + 2):
        inside = np.zeros(1 << n, dtype=bool)
        inside[0] = True
        while True:
            before = int(inside.sum())
            for v in range(n):
                bit = 1 << v
                lacking = (masks & bit) == 0
                src = masks[lacking & inside]
                dst = src | bit
                ok = np.maximum(cut[src], cut[dst]) < k
                inside[dst[ok]] = True
                # downward closure
                has = masks[((masks & bit) != 0) & inside]
                inside[has ^ bit] = True
            if int(inside.sum()) == before:
                break
        if inside[full]:
            break
        value = k
    return value


# ----------------------------------------------------------------------------
# clustering and stretchings

def cluster(g: ColoredGraph):
    """Cl(G): vertex (u, v) for each orientation; returns graph and vertex labels."""
    labels = []
    for u in range(g.vertex_count):
        for v in g.adjacency[u]:
            labels.append((u, v))
    index = {lab: i for i, lab in enumerate(labels)}
    edges = []
    for u, v in g.edge_list:
        edges.append((index[(u, v)], index[(v, u)]))
    for u in range(g.vertex_count):
        for a, b in itertools.combinations(g.adjacency[u], 2):
            edges.append((index[(u, a)], index[(u, b)]))
    return ColoredGraph.from_edges(len(labels), edges), tuple(labels)


def cluster_expansion(g: ColoredGraph) -> Fraction:
    """Exact Ex(Cl(G)) by a frontier DP over the base vertices.

    A subset S of Cl(G) is a choice, per base vertex u, of which cluster
    vertices (u, w) lie in S.  Its cut is sum_u k_u (d_u - k_u) (clique
    edges) plus the matching edges whose two ends disagree.  Processing base
    vertices in index order, the state is the membership bit of every cluster
    vertex whose matching partner is not processed yet, plus |S| so far.
    """
    n = g.vertex_count
    total = 2 * g.edge_count
    if total < 2:
        raise GraphError("expansion needs at least two vertices")
    big = np.int32(1 << 20)
    front = []  # cluster vertices (u, w) awaiting w
    dp = np.full((1, total + 1), big, dtype=np.int32)
    dp[0, 0] = 0
    for v in range(n):
        nb = g.adjacency[v]
        d = len(nb)
        removed = [p for p, (u, w) in enumerate(front) if w == v]
        kept = [p for p in range(len(front)) if p not in removed]
        added = [w for w in nb if w > v]
        partner = {front[p][0]: p for p in removed}
        F = len(front)
        old = np.arange(1 << F, dtype=np.int64)
        rest = np.zeros(1 << F, dtype=np.int64)
        for newpos, p in enumerate(kept):
            rest |= ((old >> p) & 1) << newpos
        rem_pattern = np.zeros(1 << F, dtype=np.int64)
        for q, p in enumerate(removed):
            rem_pattern |= ((old >> p) & 1) << q
        newF = len(kept) + len(added)
        new = np.full((1 << newF, total + 1), big, dtype=np.int32)
        for a in range(1 << d):
            k = bin(a).count("1")
            inner_cut = k * (d - k)
            want = 0
            add_bits = 0
            for idx, w in enumerate(nb):
                bit = a >> idx & 1
                if w in partner:
                    want |= bit << removed.index(partner[w])
                elif w > v:
                    add_bits |= bit << added.index(w)
            target = rest + (add_bits << len(kept))
            for r in range(1 << len(removed)):
                sel = rem_pattern == r
                cost = inner_cut + int(bin(r ^ want).count("1"))
                src = dp[sel, :total + 1 - k] + cost
                tgt = target[sel]
                np.minimum(new[tgt, k:], src, out=src)
                new[tgt, k:] = src
        front = [front[p] for p in kept] + [(v, w) for w in added]
        dp = new
    best = dp[0]
    return min(Fraction(int(best[s]), min(s, total - s)) for s in range(1, total))


def subdivide(g: ColoredGraph, lengths) -> tuple:
    """Replace each edge by a path; ``lengths`` maps edge -> number of inserted vertices.

    ``lengths`` may be an int (uniform) or a dict keyed by sorted edge pairs.
    Returns the stretched graph and the identity witness map on base vertices.
    """
    n = g.vertex_count
    edges = []
    nxt = n
    for e in g.edge_list:
        j = lengths if isinstance(lengths, int) else lengths.get(e, 0)
        chain = [e[0]] + list(range(nxt, nxt + j)) + [e[1]]
        nxt += j
        edges.extend(zip(chain, chain[1:]))
    return ColoredGraph.from_edges(nxt, edges), tuple(range(n))


def _branch_paths(h: ColoredGraph, images: set):
    """All maximal paths between branch vertices whose interior avoids them."""
    paths = []
    for s in sorted(images):
        for first in h.adjacency[s]:
            path = [s, first]
            prev, cur = s, first
            closed = False
            while cur not in images:
                nxt = [x for x in h.adjacency[cur] if x != prev]
                if len(nxt) != 1:
                    break
                if nxt[0] in path:
                    closed = True
                    break
                prev, cur = cur, nxt[0]
                path.append(cur)
            if cur in images and not closed:
                paths.append(tuple(path))
    return paths


def verify_stretching(g: ColoredGraph, h: ColoredGraph, w: StretchWitness) -> bool:
    """Check the four conditions of a (k, t)-stretching for the given witness."""
    gw = w.g_w
    if len(gw) != g.vertex_count:
        raise InvalidWitness("witness must map every base vertex")
    if len(set(gw)) != len(gw):
        raise InvalidWitness("witness is not injective")
    if any(not (0 <= x < h.vertex_count) for x in gw):
        raise InvalidWitness("witness maps outside V(H)")
    images = set(gw)
    inv = {x: v for v, x in enumerate(gw)}
    # interior vertices have degree 2
    if any(h.degree(x) != 2 for x in range(h.vertex_count) if x not in images):
        return False
    paths = _branch_paths(h, images)
    by_pair = {}
    for p in paths:
        a, b = inv[p[0]], inv[p[-1]]
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        by_pair.setdefault(key, set()).add(p if a < b else tuple(reversed(p)))
    # a path between base images exists (uniquely) iff the base edge exists
    for key, ps in by_pair.items():
        if key not in g.edges or len(ps) != 1:
            return False
    if set(by_pair) != set(g.edges):
        return False
    # every branch-to-branch path has length <= k (loops back to one image included)
    if any(len(p) - 1 > w.k for p in paths):
        return False
    for v in range(g.vertex_count):
        interior = set()
        for u in g.adjacency[v]:
            (p,) = by_pair[(min(u, v), max(u, v))]
            interior.update(p[1:-1])
        if len(interior) > w.t:
            return False
    return True


def subdivision_expansion(g: ColoredGraph, lengths) -> Fraction:
    """Exact expansion of a subdivision of ``g`` without enumerating all of V(H).

    For a fixed set T of branch vertices inside S, each subdivided edge only
    contributes through how many of its interior vertices lie in S: a path
    with both ends in S costs 0 if all its interior is in S and 2 otherwise,
    symmetrically for both ends outside, and 1 if the ends are split.  A
    min-plus knapsack over paths (vectorized over all T) then gives the
    minimum cut for every |S|.
    """
    n = g.vertex_count
    if n > 16:
        raise BudgetExceeded("subdivision_expansion enumerates 2^n branch sets")
    lens = [lengths if isinstance(lengths, int) else lengths.get(e, 0) for e in g.edge_list]
    total = n + sum(lens)
    big = np.int32(1 << 20)
    tm = np.arange(1 << n, dtype=np.int64)
    dp = np.full((1 << n, total + 1), big, dtype=np.int32)
    dp[tm, _popcount(tm)] = 0
    for (u, v), L in zip(g.edge_list, lens):
        iu = ((tm >> u) & 1).astype(bool)
        iv = ((tm >> v) & 1).astype(bool)
        new = np.full_like(dp, big)
        for j in range(L + 1):
            if L == 0:
                c = (iu != iv).astype(np.int32)
            else:
                both_in = iu & iv
                both_out = ~iu & ~iv
                c = np.ones(1 << n, dtype=np.int32)
                c[both_in] = 0 if j == L else 2
                c[both_out] = 0 if j == 0 else 2
            cand = dp[:, :total + 1 - j] + c[:, None]
            np.minimum(new[:, j:], cand, out=new[:, j:])
        dp = new
    best = dp.min(axis=0)
    return min(Fraction(int(best[k]), min(k, total - k)) for k in range(1, total))


# ----------------------------------------------------------------------------
# I/O

def write_edge_list(g: ColoredGraph) -> str:
    head = f"{g.vertex_count} {g.edge_count}" + (" colored" if g.colors is not None else "")
    lines = [head] + [f"{u} {v}" for u, v in g.edge_list]
    if g.colors is not None:
        lines += [f"{v} {c}" for v, c in enumerate(g.colors)]
    return "\n".join(lines) + "\n"


def read_edge_list(text: str) -> ColoredGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphError("empty graph file")
    head = rows[0]
    try:
        n, m = int(head[0]), int(head[1])
    except (IndexError, ValueError) as exc:
        raise GraphError(f"bad header: {' '.join(head)}") from exc
    colored = len(head) > 2 and head[2] == "colored"
    if len(head) > 3 or (len(head) == 3 and not colored):
        raise GraphError(f"bad header: {' '.join(head)}")
    need = 1 + m + (n if colored else 0)
    if len(rows) != need:
        raise GraphError(f"expected {need} lines, found {len(rows)}")
    try:
        edges = [(int(a), int(b)) for a, b in rows[1:1 + m]]
        colors = None
        if colored:
            colors = [0] * n
            seen = set()
            for v, c in rows[1 + m:]:
                v = int(v)
                if v in seen or not 0 <= v < n:
                    raise GraphError(f"bad color line for vertex {v}")
                seen.add(v)
                colors[v] = int(c)
    except ValueError as exc:
        raise GraphError("non-integer token in graph file") from exc
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge {(u, v)} out of range")
    return ColoredGraph.from_edges(n, edges, colors)


def to_dot(g: ColoredGraph, name: str = "G", labels: Optional[Sequence[str]] = None) -> str:
    lines = [f"graph {name} {{"]
    for v in range(g.vertex_count):
        attrs = []
        if labels is not None:
            attrs.append(f'label="{labels[v]}"')
        if g.colors is not None:
            attrs.append(f'color_id={g.colors[v]}')
        lines.append(f"  {v}" + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
    for u, v in g.edge_list:
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
