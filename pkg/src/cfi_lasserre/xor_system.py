"""The F2 system phi(G, f, g), partial permutations, harmonious maps and the encoding alpha."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .cfi import CFIGraph, Middle, TwistFunction, build_X
from .graph_core import ColoredGraph, GraphError


class UndefinedEncoding(ValueError):
    pass


class XorVar(NamedTuple):
    kind: str  # "x" or "y"
    v: int
    u: int

    def __str__(self):
        return f"{self.kind}_{self.v}_{self.u}"


@dataclass(frozen=True)
class XorConstraint:
    variables: frozenset
    rhs: int

    def __post_init__(self):
        if not self.variables:
            raise ValueError("constraint must mention a variable")
        if self.rhs not in (0, 1):
            raise ValueError("rhs must be a bit")

    def __xor__(self, other: "XorConstraint"):
        return (self.variables ^ other.variables, self.rhs ^ other.rhs)


# ----------------------------------------------------------------------------
# partial permutations

class PartialIso:
    """Finite injective partial map, or the bottom element.

    Stored as a sorted tuple of ``(source, target)`` pairs, which doubles as
    a canonical cache key.
    """

    __slots__ = ("pairs", "_map")

    def __init__(self, pairs: Iterable = (), _checked: bool = False):
        if pairs is None:
            self.pairs = None
            self._map = None
            return
        pairs = tuple(sorted(set((int(a), int(b)) for a, b in pairs)))
        m = dict(pairs)
        if not _checked and (len(m) != len(pairs) or len(set(m.values())) != len(m)):
            raise ValueError("not an injective partial map")
        self.pairs = pairs
        self._map = m

    @property
    def is_bottom(self) -> bool:
        return self.pairs is None

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    def image(self) -> frozenset:
        return frozenset(self._map.values())

    def __len__(self):
        return 0 if self.pairs is None else len(self.pairs)

    def __getitem__(self, i):
        return self._map[i]

    def items(self):
        return self.pairs

    def consistent(self, other: "PartialIso") -> bool:
        if self.is_bottom or other.is_bottom:
            return False
        inv = {b: a for a, b in self.pairs}
        for a, b in other.pairs:
            if a in self._map and self._map[a] != b:
                return False
            if b in inv and inv[b] != a:
                return False
        return True

    def meet(self, other: "PartialIso") -> "PartialIso":
        if not self.consistent(other):
            return BOTTOM
        return PartialIso(self.pairs + other.pairs, _checked=True)

    __and__ = meet

    def __eq__(self, other):
        return isinstance(other, PartialIso) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        if self.is_bottom:
            return "PartialIso(BOTTOM)"
        return f"PartialIso({list(self.pairs)})"

    @classmethod
    def single(cls, i: int, j: int) -> "PartialIso":
        return cls([(i, j)])


BOTTOM = PartialIso(None)
EMPTY = PartialIso(())


# ----------------------------------------------------------------------------
# the system

@dataclass(frozen=True)
class XorSystem:
    base: ColoredGraph
    f: TwistFunction
    g: TwistFunction
    variables: tuple
    constraints: tuple

    @cached_property
    def var_index(self) -> dict:
        return {x: i for i, x in enumerate(self.variables)}

    @cached_property
    def x_f(self) -> CFIGraph:
        return build_X(self.base, self.f)

    @cached_property
    def x_g(self) -> CFIGraph:
        return build_X(self.base, self.g)

    @property
    def twist_difference(self) -> tuple:
        """c_e = f(e) xor g(e), aligned with the base edge list."""
        return tuple(a ^ b for a, b in zip(self.f.bits, self.g.bits))

    def matrix(self):
        """Augmented F2 matrix [A | b] as uint8."""
        M = np.zeros((len(self.constraints), len(self.variables) + 1), dtype=np.uint8)
        for r, c in enumerate(self.constraints):
            for x in c.variables:
                M[r, self.var_index[x]] = 1
            M[r, -1] = c.rhs
        return M

    def satisfiable(self) -> bool:
        return gf2_consistent(self.matrix())

    def implied_parity(self, variables: Iterable) -> Optional[int]:
        """Value of the XOR of ``variables`` forced by the system, or None if free."""
        M = self.matrix()
        row = np.zeros(M.shape[1] - 1, dtype=np.uint8)
        for x in variables:
            row[self.var_index[x]] ^= 1
        return gf2_implied(M, row)

    def to_text(self) -> str:
        """XOR-CNF style text: a legend header then ``x v1 .. vk rhs`` lines (1-based)."""
        lines = [f"c {i + 1} {x}" for i, x in enumerate(self.variables)]
        lines.append(f"p xor {len(self.variables)} {len(self.constraints)}")
        for c in self.constraints:
            vs = sorted(self.var_index[x] + 1 for x in c.variables)
            lines.append("x " + " ".join(map(str, vs)) + f" {c.rhs}")
        return "\n".join(lines) + "\n"


def build_phi(base: ColoredGraph, f: TwistFunction, g: TwistFunction) -> XorSystem:
    if not base.is_regular(3):
        raise GraphError("base graph must be 3-regular")
    variables = []
    constraints = []
    for v in range(base.vertex_count):
        nb = base.adjacency[v]
        for u in nb:
            variables += [XorVar("x", v, u), XorVar("y", v, u)]
        for u in nb:
            constraints.append(XorConstraint(frozenset([XorVar("x", v, u), XorVar("y", v, u)]), 0))
        constraints.append(XorConstraint(frozenset(XorVar("y", v, u) for u in nb), 0))
    for (u, v), a, b in zip(base.edge_list, f.bits, g.bits):
        constraints.append(XorConstraint(frozenset([XorVar("x", u, v), XorVar("x", v, u)]), a ^ b))
    return XorSystem(base, f, g, tuple(variables), tuple(constraints))


# ----------------------------------------------------------------------------
# F2 elimination

def gf2_rref(M: np.ndarray):
    """Row-reduce a 0/1 matrix in place over F2; returns pivot columns."""
    M %= 2
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(M[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            M[[r, p]] = M[[p, r]]
        others = np.nonzero(M[:, c])[0]
        others = others[others != r]
        M[others] ^= M[r]
        pivots.append(c)
        r += 1
    return pivots


def gf2_consistent(aug: np.ndarray) -> bool:
    M = aug.copy()
    pivots = gf2_rref(M)
    return (M.shape[1] - 1) not in pivots


def gf2_implied(aug: np.ndarray, row: np.ndarray) -> Optional[int]:
    """If ``row . x`` is determined by the consistent system ``aug``, return its value."""
    M = aug.copy()
    pivots = gf2_rref(M)
    if (M.shape[1] - 1) in pivots:
        raise ValueError("system is inconsistent; every parity is implied")
    r = row.copy() % 2
    rhs = 0
    for k, c in enumerate(pivots):
        if r[c]:
            r ^= M[k, :-1]
            rhs ^= int(M[k, -1])
    return rhs if not r.any() else None


# ----------------------------------------------------------------------------
# harmonious maps and the encoding alpha

def is_color_preserving(sys: XorSystem, sigma: PartialIso) -> bool:
    if sigma.is_bottom:
        return False
    cf, cg = sys.x_f.graph.colors, sys.x_g.graph.colors
    return all(cf[a] == cg[b] for a, b in sigma.pairs)


def _flip_bits(sys: XorSystem, sigma: PartialIso):
    """Yield (source id, target id) pairs with structured labels."""
    for a, b in sigma.pairs:
        yield sys.x_f.ids[a], sys.x_g.ids[b]


def is_harmonious(sys: XorSystem, sigma: PartialIso) -> bool:
    """No two middle mappings in one gadget disagree on a coordinate's flip bit."""
    if not is_color_preserving(sys, sigma):
        return False
    flips = {}
    for s, t in _flip_bits(sys, sigma):
        if isinstance(s, Middle):
            fl = tuple(x ^ y for x, y in zip(s.bits, t.bits))
            if flips.setdefault(s.v, fl) != fl:
                return False
    return True


def alpha_of(sys: XorSystem, sigma: PartialIso) -> dict:
    """Partial assignment XorVar -> bit encoded by a harmonious map.

    Mapping the pair vertex (v,u)_b to (v,u)_b' sets X(v,u) = b xor b'; the
    middle mapping v_b -> v_b' sets Y(v,u_k) = b_k xor b'_k.
    """
    if not is_harmonious(sys, sigma):
        raise UndefinedEncoding("alpha is defined only for harmonious color-preserving maps")
    out = {}
    for s, t in _flip_bits(sys, sigma):
        if isinstance(s, Middle):
            nb = sys.base.adjacency[s.v]
            for k, u in enumerate(nb):
                out[XorVar("y", s.v, u)] = s.bits[k] ^ t.bits[k]
        else:
            out[XorVar("x", s.v, s.u)] = s.bit ^ t.bit
    return out


def violates(alpha: dict, sys: XorSystem) -> bool:
    for c in sys.constraints:
        if all(x in alpha for x in c.variables):
            if sum(alpha[x] for x in c.variables) % 2 != c.rhs:
                return True
    return False
