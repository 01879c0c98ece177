"""Width-bounded XOR derivations over edge sets, refutation width, classes and signs.

The system phi(G, f, g) is projected onto edge sets: y-variables are eliminated
through x = y, and the two orientations of an edge are identified through the
edge constraint, x_(hi,lo) = x_(lo,hi) xor c_e with c_e = f(e) xor g(e).  What
remains is one generator per base vertex v, with support delta(v) (the edges
at v) and right-hand side charge(v) = xor of c_e over edges where v is the
larger endpoint.  Edge sets are int bitsets indexed by ``base.edge_list``.
"""
from __future__ import annotations

import heapq
import itertools
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .xor_system import XorSystem, XorVar

SCHEMA_VERSION = 1


class IllDefinedGamma(RuntimeError):
    """Some edge set is derivable with both signs inside the budgets."""


class BudgetExceeded(RuntimeError):
    pass


def bits_of(mask: int) -> tuple:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def mask_of(edges: Iterable[int]) -> int:
    m = 0
    for e in edges:
        m |= 1 << e
    return m


def lex_key(mask: int) -> tuple:
    return bits_of(mask)


@dataclass(frozen=True)
class Generator:
    support: int
    rhs: int


def vertex_generators(sys: XorSystem) -> list:
    """Projected constraint of each base vertex: (delta(v), charge(v))."""
    base = sys.base
    c = sys.twist_difference
    gens = []
    for v in range(base.vertex_count):
        sup = 0
        rhs = 0
        for u in base.adjacency[v]:
            e = base.edge_id(v, u)
            sup |= 1 << e
            if v > u:
                rhs ^= c[e]
        gens.append(Generator(sup, rhs))
    return gens


def var_edge_shift(sys: XorSystem, var: XorVar, collapse: str = "twisted") -> tuple:
    """(edge id, shift) with var = w_e xor shift on the solutions of the local constraints.

    ``collapse="literal"`` identifies all four directed variables of an edge
    with w_e directly (shift always 0), ignoring the twist.
    """
    e = sys.base.edge_id(var.v, var.u)
    if collapse == "literal":
        return e, 0
    if collapse != "twisted":
        raise ValueError(f"unknown collapse {collapse!r}")
    return e, (sys.twist_difference[e] if var.v > var.u else 0)


def step_relation(S: int, sys: XorSystem) -> list:
    """All one-step successors (T, sign) of the edge set S."""
    return [(S ^ g.support, -1 if g.rhs else 1) for g in vertex_generators(sys)]


# ----------------------------------------------------------------------------
# refutation width

@dataclass(frozen=True)
class WidthVerdict:
    """Either the exact minimal refutation width or a lower bound."""

    value: int
    exact: bool
    states: int = 0

    def __str__(self):
        return str(self.value) if self.exact else f">= {self.value}"

    def to_json(self):
        return self.value if self.exact else f">={self.value}"


class _Engine:
    """Bottleneck search over (bitset, sign) states for a list of XOR generators."""

    def __init__(self, gens: list, nbits: int):
        self.gens = gens
        self.nbits = nbits
        self.sizes = [bin(g.support).count("1") for g in gens]
        self.touch = [[] for _ in range(nbits)]
        for k, g in enumerate(gens):
            for b in bits_of(g.support):
                self.touch[b].append(k)

    def successors(self, S: int, limit: int):
        """Generators whose application keeps |T| <= limit (others pruned cheaply)."""
        size = bin(S).count("1")
        touched = set()
        for b in bits_of(S):
            touched.update(self.touch[b])
        for k, g in enumerate(self.gens):
            if k not in touched and size + self.sizes[k] > limit:
                continue
            T = S ^ g.support
            if bin(T).count("1") <= limit:
                yield T, g.rhs

    def bottleneck(self, start: int, max_w: int, max_states: int):
        """Minimal max-width to reach (start, sign -) from (start, sign +), or None."""
        w0 = bin(start).count("1")
        best = {(start, 0): w0}
        heap = [(w0, start, 0)]
        while heap:
            w, S, sg = heapq.heappop(heap)
            if best.get((S, sg)) != w:
                continue
            if S == start and sg == 1:
                return w, len(best)
            for T, r in self.successors(S, max_w):
                nw = max(w, bin(T).count("1"))
                key = (T, sg ^ r)
                if nw < best.get(key, max_w + 1):
                    best[key] = nw
                    if len(best) > max_states:
                        raise BudgetExceeded("state budget exhausted")
                    heapq.heappush(heap, (nw, T, sg ^ r))
        return None, len(best)


def refutation_width(sys: XorSystem, max_w: int, max_states: int = 5_000_000) -> WidthVerdict:
    """Minimal w with a width-w derivation of the contradiction, or ">= max_w + 1"."""
    eng = _Engine(vertex_generators(sys), sys.base.edge_count)
    w, states = eng.bottleneck(0, max_w, max_states)
    if w is None:
        return WidthVerdict(max_w + 1, False, states)
    return WidthVerdict(w, True, states)


def literal_generators(sys: XorSystem) -> list:
    """Constraints of phi over the 6n directed variables, as bitset generators."""
    return [Generator(mask_of(sys.var_index[x] for x in c.variables), c.rhs) for c in sys.constraints]


def literal_refutation_width(sys: XorSystem, max_w: int, max_states: int = 5_000_000) -> WidthVerdict:
    """Same search as refutation_width but on the unprojected system."""
    eng = _Engine(literal_generators(sys), len(sys.variables))
    w, states = eng.bottleneck(0, max_w, max_states)
    if w is None:
        return WidthVerdict(max_w + 1, False, states)
    return WidthVerdict(w, True, states)


def project_variables(sys: XorSystem, variables: int) -> tuple:
    """Project a set of directed variables to (edge set, sign shift)."""
    S = 0
    shift = 0
    for i in bits_of(variables):
        e, s = var_edge_shift(sys, sys.variables[i])
        S ^= 1 << e
        shift ^= s
    return S, shift


def derives(sys: XorSystem, S: int, T: int, width: int) -> set:
    """Set of sign bits b (0 for '+', 1 for '-') such that S derives T at the given width."""
    eng = _Engine(vertex_generators(sys), sys.base.edge_count)
    seen = {(S, 0)}
    q = deque([(S, 0)])
    found = set()
    while q:
        X, sg = q.popleft()
        if X == T:
            found.add(sg)
        for Y, r in eng.successors(X, width):
            key = (Y, sg ^ r)
            if key not in seen:
                seen.add(key)
                q.append(key)
    return found


# ----------------------------------------------------------------------------
# classes and signs

@dataclass
class ClassTable:
    """Classes of edge sets of size <= size_budget under width-width_budget derivability.

    Components are explored lazily on first lookup unless built eagerly.  Each
    explored set X records (component id, sign relative to the component root).
    Class keys are exemplar bitsets (lexicographically least member).
    """

    sys: XorSystem
    size_budget: int
    width_budget: int
    _node: dict = field(default_factory=dict)  # X -> (component id, sign bit)
    _exemplar: dict = field(default_factory=dict)  # component id -> exemplar mask
    _components: list = field(default_factory=list)  # component id -> list of member L-sets
    _engine: object = None

    def __post_init__(self):
        if self.size_budget < 0 or self.width_budget < self.size_budget:
            raise ValueError("need 0 <= size_budget <= width_budget")
        self._engine = _Engine(vertex_generators(self.sys), self.sys.base.edge_count)

    # exploration -----------------------------------------------------------
    def _explore(self, root: int) -> int:
        comp = len(self._components)
        node = self._node
        node[root] = (comp, 0)
        members = []
        q = deque([root])
        limit = self.width_budget
        while q:
            X = q.popleft()
            sg = node[X][1]
            if bin(X).count("1") <= self.size_budget:
                members.append(X)
            for Y, r in self._engine.successors(X, limit):
                s2 = sg ^ r
                old = node.get(Y)
                if old is None:
                    node[Y] = (comp, s2)
                    q.append(Y)
                elif old[1] != s2:
                    raise IllDefinedGamma(
                        f"edge set {bits_of(Y)} derivable with both signs at width {limit}")
        self._components.append(members)
        self._exemplar[comp] = min(members, key=lex_key)
        return comp

    def explore_all(self):
        """Visit every edge set of size <= size_budget (eager construction)."""
        m = self.sys.base.edge_count
        for k in range(self.size_budget + 1):
            for combo in itertools.combinations(range(m), k):
                X = mask_of(combo)
                if X not in self._node:
                    self._explore(X)
        return self

    # queries ---------------------------------------------------------------
    def _locate(self, X: int):
        if bin(X).count("1") > self.width_budget:
            raise ValueError("edge set exceeds the width budget")
        hit = self._node.get(X)
        if hit is None:
            self._explore(X)
            hit = self._node[X]
        return hit

    def lookup(self, S: int) -> tuple:
        """(class key, gamma) of an edge set with |S| <= size_budget."""
        if bin(S).count("1") > self.size_budget:
            raise ValueError("edge set exceeds the size budget")
        comp, sg = self._locate(S)
        ex = self._exemplar[comp]
        return ex, (-1 if sg ^ self._node[ex][1] else 1)

    def class_of(self, S: int) -> int:
        return self.lookup(S)[0]

    def gamma(self, S: int) -> int:
        return self.lookup(S)[1]

    def members(self, key: int) -> list:
        comp, _ = self._node[key]
        return list(self._components[comp])

    def relative_sign(self, S: int, T: int) -> Optional[int]:
        """+1/-1 if S and T are connected at the width budget, else None."""
        cs, ss = self._locate(S)
        ct, st = self._locate(T)
        if cs != ct:
            return None
        return -1 if ss ^ st else 1

    def empty_component(self) -> dict:
        """Every U with |U| <= width_budget and empty ~ U, mapped to its sign."""
        comp, s0 = self._locate(0)
        return {X: (-1 if sg ^ s0 else 1) for X, (c, sg) in self._node.items() if c == comp}

    @property
    def explored_classes(self) -> list:
        return sorted(self._exemplar.values(), key=lex_key)

    @property
    def explored_nodes(self) -> int:
        return len(self._node)

    # persistence -----------------------------------------------------------
    def to_json(self) -> str:
        entries = []
        for X, (comp, sg) in sorted(self._node.items()):
            entries.append([X, comp, sg])
        return json.dumps({
            "schema": SCHEMA_VERSION,
            "edges": [list(e) for e in self.sys.base.edge_list],
            "twist_difference": list(self.sys.twist_difference),
            "size_budget": self.size_budget,
            "width_budget": self.width_budget,
            "components": [[self._exemplar[c], sorted(ms)] for c, ms in enumerate(self._components)],
            "nodes": entries,
        })

    @classmethod
    def from_json(cls, sys: XorSystem, text: str) -> "ClassTable":
        data = json.loads(text)
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError("unsupported class table schema")
        if [tuple(e) for e in data["edges"]] != list(sys.base.edge_list) or \
                tuple(data["twist_difference"]) != sys.twist_difference:
            raise ValueError("class table belongs to a different system")
        t = cls(sys, data["size_budget"], data["width_budget"])
        for c, (ex, ms) in enumerate(data["components"]):
            t._exemplar[c] = ex
            t._components.append(list(ms))
        for X, comp, sg in data["nodes"]:
            t._node[X] = (comp, sg)
        return t

    def with_flipped_sign(self, S: int) -> "ClassTable":
        """Copy with one recorded sign corrupted (negative control for sanity checks)."""
        t = ClassTable(self.sys, self.size_budget, self.width_budget)
        t._node = dict(self._node)
        t._exemplar = dict(self._exemplar)
        t._components = [list(x) for x in self._components]
        comp, sg = t._locate(S)
        t._node[S] = (comp, sg ^ 1)
        return t


def default_budgets(r: int) -> tuple:
    """(size budget, width budget) = (floor(r/3), floor(2r/3))."""
    return r // 3, (2 * r) // 3


def build_class_table(sys: XorSystem, r: Optional[int] = None, *, size_budget: Optional[int] = None,
                      width_budget: Optional[int] = None, eager: bool = True,
                      check_refutation: bool = True) -> ClassTable:
    """Class table for budgets derived from r, or for explicit budgets.

    With ``check_refutation`` and an r, the system must have no width-r
    refutation, otherwise IllDefinedGamma is raised up front.
    """
    if r is not None:
        s, w = default_budgets(r)
        size_budget = s if size_budget is None else size_budget
        width_budget = w if width_budget is None else width_budget
        if check_refutation:
            verdict = refutation_width(sys, r)
            if verdict.exact:
                raise IllDefinedGamma(f"system has a width-{verdict.value} refutation (r = {r})")
    if size_budget is None or width_budget is None:
        raise ValueError("give r or both budgets")
    table = ClassTable(sys, size_budget, width_budget)
    if eager:
        table.explore_all()
    return table


def classes_sanity(table: ClassTable, samples: int = 200, seed: int = 0) -> dict:
    """Re-derive sampled relations with an independent search and compare.

    Checks reflexivity, symmetry, transitivity and the identity
    gamma(S) gamma(S xor U) = gamma(U) for U ~ empty.
    """
    rng = random.Random(seed)
    sys = table.sys
    w = table.width_budget
    m = sys.base.edge_count
    violations = []
    checked = {"reflexive": 0, "symmetric": 0, "transitive": 0, "empty_class_identity": 0}

    def rand_set():
        k = rng.randint(0, table.size_budget)
        return mask_of(rng.sample(range(m), k))

    def in_class_partner(S):
        key = table.class_of(S)
        ms = table.members(key)
        return ms[rng.randrange(len(ms))]

    for _ in range(samples):
        S = rand_set()
        key, gS = table.lookup(S)
        signs = derives(sys, S, S, w)
        checked["reflexive"] += 1
        if 0 not in signs:
            violations.append({"check": "reflexive", "S": bits_of(S)})
        T = in_class_partner(S)
        gT = table.gamma(T)
        fwd, back = derives(sys, S, T, w), derives(sys, T, S, w)
        expect = 0 if gS == gT else 1
        checked["symmetric"] += 1
        if fwd != {expect} or back != fwd:
            violations.append({"check": "symmetric", "S": bits_of(S), "T": bits_of(T),
                               "expected": expect, "found": sorted(fwd)})
        R = in_class_partner(T)
        checked["transitive"] += 1
        if derives(sys, S, R, w) != {0 if gS == table.gamma(R) else 1}:
            violations.append({"check": "transitive", "S": bits_of(S), "R": bits_of(R)})
    empty = table.empty_component()
    us = sorted(empty)
    for _ in range(samples):
        U = us[rng.randrange(len(us))]
        S = rand_set()
        SU = S ^ U
        if bin(SU).count("1") > table.size_budget:
            continue
        checked["empty_class_identity"] += 1
        rel = table.relative_sign(S, SU)
        if rel is None or table.gamma(S) * table.gamma(SU) != empty[U]:
            violations.append({"check": "empty_class_identity", "S": bits_of(S), "U": bits_of(U)})
    return {"checked": checked, "violations": violations}
