"""Lasserre vectors for CFI pairs and exact verification of constraints (l1)-(l5).

Two vector families share one verifier:

* ``LasserreInstance``: v_sigma = sum_S h_sigma^(S) gamma(S) e_[S], coordinates
  indexed by class exemplars of a ClassTable.
* ``IsoVectorFamily``: one coordinate per isomorphism, v_sigma(k) = sqrt(p_k)
  when the k-th isomorphism extends sigma.

Vectors are dicts ``coordinate -> value`` with Fraction values (float values
in the approximate mode of IsoVectorFamily).
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .cfi import Middle, is_isomorphism
from .fourier import edge_assignment, h_of_sigma
from .graph_core import ColoredGraph
from .resolution import ClassTable, build_class_table
from .xor_system import BOTTOM, EMPTY, PartialIso, XorSystem

MAX_REPORTED_FAILURES = 20


class LevelExceeded(ValueError):
    pass


class InvalidDistribution(ValueError):
    pass


# ----------------------------------------------------------------------------
# sparse vectors

def inner(a: dict, b: dict):
    if len(a) > len(b):
        a, b = b, a
    return sum((x * b[k] for k, x in a.items() if k in b), Fraction(0))


def vsum(vectors) -> dict:
    out = {}
    for v in vectors:
        for k, x in v.items():
            out[k] = out.get(k, 0) + x
    return {k: x for k, x in out.items() if x != 0}


def scale(v: dict, c) -> dict:
    return {k: x * c for k, x in v.items() if x * c != 0}


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def fmt_vector(v: dict) -> dict:
    return {str(k): fmt(x) for k, x in sorted(v.items())}


# ----------------------------------------------------------------------------
# partial isomorphisms between two colored graphs

def is_partial_iso(G: ColoredGraph, H: ColoredGraph, sigma: PartialIso) -> bool:
    if sigma.is_bottom:
        return False
    if G.colors is not None and H.colors is not None:
        if any(G.colors[a] != H.colors[b] for a, b in sigma.pairs):
            return False
    for (a, b), (c, d) in itertools.combinations(sigma.pairs, 2):
        if G.has_edge(a, c) != H.has_edge(b, d):
            return False
    return True


def candidate_targets(G: ColoredGraph, H: ColoredGraph, i: int) -> list:
    """Targets i' that keep a single mapping color-preserving."""
    if G.colors is None or H.colors is None:
        return list(range(H.vertex_count))
    c = G.colors[i]
    return [j for j in range(H.vertex_count) if H.colors[j] == c]


def enumerate_partial_isos(G: ColoredGraph, H: ColoredGraph, max_dom: int):
    """All color-preserving partial isomorphisms with |dom| <= max_dom, sources increasing."""
    targets = [candidate_targets(G, H, i) for i in range(G.vertex_count)]

    def rec(start, pairs, used):
        yield PartialIso(pairs, _checked=True) if pairs else EMPTY
        if len(pairs) == max_dom:
            return
        for i in range(start, G.vertex_count):
            for j in targets[i]:
                if j in used:
                    continue
                if any(G.has_edge(a, i) != H.has_edge(b, j) for a, b in pairs):
                    continue
                yield from rec(i + 1, pairs + [(i, j)], used | {j})

    yield from rec(0, [], frozenset())


def random_partial_iso(G: ColoredGraph, H: ColoredGraph, size: int, rng: random.Random) -> PartialIso:
    """Random color-preserving partial isomorphism of domain ``size`` (greedy, may be smaller)."""
    order = rng.sample(range(G.vertex_count), G.vertex_count)
    pairs = []
    used = set()
    for i in order:
        if len(pairs) == size:
            break
        opts = [j for j in candidate_targets(G, H, i) if j not in used
                and all(G.has_edge(a, i) == H.has_edge(b, j) for a, b in pairs)]
        if opts:
            j = rng.choice(opts)
            pairs.append((i, j))
            used.add(j)
    return PartialIso(pairs)


# ----------------------------------------------------------------------------
# vector families

class VectorFamily:
    G: ColoredGraph
    H: ColoredGraph
    level: int
    exact: bool = True
    tol: float = 0.0

    def vector(self, sigma: PartialIso) -> dict:
        raise NotImplementedError

    def extended_vector(self, sigma: PartialIso) -> dict:
        """Vector of a map that may exceed the level (only used inside sums)."""
        return self.vector(sigma)

    def admissible_extension(self, sigma: PartialIso, i: int) -> bool:
        return len(sigma) < self.level or i in sigma.domain

    def admissible_extension_target(self, sigma: PartialIso, j: int) -> bool:
        return len(sigma) < self.level or j in sigma.image()

    def sigmas(self):
        """Exhaustive iterator over the level's maps, or None if infeasible."""
        return None

    def sample_sigma(self, rng: random.Random) -> PartialIso:
        return random_partial_iso(self.G, self.H, rng.randint(0, self.level), rng)

    def equal(self, a, b) -> bool:
        if self.exact:
            return a == b
        return abs(a - b) <= self.tol

    def vectors_equal(self, a: dict, b: dict) -> bool:
        keys = set(a) | set(b)
        return all(self.equal(a.get(k, 0), b.get(k, 0)) for k in keys)


def _vertex_support(ids, base, i: int) -> int:
    vid = ids[i]
    if isinstance(vid, Middle):
        out = 0
        for u in base.adjacency[vid.v]:
            out |= 1 << base.edge_id(vid.v, u)
        return out
    return 1 << base.edge_id(vid.v, vid.u)


class LasserreInstance(VectorFamily):
    """Vectors built from h_sigma and a class table over the system phi(G, f, g)."""

    def __init__(self, sys: XorSystem, table: ClassTable, level: int, collapse: str = "twisted"):
        if level < 0:
            raise ValueError("level must be nonnegative")
        if table.sys is not sys:
            raise ValueError("class table built for a different system")
        self.sys = sys
        self.table = table
        self.level = level
        self.collapse = collapse
        self.G = sys.x_f.graph
        self.H = sys.x_g.graph
        self._cache = {}
        self._support = {}

    @classmethod
    def from_system(cls, sys: XorSystem, r: Optional[int] = None, *, level: Optional[int] = None,
                    size_budget: Optional[int] = None, width_budget: Optional[int] = None,
                    eager: bool = False, collapse: str = "twisted") -> "LasserreInstance":
        """Level defaults to floor(r/9); explicit budgets override the r-derived ones."""
        table = build_class_table(sys, r, size_budget=size_budget, width_budget=width_budget,
                                  eager=eager, check_refutation=r is not None)
        if level is None:
            if r is None:
                raise ValueError("give r or an explicit level")
            level = r // 9
        return cls(sys, table, level, collapse)

    def h(self, sigma: PartialIso):
        return h_of_sigma(self.sys, sigma, self.collapse)

    def extended_vector(self, sigma: PartialIso) -> dict:
        key = sigma.pairs
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = {}
        if not sigma.is_bottom:
            s = self.table.size_budget
            for S, c in self.h(sigma).coeffs.items():
                if S.bit_count() > s:
                    continue
                k, gam = self.table.lookup(S)
                out[k] = out.get(k, 0) + c * gam
            out = {k: x for k, x in out.items() if x != 0}
        self._cache[key] = out
        return out

    def vector(self, sigma: PartialIso) -> dict:
        if len(sigma) > self.level:
            raise LevelExceeded(f"|dom sigma| = {len(sigma)} exceeds level {self.level}")
        return self.extended_vector(sigma)

    def support(self, sigma: PartialIso) -> int:
        """Edge bits fixed by alpha_sigma (0 for maps with a zero vector)."""
        hit = self._support.get(sigma.pairs)
        if hit is None:
            a = edge_assignment(self.sys, sigma, self.collapse)
            hit = 0
            for e in (a or {}):
                hit |= 1 << e
            self._support[sigma.pairs] = hit
        return hit

    def admissible_extension(self, sigma: PartialIso, i: int) -> bool:
        if i in sigma.domain or len(sigma) < self.level:
            return True
        sup = self.support(sigma) | _vertex_support(self.sys.x_f.ids, self.sys.base, i)
        return sup.bit_count() <= self.table.size_budget

    def admissible_extension_target(self, sigma: PartialIso, j: int) -> bool:
        if j in sigma.image() or len(sigma) < self.level:
            return True
        sup = self.support(sigma) | _vertex_support(self.sys.x_g.ids, self.sys.base, j)
        return sup.bit_count() <= self.table.size_budget

    def sigmas(self):
        if self.level > 1 and self.G.vertex_count > 12:
            return None
        return enumerate_partial_isos(self.G, self.H, self.level)

    def empty_class_sum(self, sigma: PartialIso):
        """sum over U ~ empty (width budget) of sign(U) h_sigma^(U)."""
        if sigma.is_bottom:
            return Fraction(0)
        comp = self._empty_component()
        return sum((c * comp[S] for S, c in self.h(sigma).coeffs.items() if S in comp), Fraction(0))

    def _empty_component(self):
        if not hasattr(self, "_empty"):
            self._empty = self.table.empty_component()
        return self._empty


def rational_sqrt(p: Fraction) -> Optional[Fraction]:
    p = Fraction(p)
    a, b = math.isqrt(p.numerator), math.isqrt(p.denominator)
    if a * a == p.numerator and b * b == p.denominator:
        return Fraction(a, b)
    return None


class IsoVectorFamily(VectorFamily):
    """One coordinate per isomorphism; v_sigma(k) = sqrt(p_k) if iso k extends sigma."""

    def __init__(self, G: ColoredGraph, H: ColoredGraph, isos: Sequence, probs: Sequence,
                 level: int, mode: str = "exact", tol: float = 1e-9):
        if not isos or len(isos) != len(probs):
            raise InvalidDistribution("need one probability per isomorphism, at least one")
        if mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")
        for pi in isos:
            if not qp_check(G.adjacency_matrix(), H.adjacency_matrix(), pi) or not is_isomorphism(G, H, pi):
                raise InvalidDistribution("list contains a map that is not an isomorphism")
        self.G, self.H = G, H
        self.isos = [tuple(int(x) for x in pi) for pi in isos]
        self.level = level
        self.exact = mode == "exact"
        self.tol = 0.0 if self.exact else tol
        if self.exact:
            ps = [Fraction(p) for p in probs]
            if any(p < 0 for p in ps) or sum(ps) != 1:
                raise InvalidDistribution("probabilities must be nonnegative and sum to 1")
            roots = [rational_sqrt(p) for p in ps]
            if any(r is None for r in roots):
                raise InvalidDistribution("exact mode needs probabilities with rational square roots")
            self.weights = roots
        else:
            ps = [float(p) for p in probs]
            if any(p < 0 for p in ps) or abs(sum(ps) - 1) > tol:
                raise InvalidDistribution("probabilities must be nonnegative and sum to 1")
            self.weights = [math.sqrt(p) for p in ps]

    def extended_vector(self, sigma: PartialIso) -> dict:
        if sigma.is_bottom:
            return {}
        return {k: w for k, (pi, w) in enumerate(zip(self.isos, self.weights))
                if w != 0 and all(pi[a] == b for a, b in sigma.pairs)}

    def vector(self, sigma: PartialIso) -> dict:
        if len(sigma) > self.level:
            raise LevelExceeded(f"|dom sigma| = {len(sigma)} exceeds level {self.level}")
        return self.extended_vector(sigma)

    def admissible_extension(self, sigma, i) -> bool:
        return True

    def admissible_extension_target(self, sigma, j) -> bool:
        return True

    def sample_sigma(self, rng: random.Random) -> PartialIso:
        size = rng.randint(0, self.level)
        if rng.random() < 0.5:
            pi = rng.choice(self.isos)
            dom = rng.sample(range(self.G.vertex_count), size)
            return PartialIso([(a, pi[a]) for a in dom])
        return random_partial_iso(self.G, self.H, size, rng)


def vectors_from_isomorphisms(G: ColoredGraph, H: ColoredGraph, isos: Sequence, probs: Sequence,
                              level: int, mode: str = "exact", tol: float = 1e-9,
                              samples: int = 2000, seed: int = 0):
    """Build the isomorphism-distribution family and verify (l1)-(l5) on it."""
    fam = IsoVectorFamily(G, H, isos, probs, level, mode, tol)
    return fam, verify_all(fam, samples=samples, seed=seed)


# ----------------------------------------------------------------------------
# the quadratic program

def qp_check(A: np.ndarray, B: np.ndarray, X: Sequence[int]) -> bool:
    """Does the permutation X (i -> X[i]) satisfy the integer program exactly?"""
    n = len(X)
    if sorted(int(x) for x in X) != list(range(n)):
        raise ValueError("X is not a permutation")
    P = np.zeros((n, n), dtype=np.int64)
    P[np.arange(n), np.asarray(X, dtype=np.int64)] = 1
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    binary = bool(np.all(P * (1 - P) == 0))
    rows = bool(np.all(P.sum(axis=1) == 1))
    cols = bool(np.all(P.sum(axis=0) == 1))
    adj = bool(np.array_equal(P @ B @ P.T, A))
    return binary and rows and cols and adj


# ----------------------------------------------------------------------------
# verifiers

def _status(failures) -> str:
    return "pass" if not failures else "fail"


def verify_l1(fam: VectorFamily) -> dict:
    v = fam.vector(EMPTY)
    norm2 = inner(v, v)
    ok = fam.equal(norm2, 1)
    return {"status": "pass" if ok else "fail", "norm_squared": fmt(norm2)}


def _l2_case(fam: VectorFamily, i: int, j: int, targets) -> int:
    """Case 1: no edges between the color classes; 2: middle vs own exterior vertex; 3: sides of a base edge.

    Families without CFI labels report 0 for pairs outside Case 1.
    """
    H = fam.H
    if not any(b in targets[j] for a in targets[i] for b in H.adjacency[a]):
        return 1
    sys = getattr(fam, "sys", None)
    if sys is None:
        return 0
    a, b = sys.x_f.ids[i], sys.x_f.ids[j]
    return 2 if isinstance(a, Middle) or isinstance(b, Middle) else 3


def verify_l2(fam: VectorFamily) -> dict:
    """sum_{i', j'} <v_{i->i'}, v_{j->j'}> B_{i'j'} = A_{ij} for every pair (i, j)."""
    if fam.level < 1:
        return {"status": "skipped", "reason": "level 0"}
    G, H = fam.G, fam.H
    n = G.vertex_count
    targets = [frozenset(candidate_targets(G, H, i)) for i in range(n)]
    single = {}

    def vec(i, a):
        key = (i, a)
        if key not in single:
            single[key] = fam.vector(PartialIso.single(i, a))
        return single[key]

    class_case = {}
    cases = {}
    failures = []
    checked = 0
    for i in range(n):
        for j in range(n):
            total = Fraction(0) if fam.exact else 0.0
            terms = []
            for a in sorted(targets[i]):
                for b in H.adjacency[a]:
                    if b in targets[j]:
                        t = inner(vec(i, a), vec(j, b))
                        terms.append(t)
                        total += t
            want = 1 if G.has_edge(i, j) else 0
            checked += 1
            ckey = (targets[i], targets[j])
            if ckey not in class_case:
                class_case[ckey] = _l2_case(fam, i, j, targets)
            case = class_case[ckey]
            rec = cases.setdefault(case, {"pairs": 0, "nonzero_terms": set(), "term_counts": set(),
                                         "row_sums": set()})
            rec["pairs"] += 1
            nz = [t for t in terms if not fam.equal(t, 0)]
            rec["nonzero_terms"].update(fmt(t) for t in nz)
            rec["term_counts"].add(len(nz))
            rec["row_sums"].add(fmt(total))
            if not fam.equal(total, want):
                if len(failures) < MAX_REPORTED_FAILURES:
                    failures.append({"i": i, "j": j, "expected": want, "found": fmt(total),
                                     "terms": [fmt(t) for t in terms]})
    case_report = {str(k): {"pairs": v["pairs"], "nonzero_terms": sorted(v["nonzero_terms"]),
                            "nonzero_term_counts": sorted(v["term_counts"]),
                            "sums": sorted(v["row_sums"])}
                   for k, v in sorted(cases.items())}
    return {"status": _status(failures), "pairs_checked": checked, "cases": case_report,
            "failures": failures}


def _decompositions(tau: PartialIso, level: int, rng: random.Random, count: int):
    """Random (s1, s2) with s1, s2 sub-maps of tau, |s_i| <= level and s1 meet s2 = tau."""
    pairs = list(tau.pairs)
    k = len(pairs)
    out = []
    for _ in range(count * 4):
        if len(out) == count:
            break
        labels = [rng.choice((0, 1, 2)) for _ in range(k)]  # 0: first, 1: second, 2: both
        a = [p for p, l in zip(pairs, labels) if l in (0, 2)]
        b = [p for p, l in zip(pairs, labels) if l in (1, 2)]
        if len(a) <= level and len(b) <= level:
            out.append((PartialIso(a, _checked=True), PartialIso(b, _checked=True)))
    return out


def verify_l3(fam: VectorFamily, budget: int = 20000, seed: int = 0, chain_budget: int = 5000) -> dict:
    """Equal meets give equal inner products; plus the empty-class chain identity."""
    rng = random.Random(seed)
    groups = {}
    failures = []
    checked = 0
    sig = fam.sigmas()
    sig = list(sig) if sig is not None else None
    exhaustive = sig is not None and len(sig) * (len(sig) + 1) // 2 <= budget * 100

    def record(s1, s2):
        nonlocal checked
        tau = s1.meet(s2)
        val = inner(fam.vector(s1), fam.vector(s2))
        checked += 1
        key = tau.pairs
        if key not in groups:
            groups[key] = (val, s1, s2)
        elif not fam.equal(groups[key][0], val):
            if len(failures) < MAX_REPORTED_FAILURES:
                ref = groups[key]
                failures.append({"meet": "BOTTOM" if key is None else list(key),
                                 "pair_a": [repr(ref[1]), repr(ref[2])], "value_a": fmt(ref[0]),
                                 "pair_b": [repr(s1), repr(s2)], "value_b": fmt(val)})
        return tau, val

    if exhaustive:
        for x in range(len(sig)):
            for y in range(x, len(sig)):
                record(sig[x], sig[y])
    else:
        for _ in range(budget):
            s1, s2 = fam.sample_sigma(rng), fam.sample_sigma(rng)
            tau, _ = record(s1, s2)
            if not tau.is_bottom:
                for a, b in _decompositions(tau, fam.level, rng, 3):
                    record(a, b)

    chain_failures = []
    chain_checked = 0
    chain_status = "skipped"
    if isinstance(fam, LasserreInstance) and fam.table.width_budget >= 2 * fam.table.size_budget:
        chain_status = "checked"
        keys = sorted((k for k in groups if k is not None), key=lambda k: (len(k), k))
        if len(keys) > chain_budget:
            keys = rng.sample(keys, chain_budget)
        if None in groups:
            keys.append(None)
        for key in keys:
            val = groups[key][0]
            tau = BOTTOM if key is None else PartialIso(key, _checked=True)
            rhs = fam.empty_class_sum(tau)
            chain_checked += 1
            if rhs != val and len(chain_failures) < MAX_REPORTED_FAILURES:
                chain_failures.append({"meet": "BOTTOM" if key is None else list(key),
                                       "inner_product": fmt(val), "empty_class_sum": fmt(rhs)})
    bottom = groups.get(None)
    return {"status": _status(failures + chain_failures),
            "mode": "exhaustive" if exhaustive else "sampled",
            "pairs_checked": checked, "distinct_meets": len(groups),
            "bottom_value": None if bottom is None else fmt(bottom[0]),
            "failures": failures,
            "chain_identity": {"status": chain_status, "checked": chain_checked,
                               "failures": chain_failures}}


def verify_l4_l5(fam: VectorFamily, budget: int = 2000, seed: int = 0) -> dict:
    """v_sigma = sum over targets (l4) and over sources (l5) of v_{sigma meet (i -> i')}."""
    rng = random.Random(seed)
    G, H = fam.G, fam.H
    sig = fam.sigmas()
    if sig is not None:
        sig = list(sig)
        if len(sig) * G.vertex_count > budget * 1000:
            sig = None
    if sig is None:
        sig = [EMPTY] + [fam.sample_sigma(rng) for _ in range(budget)]
    sources_of = {}
    for j in range(H.vertex_count):
        sources_of[j] = [i for i in range(G.vertex_count)
                         if G.colors is None or H.colors is None or G.colors[i] == H.colors[j]]
    failures = []
    counts = {"l4": 0, "l5": 0, "skipped_inadmissible": 0}
    for sigma in sig:
        v = fam.vector(sigma)
        for i in range(G.vertex_count):
            if not fam.admissible_extension(sigma, i):
                counts["skipped_inadmissible"] += 1
                continue
            total = vsum(fam.extended_vector(sigma.meet(PartialIso.single(i, a)))
                         for a in candidate_targets(G, H, i))
            counts["l4"] += 1
            if not fam.vectors_equal(total, v) and len(failures) < MAX_REPORTED_FAILURES:
                failures.append({"family": "l4", "sigma": repr(sigma), "i": i,
                                 "v_sigma": fmt_vector(v), "sum": fmt_vector(total)})
        for j in range(H.vertex_count):
            if not fam.admissible_extension_target(sigma, j):
                counts["skipped_inadmissible"] += 1
                continue
            total = vsum(fam.extended_vector(sigma.meet(PartialIso.single(i, j)))
                         for i in sources_of[j])
            counts["l5"] += 1
            if not fam.vectors_equal(total, v) and len(failures) < MAX_REPORTED_FAILURES:
                failures.append({"family": "l5", "sigma": repr(sigma), "i_prime": j,
                                 "v_sigma": fmt_vector(v), "sum": fmt_vector(total)})
    return {"status": _status(failures), "sigmas": len(sig), "checked": counts, "failures": failures}


def verify_all(fam: VectorFamily, samples: int = 2000, seed: int = 0) -> dict:
    report = {
        "level": fam.level,
        "arithmetic": "exact" if fam.exact else f"float(tol={fam.tol})",
        "l1": verify_l1(fam),
        "l2": verify_l2(fam) if fam.level >= 1 else {"status": "skipped", "reason": "level 0"},
        "l3": verify_l3(fam, budget=samples, seed=seed),
        "l4_l5": verify_l4_l5(fam, budget=samples, seed=seed),
    }
    statuses = [report[k]["status"] for k in ("l1", "l2", "l3", "l4_l5")]
    report["status"] = "fail" if "fail" in statuses else "pass"
    return report


# ----------------------------------------------------------------------------
# Gram matrix check

def gram_matrix(fam: VectorFamily, sigmas: Sequence[PartialIso]) -> list:
    vs = [fam.vector(s) for s in sigmas]
    return [[inner(a, b) for b in vs] for a in vs]


def is_psd_exact(M: Sequence[Sequence[Fraction]]) -> bool:
    """Symmetric elimination over the rationals: PSD iff no negative pivot appears
    and every zero pivot has a zero row."""
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    for k in range(n):
        p = A[k][k]
        if p < 0:
            return False
        if p == 0:
            if any(A[k][j] != 0 for j in range(k, n)):
                return False
            continue
        for i in range(k + 1, n):
            if A[i][k] == 0:
                continue
            f = A[i][k] / p
            for j in range(k, n):
                A[i][j] -= f * A[k][j]
    return True
