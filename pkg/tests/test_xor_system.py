import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfi_lasserre import iso
from cfi_lasserre import graph_core as gc
from cfi_lasserre import xor_system as xs
from cfi_lasserre.cfi import EdgeVertex, Middle, TwistFunction
from cfi_lasserre.xor_system import BOTTOM, EMPTY, PartialIso, XorVar

K4 = gc.complete_graph(4)
PETERSEN = gc.petersen_graph()


def phi(base, f_edges=(), g_edges=()):
    return xs.build_phi(base, TwistFunction.from_edges(base, f_edges), TwistFunction.from_edges(base, g_edges))


# ---------------------------------------------------------------- PartialIso

def test_partial_iso_rejects_non_injective():
    with pytest.raises(ValueError):
        PartialIso([(0, 1), (0, 2)])
    with pytest.raises(ValueError):
        PartialIso([(0, 1), (2, 1)])


def test_meet_examples():
    a = PartialIso([(0, 1)])
    assert a & PartialIso([(2, 3)]) == PartialIso([(0, 1), (2, 3)])
    assert (a & PartialIso([(0, 2)])).is_bottom
    assert (a & PartialIso([(5, 1)])).is_bottom
    assert (a & BOTTOM).is_bottom
    assert a & EMPTY == a
    assert len(BOTTOM) == 0 and len(a) == 1


pairs_st = st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=4)


def as_iso(pairs):
    m = {}
    used = set()
    for a, b in pairs:
        if a not in m and b not in used:
            m[a] = b
            used.add(b)
    return PartialIso(m.items())


@given(pairs_st, pairs_st)
def test_meet_is_union_exactly_when_consistent(p, q):
    a, b = as_iso(p), as_iso(q)
    union = set(a.pairs) | set(b.pairs)
    dom = [x for x, _ in union]
    img = [y for _, y in union]
    injective = len(set(dom)) == len(dom) and len(set(img)) == len(img)
    m = a & b
    assert m.is_bottom == (not injective)
    if injective:
        assert set(m.pairs) == union
    assert (a & b) == (b & a)


# ---------------------------------------------------------------- build_phi

def test_k4_same_twist_counts():
    s = phi(K4)
    assert len(s.variables) == 24
    assert len(s.constraints) == 22
    assert all(c.rhs == 0 for c in s.constraints)
    assert s.satisfiable()


def test_k4_odd_twist_sum_of_all_constraints_is_contradiction():
    s = phi(K4, g_edges=[(0, 1)])
    total = frozenset()
    rhs = 0
    for c in s.constraints:
        total ^= c.variables
        rhs ^= c.rhs
    assert total == frozenset() and rhs == 1
    assert not s.satisfiable()


@pytest.mark.parametrize("base", [K4, PETERSEN, gc.random_3regular(12, 3)])
def test_structure(base):
    s = phi(base, g_edges=[base.edge_list[0]])
    n, m = base.vertex_count, base.edge_count
    assert len(s.variables) == 6 * n
    assert len(s.constraints) == 4 * n + m
    occurrences = {x: 0 for x in s.variables}
    for c in s.constraints:
        for x in c.variables:
            occurrences[x] += 1
    assert set(occurrences.values()) == {2}


def test_rejects_non_cubic_base():
    c4 = gc.cycle_graph(4)
    with pytest.raises(gc.GraphError):
        xs.build_phi(c4, TwistFunction.zero(c4), TwistFunction.zero(c4))


@given(st.integers(0, 5), st.data())
@settings(max_examples=30, deadline=None)
def test_satisfiable_iff_same_parity(seed, data):
    base = PETERSEN if seed == 0 else gc.random_3regular(8 + 2 * seed, seed)
    m = base.edge_count
    f = TwistFunction(base, tuple(data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))))
    g = TwistFunction(base, tuple(data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))))
    assert xs.build_phi(base, f, g).satisfiable() == (f.parity == g.parity)


def test_to_text_format():
    s = phi(K4)
    text = s.to_text().splitlines()
    assert text[24] == "p xor 24 22"
    body = [ln for ln in text if ln.startswith("x ")]
    assert len(body) == 22
    assert all(ln.split()[-1] in "01" for ln in body)


# ---------------------------------------------------------------- GF(2) elimination

@given(st.integers(1, 6), st.integers(1, 8), st.data())
@settings(max_examples=80, deadline=None)
def test_gf2_consistency_matches_brute_force(rows, cols, data):
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=cols + 1, max_size=cols + 1),
                                    min_size=rows, max_size=rows)), dtype=np.uint8)
    brute = any(
        all((int(np.dot(M[r, :-1], x)) % 2) == M[r, -1] for r in range(rows))
        for x in itertools.product((0, 1), repeat=cols)
    )
    assert xs.gf2_consistent(M) == brute


@given(st.integers(1, 6), st.integers(1, 7), st.data())
@settings(max_examples=80, deadline=None)
def test_gf2_implied_matches_brute_force(rows, cols, data):
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=cols + 1, max_size=cols + 1),
                                    min_size=rows, max_size=rows)), dtype=np.uint8)
    q = np.array(data.draw(st.lists(st.integers(0, 1), min_size=cols, max_size=cols)), dtype=np.uint8)
    sols = [x for x in itertools.product((0, 1), repeat=cols)
            if all((int(np.dot(M[r, :-1], x)) % 2) == M[r, -1] for r in range(rows))]
    if not sols:
        with pytest.raises(ValueError):
            xs.gf2_implied(M, q)
        return
    values = {int(np.dot(q, x)) % 2 for x in sols}
    expected = values.pop() if len(values) == 1 else None
    assert xs.gf2_implied(M, q) == expected


# ---------------------------------------------------------------- harmonious and alpha

@pytest.fixture(scope="module")
def k4sys():
    return phi(K4)


def _ix(s, vid, target=False):
    x = s.x_g if target else s.x_f
    return x.index[vid]


def test_harmonious_examples(k4sys):
    s = k4sys
    assert xs.is_harmonious(s, EMPTY)
    same = PartialIso([(_ix(s, Middle(0, (0, 0, 0))), _ix(s, Middle(0, (0, 0, 0)), True)),
                       (_ix(s, Middle(0, (0, 1, 1))), _ix(s, Middle(0, (0, 1, 1)), True))])
    assert xs.is_harmonious(s, same)
    clash = PartialIso([(_ix(s, Middle(0, (0, 0, 0))), _ix(s, Middle(0, (0, 0, 0)), True)),
                        (_ix(s, Middle(0, (0, 1, 1))), _ix(s, Middle(0, (1, 0, 1)), True))])
    assert not xs.is_harmonious(s, clash)
    assert not xs.is_harmonious(s, BOTTOM)
    # middle mapped to an edge vertex is not color-preserving
    wrong = PartialIso([(_ix(s, Middle(0, (0, 0, 0))), _ix(s, EdgeVertex(0, 1, 0), True))])
    assert not xs.is_harmonious(s, wrong)


def test_alpha_examples(k4sys):
    s = k4sys
    assert xs.alpha_of(s, EMPTY) == {}
    a = xs.alpha_of(s, PartialIso([(_ix(s, EdgeVertex(0, 1, 0)), _ix(s, EdgeVertex(0, 1, 1), True))]))
    assert a == {XorVar("x", 0, 1): 1}
    b = xs.alpha_of(s, PartialIso([(_ix(s, Middle(0, (0, 0, 0))), _ix(s, Middle(0, (1, 1, 0)), True))]))
    assert b == {XorVar("y", 0, 1): 1, XorVar("y", 0, 2): 1, XorVar("y", 0, 3): 0}
    with pytest.raises(xs.UndefinedEncoding):
        xs.alpha_of(s, BOTTOM)


def test_violates_examples(k4sys):
    assert not xs.violates({}, k4sys)
    assert not xs.violates({x: 0 for x in k4sys.variables}, k4sys)
    odd = phi(K4, g_edges=[(0, 1)])
    assert xs.violates({XorVar("x", 0, 1): 0, XorVar("x", 1, 0): 0}, odd)


@pytest.mark.parametrize("g_edges", [[], [(0, 1), (2, 3)], [(0, 1), (0, 2)]])
def test_full_isomorphisms_encode_solutions(g_edges):
    s = phi(K4, g_edges=g_edges)
    for pi in iso.all_isomorphisms(s.x_f.graph, s.x_g.graph):
        full = PartialIso(enumerate(pi))
        assert xs.is_harmonious(s, full)
        alpha = xs.alpha_of(s, full)
        assert len(alpha) == len(s.variables)
        assert not xs.violates(alpha, s)
        rng = random.Random(len(pi))
        for _ in range(20):
            dom = rng.sample(range(40), rng.randint(1, 8))
            assert not xs.violates(xs.alpha_of(s, PartialIso((i, pi[i]) for i in dom)), s)


def test_isomorphism_count_matches_solution_count():
    # isomorphisms X_f -> X_g correspond to solutions of phi: 2^(6n - rank)
    s = phi(K4, g_edges=[(0, 1), (2, 3)])
    M = s.matrix()
    rank = len(xs.gf2_rref(M.copy()))
    assert len(iso.all_isomorphisms(s.x_f.graph, s.x_g.graph)) == 2 ** (len(s.variables) - rank)


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_alpha_of_meet_extends_both(data):
    s = phi(K4, g_edges=[(0, 1), (2, 3)])
    isos = _k4_isos()
    pi = data.draw(st.sampled_from(isos))
    d1 = data.draw(st.sets(st.integers(0, 39), max_size=6))
    d2 = data.draw(st.sets(st.integers(0, 39), max_size=6))
    s1 = PartialIso((i, pi[i]) for i in d1)
    s2 = PartialIso((i, pi[i]) for i in d2)
    m = s1 & s2
    a, b, c = xs.alpha_of(s, s1), xs.alpha_of(s, s2), xs.alpha_of(s, m)
    assert all(c[k] == v for k, v in a.items())
    assert all(c[k] == v for k, v in b.items())


_CACHE = {}


def _k4_isos():
    if "k4" not in _CACHE:
        s = phi(K4, g_edges=[(0, 1), (2, 3)])
        _CACHE["k4"] = iso.all_isomorphisms(s.x_f.graph, s.x_g.graph)
    return _CACHE["k4"]
