import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cfi_lasserre import graph_core as gc
from cfi_lasserre import resolution as rs
from cfi_lasserre import xor_system as xs
from cfi_lasserre.cfi import TwistFunction
from cfi_lasserre.resolution import bits_of, mask_of
from cfi_lasserre.xor_system import XorVar

K4 = gc.complete_graph(4)
PETERSEN = gc.petersen_graph()


def phi(base, g_edges=()):
    return xs.build_phi(base, TwistFunction.zero(base), TwistFunction.from_edges(base, g_edges))


K4_EVEN = phi(K4)
K4_ODD = phi(K4, [(0, 1)])
K4_TWO = phi(K4, [(0, 1), (2, 3)])


def delta(base, v):
    return mask_of(base.edge_id(v, u) for u in base.adjacency[v])


def implied_sign(sys, S, T):
    """Parity of the canonical edge variables on S xor T forced by the full system."""
    edges = [sys.base.edge_list[e] for e in bits_of(S ^ T)]
    return sys.implied_parity(XorVar("x", u, v) for u, v in edges)


# ---------------------------------------------------------------- step relation

def test_step_from_empty_gives_vertex_stars():
    steps = rs.step_relation(0, K4_EVEN)
    assert steps == [(delta(K4, v), 1) for v in range(4)]


def test_step_is_an_involution():
    for v in range(4):
        T, sign = rs.step_relation(0, K4_ODD)[v]
        assert rs.step_relation(T, K4_ODD)[v] == (0, sign)


def test_charges_sum_to_twist_parity():
    for sys in (K4_EVEN, K4_ODD, K4_TWO, phi(PETERSEN, [(0, 1)])):
        gens = rs.vertex_generators(sys)
        total = 0
        rhs = 0
        for g in gens:
            total ^= g.support
            rhs ^= g.rhs
        assert total == 0
        assert rhs == sys.f.parity ^ sys.g.parity


def test_var_edge_shift():
    e = K4.edge_id(0, 1)
    assert rs.var_edge_shift(K4_ODD, XorVar("x", 0, 1)) == (e, 0)
    assert rs.var_edge_shift(K4_ODD, XorVar("y", 1, 0)) == (e, 1)
    assert rs.var_edge_shift(K4_ODD, XorVar("y", 1, 0), "literal") == (e, 0)
    with pytest.raises(ValueError):
        rs.var_edge_shift(K4_ODD, XorVar("x", 0, 1), "bogus")


# ---------------------------------------------------------------- refutation width

@pytest.mark.parametrize("max_w", [3, 6])
def test_consistent_system_has_no_refutation(max_w):
    v = rs.refutation_width(K4_EVEN, max_w)
    assert not v.exact and v.value == max_w + 1
    assert str(v) == f">= {max_w + 1}"


def test_k4_odd_refutation_width():
    v = rs.refutation_width(K4_ODD, 6)
    assert v.exact and v.value == 4
    assert v.value >= gc.cutwidth(K4)[0]
    assert not rs.refutation_width(K4_ODD, 3).exact


def test_petersen_odd_refutation_width():
    sys = phi(PETERSEN, [(0, 1)])
    v = rs.refutation_width(sys, 8)
    assert v.exact and v.value == 6
    assert v.value >= gc.cutwidth(PETERSEN)[0]


def test_refutation_width_independent_of_twisted_edge():
    values = {rs.refutation_width(phi(PETERSEN, [e]), 8).value for e in PETERSEN.edge_list}
    assert values == {6}


def test_literal_engine_agrees_on_k4():
    # the same search run over the 24 directed variables, with no projection
    assert rs.literal_refutation_width(K4_ODD, 6).value == 4
    assert rs.literal_refutation_width(K4_ODD, 6).exact
    assert not rs.literal_refutation_width(K4_EVEN, 6).exact


@pytest.mark.parametrize("sys", [K4_EVEN, K4_ODD], ids=["even", "odd"])
def test_literal_reachable_states_project_onto_edge_derivations(sys):
    eng = rs._Engine(rs.literal_generators(sys), len(sys.variables))
    seen = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        X, sg = frontier.pop()
        for Y, r in eng.successors(X, 7):
            key = (Y, sg ^ r)
            if key not in seen:
                seen.add(key)
                frontier.append(key)
    projected = set()
    for X, sg in seen:
        S, shift = rs.project_variables(sys, X)
        projected.add((S, sg ^ shift))
    full = {(S, b) for S in range(1 << 6) for b in rs.derives(sys, 0, S, 6)}
    assert projected == full


@given(st.integers(0, 63), st.integers(0, 63), st.integers(2, 6))
@settings(max_examples=60, deadline=None)
def test_derivations_are_sound(S, T, w):
    for sys in (K4_EVEN, K4_TWO):
        for sign in rs.derives(sys, S, T, max(w, S.bit_count(), T.bit_count())):
            assert implied_sign(sys, S, T) == sign


# ---------------------------------------------------------------- class tables

def test_budgets_are_floored():
    assert rs.default_budgets(9) == (3, 6)
    assert rs.default_budgets(5) == (1, 3)
    assert rs.default_budgets(3) == (1, 2)


def test_refutable_system_is_rejected():
    with pytest.raises(rs.IllDefinedGamma):
        rs.build_class_table(K4_ODD, 4)
    with pytest.raises(rs.IllDefinedGamma):
        rs.build_class_table(K4_ODD, size_budget=3, width_budget=4)


def test_k4_odd_r3_table():
    t = rs.build_class_table(K4_ODD, 3)
    assert (t.size_budget, t.width_budget) == (1, 2)
    assert t.lookup(0) == (0, 1)
    rep = rs.classes_sanity(t, samples=100)
    assert rep["violations"] == []


@pytest.fixture(scope="module")
def k4_table():
    return rs.build_class_table(K4_TWO, size_budget=3, width_budget=6)


def test_empty_class_and_exemplars(k4_table):
    t = k4_table
    assert t.gamma(0) == 1
    for key in t.explored_classes:
        assert t.gamma(key) == 1
        assert key == min(t.members(key), key=rs.lex_key)


def test_single_edge_equals_other_two_at_a_vertex(k4_table):
    t = k4_table
    for v in range(4):
        e1, e2, e3 = (K4.edge_id(v, u) for u in K4.adjacency[v])
        assert t.class_of(1 << e3) == t.class_of((1 << e1) | (1 << e2))
        assert t.class_of(delta(K4, v)) == t.class_of(0)


def test_gamma_is_path_independent(k4_table):
    # random width-bounded walks: the sign accumulated along the walk must
    # match the relative sign recorded in the table
    t = k4_table
    rng = random.Random(3)
    gens = rs.vertex_generators(K4_TWO)
    for _ in range(300):
        S = mask_of(rng.sample(range(6), rng.randint(0, 3)))
        X, sign = S, 0
        for _ in range(rng.randint(1, 12)):
            g = rng.choice(gens)
            if (X ^ g.support).bit_count() <= t.width_budget:
                X ^= g.support
                sign ^= g.rhs
        if X.bit_count() <= t.size_budget:
            assert t.gamma(S) * t.gamma(X) == (-1 if sign else 1)


def test_sanity_on_consistent_table_and_negative_control(k4_table):
    assert rs.classes_sanity(k4_table, samples=150)["violations"] == []
    bad = k4_table.with_flipped_sign(1 << 0)
    assert rs.classes_sanity(bad, samples=150)["violations"]


def test_lazy_and_eager_tables_agree():
    eager = rs.build_class_table(K4_TWO, size_budget=2, width_budget=4)
    lazy = rs.build_class_table(K4_TWO, size_budget=2, width_budget=4, eager=False)
    for k in range(3):
        for c in itertools.combinations(range(6), k):
            S = mask_of(c)
            assert eager.lookup(S) == lazy.lookup(S)


def test_table_json_roundtrip(k4_table):
    text = k4_table.to_json()
    back = rs.ClassTable.from_json(K4_TWO, text)
    for k in range(4):
        for c in itertools.combinations(range(6), k):
            S = mask_of(c)
            assert back.lookup(S) == k4_table.lookup(S)
    with pytest.raises(ValueError):
        rs.ClassTable.from_json(K4_EVEN, text)


def test_larger_width_only_merges_classes():
    sys = phi(PETERSEN)
    prev = None
    for w in range(2, 6):
        t = rs.build_class_table(sys, size_budget=2, width_budget=w)
        part = {}
        for k in range(3):
            for c in itertools.combinations(range(15), k):
                S = mask_of(c)
                part[S] = t.class_of(S)
        if prev is not None:
            for S, T in itertools.combinations(part, 2):
                if prev[S] == prev[T]:
                    assert part[S] == part[T]
        prev = part


def test_petersen_odd_budgets_three_three_are_contradiction_free():
    sys = phi(PETERSEN, [(0, 1)])
    t = rs.build_class_table(sys, size_budget=3, width_budget=3)
    assert rs.classes_sanity(t, samples=100)["violations"] == []
    with pytest.raises(rs.IllDefinedGamma):
        rs.build_class_table(sys, size_budget=3, width_budget=4)
