import pytest
from hypothesis import given, settings, strategies as st

from helpers import monotone_maps, posets
from shapecalc.errors import (
    CodomainMismatch,
    CycleDetected,
    DuplicateLabel,
    JoinsUndefined,
    NotMonotone,
    UnknownLabel,
)
from shapecalc.poset import (
    MonotoneMap,
    antichain,
    build_poset,
    chain,
    comma,
    compose,
    constant_map,
    down_closure,
    identity,
    image_factorization,
    induced_subposet,
    map_predicates,
    product,
    without_initial,
)


def diamond():
    return build_poset("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def test_closure_and_queries():
    P = diamond()
    assert P.leq("a", "d") and not P.leq("b", "c")
    assert P.bottom == "a" and P.top == "d"
    assert sorted(P.cover_relations()) == [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
    assert ("a", "d") in P.relations()
    assert P.has_all_joins
    assert P.elements[P.join_mask(P.mask("bc"))] == "d"
    assert P.elements[P.meet_mask(P.mask("bc"))] == "a"


def test_build_errors():
    with pytest.raises(DuplicateLabel):
        build_poset(["a", "a"])
    with pytest.raises(UnknownLabel):
        build_poset(["a"], [("a", "z")])
    with pytest.raises(CycleDetected):
        build_poset("abc", [("a", "b"), ("b", "c"), ("c", "a")])


def test_missing_joins():
    V = build_poset("abcd", [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")])
    assert not V.has_all_joins
    assert V.join_mask(V.mask("ab")) == -1
    f = identity(V)
    with pytest.raises(JoinsUndefined):
        f.preserves_joins()
    assert map_predicates(f).preserves_joins is None


def test_chain_antichain_product():
    assert len(chain(4).relations()) == 6
    assert antichain(3).relations() == []
    P = product(chain(2), chain(2))
    assert len(P) == 4 and P.bottom == "(0,0)" and P.top == "(1,1)"


def test_monotone_map_checks():
    C = chain(2)
    with pytest.raises(NotMonotone):
        MonotoneMap(C, C, {"0": "1", "1": "0"})
    with pytest.raises(UnknownLabel):
        MonotoneMap(C, C, {"0": "0"})
    f = constant_map(diamond(), C, "1")
    assert f.image_mask == C.mask(["1"]) and not f.is_injective


def test_full_and_injective_differ():
    # the identity-on-labels map from an antichain into a chain is injective but not full
    f = MonotoneMap(antichain(2), chain(2), {"0": "0", "1": "1"})
    preds = map_predicates(f)
    assert preds.injective and not preds.full
    assert map_predicates(identity(chain(3))).full


def test_comma_with_constants():
    P = diamond()
    f = identity(P)
    over = comma(f, "b")
    assert set(over.poset.elements) == {"a", "b"}
    under = comma("b", f)
    assert set(under.poset.elements) == {"b", "d"}
    with pytest.raises(CodomainMismatch):
        comma(f, identity(chain(2)))


def test_comma_of_maps_matches_definition():
    P = diamond()
    f = MonotoneMap(chain(2), P, {"0": "b", "1": "d"})
    g = MonotoneMap(chain(2), P, {"0": "c", "1": "d"})
    C = comma(f, g)
    # hand count: pairs (i, j) with f(i) <= g(j)
    assert set(C.poset.elements) == {"(0,1)", "(1,1)"}
    assert C.poset.leq("(0,1)", "(1,1)")


def test_without_initial_and_down_closure():
    P = diamond()
    assert set(without_initial(P).elements) == {"b", "c", "d"}
    assert down_closure(P, ["b"]) == frozenset("ab")


def test_image_factorization_identifies_values():
    P = diamond()
    f = MonotoneMap(P, chain(3), {"a": "0", "b": "1", "c": "1", "d": "2"})
    v, w = image_factorization(f)
    assert len(v.cod) == 3 and w.is_injective
    assert compose(w, v).assignment == f.assignment


@settings(max_examples=150, deadline=None)
@given(posets())
def test_order_axioms(P):
    n = len(P)
    for i in range(n):
        assert P.up[i] >> i & 1
        for j in range(n):
            if i != j and P.up[i] >> j & 1:
                assert not P.up[j] >> i & 1
                assert P.up[j] & ~P.up[i] == 0


@settings(max_examples=150, deadline=None)
@given(posets(max_size=5))
def test_joins_against_brute_force(P):
    n = len(P)
    for a in range(n):
        for b in range(n):
            uppers = [c for c in range(n) if P.up[a] >> c & 1 and P.up[b] >> c & 1]
            least = [c for c in uppers if all(P.up[c] >> d & 1 for d in uppers)]
            expected = least[0] if least else -1
            assert P.join_mask((1 << a) | (1 << b)) == expected


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_full_maps_are_injective(data):
    P = data.draw(posets(1, 5))
    Q = data.draw(posets(1, 5))
    f = data.draw(monotone_maps(P, Q))
    preds = map_predicates(f)
    if preds.full:
        assert preds.injective


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_image_factorization_round_trip(data):
    P = data.draw(posets(1, 5))
    Q = data.draw(posets(1, 5))
    f = data.draw(monotone_maps(P, Q))
    v, w = image_factorization(f)
    assert v.is_surjective and w.is_injective
    assert compose(w, v).images == f.images
    # the image order sits inside the codomain order
    for a in v.cod.elements:
        for b in v.cod.elements:
            if v.cod.leq(a, b):
                assert Q.leq(a, b)


@settings(max_examples=80, deadline=None)
@given(posets(1, 6), st.data())
def test_induced_subposet_is_full(P, data):
    keep = data.draw(st.lists(st.sampled_from(P.elements), min_size=1, unique=True))
    sub = induced_subposet(P, keep)
    for a in keep:
        for b in keep:
            assert sub.leq(a, b) == P.leq(a, b)
