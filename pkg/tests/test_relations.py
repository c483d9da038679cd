import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhr_acl.relations import (
    cartesian_product,
    compose,
    difference,
    dom,
    domain_restrict,
    ident_key,
    identity,
    image,
    intersection,
    inverse,
    is_bijection,
    is_partial_function,
    is_partition,
    is_total_function,
    ran,
    range_restrict,
    sorted_ids,
    union,
)

from oracles import (
    o_compose,
    o_dom,
    o_image,
    o_inverse,
    o_is_bijection,
    o_is_partition,
    o_is_total_function,
    o_ran,
    o_range_restrict,
    o_domain_restrict,
)

U6 = ["a", "b", "c", 1, 2, 3]
ids = st.sampled_from(U6)
sets = st.frozensets(ids)
relations = st.frozensets(st.tuples(ids, ids))


def test_set_operations():
    assert union(frozenset({1, 2}), frozenset({2, 3})) == {1, 2, 3}
    assert difference(frozenset({"x", "y"}), frozenset()) == {"x", "y"}
    assert intersection(frozenset({1, 2}), frozenset({2, 3})) == {2}
    assert cartesian_product({"a"}, {"x", "y"}) == {("a", "x"), ("a", "y")}


def test_compose_examples():
    assert compose(frozenset({("a", 1)}), frozenset({(1, "x")})) == {("a", "x")}
    assert compose(frozenset({("a", 1)}), frozenset()) == frozenset()
    r = frozenset({("a", 1), ("a", 2)})
    p = frozenset({(1, "x"), (2, "x")})
    assert compose(r, p) == o_compose(r, p, ["a", 1, 2, "x"]) == {("a", "x")}


def test_restriction_and_image_examples():
    r = frozenset({("a", 1), ("b", 2)})
    assert inverse(r) == {(1, "a"), (2, "b")}
    assert domain_restrict(frozenset({"a"}), r) == {("a", 1)}
    assert range_restrict(r, frozenset({2})) == {("b", 2)}
    r2 = frozenset({("a", 1), ("a", 2), ("b", 3)})
    assert image(r2, frozenset({"a"})) == o_image(r2, {"a"}, ["a", "b", 1, 2, 3]) == {1, 2}
    assert identity({1, 2}) == {(1, 1), (2, 2)}


def test_function_predicates():
    assert is_bijection(frozenset({("a", 1), ("b", 2)}), frozenset("ab"), frozenset({1, 2}))
    assert not is_bijection(frozenset({("a", 1), ("b", 1)}), frozenset("ab"), frozenset({1}))
    assert not is_total_function(frozenset({("a", 1)}), frozenset("ab"))
    assert is_total_function(frozenset({("a", 1)}), frozenset("a"), frozenset({1}))
    assert not is_total_function(frozenset({("a", 1)}), frozenset("a"), frozenset({2}))
    assert not is_partial_function(frozenset({("a", 1), ("a", 2)}))


def test_partition():
    parts = [frozenset({1}), frozenset({2}), frozenset({3, 1})]
    assert is_partition(frozenset({1, 2, 3}), parts) is False
    assert o_is_partition({1, 2, 3}, parts) is False
    assert is_partition(frozenset({1, 2}), [frozenset({1, 2}), frozenset(), frozenset()])
    assert is_partition(frozenset(), [frozenset(), frozenset(), frozenset()])
    assert not is_partition(frozenset({1, 2}), [frozenset({1})])


def test_identifier_order_is_natural_and_total():
    assert sorted_ids(["p10", "p2", "p1"]) == ["p1", "p2", "p10"]
    assert sorted_ids([3, "a", 1]) == [1, 3, "a"]
    assert ident_key(True) != ident_key(1)


@settings(max_examples=300, deadline=None)
@given(relations, relations)
def test_compose_matches_oracle(r, p):
    assert compose(r, p) == o_compose(r, p, U6)


@settings(max_examples=300, deadline=None)
@given(relations, sets)
def test_unary_ops_match_oracle(r, s):
    assert inverse(r) == o_inverse(r, U6)
    assert dom(r) == o_dom(r, U6)
    assert ran(r) == o_ran(r, U6)
    assert domain_restrict(s, r) == o_domain_restrict(s, r, U6)
    assert range_restrict(r, s) == o_range_restrict(r, s, U6)
    assert image(r, s) == o_image(r, s, U6)


@settings(max_examples=300, deadline=None)
@given(relations, relations, sets)
def test_operator_laws(r, p, s):
    assert dom(inverse(r)) == ran(r)
    assert inverse(compose(r, p)) == compose(inverse(p), inverse(r))
    assert domain_restrict(s, r) <= r
    assert image(r, s) == ran(domain_restrict(s, r))


@settings(max_examples=300, deadline=None)
@given(relations, sets, sets)
def test_function_predicates_match_oracle(r, s, t):
    assert is_total_function(r, s) == o_is_total_function(r, s, U6)
    assert is_bijection(r, s, t) == o_is_bijection(r, s, t, U6)


@settings(max_examples=300, deadline=None)
@given(sets, st.lists(sets, max_size=4))
def test_partition_matches_oracle(whole, parts):
    assert is_partition(whole, parts) == o_is_partition(whole, parts)


@given(relations, relations)
def test_operations_do_not_mutate(r, p):
    before = (set(r), set(p))
    compose(r, p), inverse(r), image(r, dom(p)), domain_restrict(dom(p), r)
    assert (set(r), set(p)) == before


@pytest.mark.parametrize("bad", [frozenset({("a", 1), ("a", 2)}), frozenset({("a", 1), ("b", 1)})])
def test_bijection_rejects_non_injective_or_non_functional(bad):
    assert not is_bijection(bad, dom(bad), ran(bad))
