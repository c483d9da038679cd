"""Finite sets and binary relations over opaque identifiers.

Sets are plain ``frozenset`` values and a relation is a ``frozenset`` of
``(left, right)`` tuples, so every operation here is pure and its result is
hashable.  Operator names follow the usual Event-B reading:

    ``compose(r, p)``          r ; p
    ``domain_restrict(s, r)``  s <| r
    ``range_restrict(r, s)``   r |> s
    ``image(r, s)``            r[s]
"""

from __future__ import annotations

import re
from collections import defaultdict
from functools import lru_cache
from typing import Hashable, Iterable, Tuple, Union

Ident = Union[str, int]
FiniteSet = frozenset
Pair = Tuple[Hashable, Hashable]
Relation = frozenset

EMPTY: frozenset = frozenset()

_NUM_TAIL = re.compile(r"^(.*?)(\d+)$")


@lru_cache(maxsize=65536, typed=True)
def ident_key(x):
    """Total order on identifiers: ints first, then strings with a natural
    numeric suffix (``p2`` < ``p10``), then anything else by repr."""
    if isinstance(x, bool):
        return (2, repr(x), 0)
    if isinstance(x, int):
        return (0, "", x)
    if isinstance(x, str):
        m = _NUM_TAIL.match(x)
        if m:
            return (1, m.group(1), int(m.group(2)), x)
        return (1, x, -1, x)
    if isinstance(x, tuple):
        return (3, tuple(ident_key(v) for v in x))
    return (4, repr(x), 0)


def sorted_ids(s: Iterable) -> list:
    return sorted(s, key=ident_key)


def fset(items: Iterable = ()) -> frozenset:
    return frozenset(items)


def rel(pairs: Iterable[Pair] = ()) -> frozenset:
    return frozenset((a, b) for a, b in pairs)


# -- sets --------------------------------------------------------------------

def union(a: frozenset, b: frozenset) -> frozenset:
    return a | b


def intersection(a: frozenset, b: frozenset) -> frozenset:
    return a & b


def difference(a: frozenset, b: frozenset) -> frozenset:
    return a - b


def cartesian_product(a: Iterable, b: Iterable) -> frozenset:
    b = tuple(b)
    return frozenset((x, y) for x in a for y in b)


def is_subset(a: frozenset, b: frozenset) -> bool:
    return a <= b


def is_partition(whole: frozenset, parts: Iterable[frozenset]) -> bool:
    """True iff the parts are pairwise disjoint and their union is ``whole``.

    Empty parts are allowed.
    """
    seen: set = set()
    total = 0
    for part in parts:
        total += len(part)
        seen.update(part)
    # disjoint iff no element was counted twice
    return total == len(seen) and seen == whole


# -- relations ---------------------------------------------------------------

def dom(r: frozenset) -> frozenset:
    return frozenset(x for x, _ in r)


def ran(r: frozenset) -> frozenset:
    return frozenset(y for _, y in r)


def inverse(r: frozenset) -> frozenset:
    return frozenset((y, x) for x, y in r)


def compose(r: frozenset, p: frozenset) -> frozenset:
    """Forward composition ``r ; p``."""
    if not r or not p:
        return EMPTY
    by_left = defaultdict(list)
    for z, y in p:
        by_left[z].append(y)
    return frozenset(
        (x, y) for x, z in r if z in by_left for y in by_left[z]
    )


def domain_restrict(s: frozenset, r: frozenset) -> frozenset:
    return frozenset(pr for pr in r if pr[0] in s)


def range_restrict(r: frozenset, s: frozenset) -> frozenset:
    return frozenset(pr for pr in r if pr[1] in s)


def domain_subtract(s: frozenset, r: frozenset) -> frozenset:
    return frozenset(pr for pr in r if pr[0] not in s)


def range_subtract(r: frozenset, s: frozenset) -> frozenset:
    return frozenset(pr for pr in r if pr[1] not in s)


def identity(s: Iterable) -> frozenset:
    return frozenset((x, x) for x in s)


def image(r: frozenset, s: frozenset) -> frozenset:
    """Relational image ``r[s]``."""
    return frozenset(y for x, y in r if x in s)


def apply_fn(r: frozenset, x):
    """Value of the function ``r`` at ``x``; ``KeyError`` if undefined or
    ambiguous."""
    found = [y for a, y in r if a == x]
    if len(found) != 1:
        raise KeyError(x)
    return found[0]


# -- function predicates -----------------------------------------------------

def is_partial_function(r: frozenset) -> bool:
    return len(dom(r)) == len(r)


def is_total_function(r: frozenset, domain_set: frozenset, range_set: frozenset | None = None) -> bool:
    if range_set is not None and not ran(r) <= range_set:
        return False
    return is_partial_function(r) and dom(r) == domain_set


def is_injective(r: frozenset) -> bool:
    return len(ran(r)) == len(r)


def is_bijection(r: frozenset, domain_set: frozenset, range_set: frozenset) -> bool:
    return (
        is_total_function(r, domain_set)
        and is_injective(r)
        and ran(r) == range_set
    )
