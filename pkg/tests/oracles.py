"""Brute-force reference definitions, written straight from the set
comprehensions and evaluated by enumerating every candidate pair of a finite
universe.  Nothing here imports mhr_acl.relations."""

import random
from itertools import product


def o_compose(r, p, U):
    return {(x, y) for x, y in product(U, U)
            if any((x, z) in r and (z, y) in p for z in U)}


def o_inverse(r, U):
    return {(y, x) for y, x in product(U, U) if (x, y) in r}


def o_dom(r, U):
    return {x for x in U if any((x, y) in r for y in U)}


def o_ran(r, U):
    return {y for y in U if any((x, y) in r for x in U)}


def o_domain_restrict(s, r, U):
    return {(x, y) for x, y in product(U, U) if (x, y) in r and x in s}


def o_range_restrict(r, s, U):
    return {(x, y) for x, y in product(U, U) if (x, y) in r and y in s}


def o_image(r, s, U):
    return {y for y in U if any(x in s and (x, y) in r for x in U)}


def o_is_partial_function(r, U):
    return all(not ((x, y1) in r and (x, y2) in r) or y1 == y2
               for x, y1, y2 in product(U, U, U))


def o_is_total_function(r, S, U):
    return o_is_partial_function(r, U) and all(any((x, y) in r for y in U) for x in S) \
        and o_dom(r, U) <= set(S)


def o_is_bijection(r, S, T, U):
    injective = all(not ((x1, y) in r and (x2, y) in r) or x1 == x2
                    for x1, x2, y in product(U, U, U))
    return o_is_total_function(r, S, U) and injective and o_ran(r, U) == set(T)


def o_is_partition(whole, parts):
    union = set()
    for p in parts:
        union |= set(p)
    disjoint = all(not (set(a) & set(b))
                   for i, a in enumerate(parts) for b in parts[i + 1:])
    return disjoint and union == set(whole)


def random_universe(rng: random.Random, max_size: int = 6):
    return [f"u{i}" for i in range(rng.randint(1, max_size))]


def random_relation(rng: random.Random, U, density=None):
    density = rng.random() if density is None else density
    return frozenset((x, y) for x, y in product(U, U) if rng.random() < density)


def random_set(rng: random.Random, U):
    return frozenset(x for x in U if rng.random() < 0.5)
