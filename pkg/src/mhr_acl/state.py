"""System state of the health-record access model and its invariant engine."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .relations import (
    EMPTY,
    compose,
    dom,
    domain_restrict,
    ident_key,
    inverse,
    is_bijection,
    is_partition,
    is_total_function,
    ran,
    sorted_ids,
)


class UnknownIdentifier(ValueError):
    """An identifier is outside the universe (or not a live record)."""


class RecordCategory(enum.Enum):
    GENERAL = "general"
    RESTRICTED = "restricted"
    HIDDEN = "hidden"


class ProviderListKind(enum.Enum):
    GENERAL = "general"
    RESTRICTED = "restricted"
    REVOKED = "revoked"


class NomineeListKind(enum.Enum):
    GENERAL = "general"
    RESTRICTED = "restricted"
    FULL_ACCESS = "full_access"


# -- actors ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Consumer:
    id: object

    def __str__(self):
        return str(self.id)


@dataclass(frozen=True, slots=True)
class Provider:
    id: object

    def __str__(self):
        return str(self.id)


@dataclass(frozen=True, slots=True)
class Operator:
    id: object

    def __str__(self):
        return str(self.id)


ActorRef = (Consumer, Provider, Operator)
_ACTOR_RANK = {Consumer: 0, Provider: 1, Operator: 2}


def actor_key(a) -> tuple:
    return (_ACTOR_RANK[type(a)], ident_key(a.id))


# -- universe ----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Universe:
    """The four carrier sets, instantiated as explicit finite sets."""

    people: frozenset
    record_spaces: frozenset
    resources: frozenset
    providers: frozenset

    def __post_init__(self):
        groups = [self.people, self.record_spaces, self.resources, self.providers]
        for i, a in enumerate(groups):
            for b in groups[i + 1:]:
                if a & b:
                    raise ValueError(f"carrier sets share identifiers: {sorted_ids(a & b)}")

    @classmethod
    def of_sizes(cls, people: int, spaces: int, records: int, providers: int,
                 operators: int = 0) -> tuple["Universe", frozenset]:
        """Build a universe with symbolic ids ``p1.. m1.. r1.. sp1.. op1..``.

        Operators are extra people; the returned pair is
        ``(universe, operator_ids)``.
        """
        for name, n in (("people", people), ("spaces", spaces), ("records", records),
                        ("providers", providers), ("operators", operators)):
            if n < 0:
                raise ValueError(f"{name} must be >= 0, got {n}")
        ops = frozenset(f"op{i}" for i in range(1, operators + 1))
        u = cls(
            people=frozenset(f"p{i}" for i in range(1, people + 1)) | ops,
            record_spaces=frozenset(f"m{i}" for i in range(1, spaces + 1)),
            resources=frozenset(f"r{i}" for i in range(1, records + 1)),
            providers=frozenset(f"sp{i}" for i in range(1, providers + 1)),
        )
        return u, ops


# -- state -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SystemState:
    universe: Universe
    # abstract machine
    consumers: frozenset = EMPTY
    system_operators: frozenset = EMPTY
    mhr_db: frozenset = EMPTY
    my_hr: frozenset = EMPTY                       # consumer -> space
    records: frozenset = EMPTY
    records_mhr: frozenset = EMPTY                 # record -> space
    consumer_own_records: frozenset = EMPTY        # record -> consumer
    general_records: frozenset = EMPTY
    restricted_records: frozenset = EMPTY
    hidden_records: frozenset = EMPTY
    # service providers
    service_providers: frozenset = EMPTY
    consumer_sp: frozenset = EMPTY                 # consumer -> provider
    sp_mhr_access: frozenset = EMPTY               # provider -> space
    general_sp_list: frozenset = EMPTY
    restricted_sp_list: frozenset = EMPTY
    revoked_sp_list: frozenset = EMPTY
    general_sp_access: frozenset = EMPTY           # provider -> record
    restricted_sp_access: frozenset = EMPTY
    # nominated representatives
    general_nominated: frozenset = EMPTY           # consumer -> space
    restricted_nominated: frozenset = EMPTY
    full_access_nominated: frozenset = EMPTY
    general_nominated_access: frozenset = EMPTY    # consumer -> record
    restricted_nominated_access: frozenset = EMPTY
    # authorised representatives
    authorised_rep: frozenset = EMPTY              # consumer -> space

    def space_of(self, c):
        for x, m in self.my_hr:
            if x == c:
                return m
        raise KeyError(c)

    def owner_of_space(self, m):
        for c, x in self.my_hr:
            if x == m:
                return c
        raise KeyError(m)

    def records_in(self, m) -> frozenset:
        return frozenset(r for r, x in self.records_mhr if x == m)


STATE_FIELDS = tuple(f.name for f in dataclasses.fields(SystemState) if f.name != "universe")
DERIVED_FIELDS = (
    "sp_mhr_access",
    "general_sp_access",
    "restricted_sp_access",
    "general_nominated_access",
    "restricted_nominated_access",
)


def initial_state(u: Universe, operators: Iterable = ()) -> SystemState:
    operators = frozenset(operators)
    if not operators <= u.people:
        raise UnknownIdentifier(f"operators not in people: {sorted_ids(operators - u.people)}")
    return SystemState(universe=u, system_operators=operators)


# -- invariants --------------------------------------------------------------

class InvariantId(enum.Enum):
    INV_1 = "INV-1"
    INV_2 = "INV-2"
    INV_3 = "INV-3"
    INV_4 = "INV-4"
    INV_5 = "INV-5"
    INV_6 = "INV-6"
    INV_7 = "INV-7"
    INV_8 = "INV-8"
    INV_9 = "INV-9"
    INV_10 = "INV-10"
    INV_11 = "INV-11"
    INV_12 = "INV-12"
    INV_13 = "INV-13"
    INV_14 = "INV-14"
    INV_15 = "INV-15"
    INV_16 = "INV-16"
    INV_17 = "INV-17"
    INV_18 = "INV-18"
    # variable typing (subset-of-carrier and relation signatures)
    TYPING = "TYPING"
    # incrementally maintained relations differ from their recomputation
    ORACLE = "ORACLE"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, text: str) -> "InvariantId":
        return cls(text.upper())


MODEL_INVARIANTS = tuple(i for i in InvariantId if i is not InvariantId.ORACLE)


@dataclass(frozen=True, slots=True)
class InvariantViolation:
    id: InvariantId
    witness: str

    def __post_init__(self):
        if not self.witness:
            raise ValueError("witness must be nonempty")

    def __str__(self):
        return f"{self.id}: {self.witness}"


def _fmt(items) -> str:
    def show(x):
        return f"{x[0]}|->{x[1]}" if isinstance(x, tuple) else str(x)
    return "{" + ", ".join(show(x) for x in sorted(items, key=ident_key)) + "}"


def _eq_witness(name: str, actual: frozenset, expected: frozenset) -> str:
    parts = []
    if actual - expected:
        parts.append(f"extra {_fmt(actual - expected)}")
    if expected - actual:
        parts.append(f"missing {_fmt(expected - actual)}")
    return f"{name}: " + ", ".join(parts)


def sp_access_general(s: SystemState) -> frozenset:
    return compose(s.general_sp_list, inverse(domain_restrict(s.general_records, s.records_mhr)))


def sp_access_restricted(s: SystemState) -> frozenset:
    visible = s.general_records | s.restricted_records
    return (compose(s.restricted_sp_list, inverse(domain_restrict(visible, s.records_mhr)))
            | compose(s.general_sp_list, inverse(domain_restrict(s.general_records, s.records_mhr))))


def nominated_access_general(s: SystemState) -> frozenset:
    return compose(s.general_nominated, inverse(domain_restrict(s.general_records, s.records_mhr)))


def nominated_access_restricted(s: SystemState) -> frozenset:
    visible = s.general_records | s.restricted_records
    return (compose(s.restricted_nominated, inverse(domain_restrict(visible, s.records_mhr)))
            | compose(s.general_nominated, inverse(domain_restrict(s.general_records, s.records_mhr))))


def _check_typing(s: SystemState) -> list[str]:
    u = s.universe
    bad = []
    for name, val, carrier in (
        ("consumer", s.consumers, u.people),
        ("system_operator", s.system_operators, u.people),
        ("my_health_record_DB", s.mhr_db, u.record_spaces),
        ("records", s.records, u.resources),
        ("service_providers", s.service_providers, u.providers),
    ):
        if not val <= carrier:
            bad.append(f"{name} outside carrier: {_fmt(val - carrier)}")
    if not (dom(s.consumer_sp) <= s.consumers and ran(s.consumer_sp) <= s.service_providers):
        bad.append(f"consumer_sp not in consumer <-> service_providers: {_fmt(s.consumer_sp)}")
    for name in ("general_nominated", "restricted_nominated", "full_access_nominated", "authorised_rep"):
        r = getattr(s, name)
        if not (dom(r) <= s.consumers and ran(r) <= s.mhr_db):
            bad.append(f"{name} not in consumer <-> my_health_record_DB: {_fmt(r)}")
    return bad


def check_invariants(s: SystemState, only: Optional[Iterable[InvariantId]] = None) -> list[InvariantViolation]:
    """Evaluate every model invariant (or the ``only`` subset) and return the
    violated ones in id order.  No short-circuiting."""
    sel = set(MODEL_INVARIANTS if only is None else only)
    out: list[InvariantViolation] = []

    def want(i):
        return i in sel

    def fail(i, witness):
        out.append(InvariantViolation(i, witness))

    I = InvariantId
    if want(I.INV_1) and not is_bijection(s.my_hr, s.consumers, s.mhr_db):
        fail(I.INV_1, f"MyHR={_fmt(s.my_hr)} is not a bijection consumer={_fmt(s.consumers)} "
                      f">->> DB={_fmt(s.mhr_db)}")
    if want(I.INV_2) and s.system_operators & s.consumers:
        fail(I.INV_2, f"operators that are consumers: {_fmt(s.system_operators & s.consumers)}")
    if want(I.INV_3) and not is_total_function(s.records_mhr, s.records, s.mhr_db):
        fail(I.INV_3, f"records_mhr={_fmt(s.records_mhr)} is not a total function "
                      f"records={_fmt(s.records)} --> DB={_fmt(s.mhr_db)}")
    if want(I.INV_4) and not is_total_function(s.consumer_own_records, s.records, s.consumers):
        fail(I.INV_4, f"consumer_own_records={_fmt(s.consumer_own_records)} is not a total function "
                      f"records={_fmt(s.records)} --> consumer={_fmt(s.consumers)}")
    if want(I.INV_5) and not is_partition(
            s.records, (s.general_records, s.restricted_records, s.hidden_records)):
        fail(I.INV_5, f"records={_fmt(s.records)} general={_fmt(s.general_records)} "
                      f"restricted={_fmt(s.restricted_records)} hidden={_fmt(s.hidden_records)}")
    if want(I.INV_6):
        owned = compose(inverse(s.consumer_own_records), s.records_mhr)
        if not owned <= s.my_hr:
            fail(I.INV_6, f"owner/space pairs not in MyHR: {_fmt(owned - s.my_hr)}")
    if want(I.INV_7):
        expected = compose(inverse(s.consumer_sp), s.my_hr)
        if s.sp_mhr_access != expected:
            fail(I.INV_7, _eq_witness("sp_MyHR_access", s.sp_mhr_access, expected))
    if want(I.INV_8) and not is_partition(
            s.sp_mhr_access, (s.general_sp_list, s.restricted_sp_list, s.revoked_sp_list)):
        fail(I.INV_8, f"sp_MyHR_access={_fmt(s.sp_mhr_access)} general={_fmt(s.general_sp_list)} "
                      f"restricted={_fmt(s.restricted_sp_list)} revoked={_fmt(s.revoked_sp_list)}")
    if want(I.INV_9):
        expected = sp_access_general(s)
        if s.general_sp_access != expected:
            fail(I.INV_9, _eq_witness("general_sp_access", s.general_sp_access, expected))
    if want(I.INV_10):
        expected = sp_access_restricted(s)
        if s.restricted_sp_access != expected:
            fail(I.INV_10, _eq_witness("restricted_sp_access", s.restricted_sp_access, expected))
    if want(I.INV_11) and not s.general_sp_access <= s.restricted_sp_access:
        fail(I.INV_11, f"general-only provider access: "
                       f"{_fmt(s.general_sp_access - s.restricted_sp_access)}")
    if want(I.INV_12) and s.general_nominated & s.restricted_nominated:
        fail(I.INV_12, f"in both nominee lists: {_fmt(s.general_nominated & s.restricted_nominated)}")
    if want(I.INV_13) and not s.full_access_nominated <= s.restricted_nominated:
        fail(I.INV_13, f"full access but not restricted: "
                       f"{_fmt(s.full_access_nominated - s.restricted_nominated)}")
    if want(I.INV_14):
        self_nominated = (s.general_nominated | s.restricted_nominated) & s.my_hr
        if self_nominated:
            fail(I.INV_14, f"owners nominated on their own record: {_fmt(self_nominated)}")
    if want(I.INV_15):
        expected = nominated_access_general(s)
        if s.general_nominated_access != expected:
            fail(I.INV_15, _eq_witness("general_nominated_access", s.general_nominated_access, expected))
    if want(I.INV_16):
        expected = nominated_access_restricted(s)
        if s.restricted_nominated_access != expected:
            fail(I.INV_16, _eq_witness("restricted_nominated_access",
                                       s.restricted_nominated_access, expected))
    if want(I.INV_17) and not s.general_nominated_access <= s.restricted_nominated_access:
        fail(I.INV_17, f"general-only nominee access: "
                       f"{_fmt(s.general_nominated_access - s.restricted_nominated_access)}")
    if want(I.INV_18) and s.authorised_rep & s.my_hr:
        fail(I.INV_18, f"owners authorised on their own record: {_fmt(s.authorised_rep & s.my_hr)}")
    if want(I.TYPING):
        for w in _check_typing(s):
            fail(I.TYPING, w)
    return out


def recompute_derived(s: SystemState) -> SystemState:
    """Rebuild the redundant access relations from the lists and records."""
    return dataclasses.replace(
        s,
        sp_mhr_access=compose(inverse(s.consumer_sp), s.my_hr),
        general_sp_access=sp_access_general(s),
        restricted_sp_access=sp_access_restricted(s),
        general_nominated_access=nominated_access_general(s),
        restricted_nominated_access=nominated_access_restricted(s),
    )


def derived_divergence(s: SystemState) -> list[InvariantViolation]:
    """Compare incrementally maintained relations against ``recompute_derived``."""
    fresh = recompute_derived(s)
    out = []
    for name in DERIVED_FIELDS:
        a, b = getattr(s, name), getattr(fresh, name)
        if a != b:
            out.append(InvariantViolation(InvariantId.ORACLE, _eq_witness(name, a, b)))
    return out


# -- access query ------------------------------------------------------------

def can_view(s: SystemState, actor, record) -> bool:
    if record not in s.records:
        raise UnknownIdentifier(f"no such record: {record}")
    if record in s.hidden_records:
        return False
    if isinstance(actor, Provider):
        return (actor.id, record) in s.restricted_sp_access
    if not isinstance(actor, Consumer):
        return False
    p = actor.id
    if (record, p) in s.consumer_own_records:
        return True
    if (p, record) in s.restricted_nominated_access:
        return True
    for r, m in s.records_mhr:
        if r == record:
            return (p, m) in s.authorised_rep
    return False


# -- canonical form ----------------------------------------------------------

def _pair_key(pr):
    return (ident_key(pr[0]), ident_key(pr[1]))


def _encode(val: frozenset) -> list:
    if val and isinstance(next(iter(val)), tuple):
        return [list(pr) for pr in sorted(val, key=_pair_key)]
    return sorted_ids(val)


def to_dict(s: SystemState) -> dict:
    u = s.universe
    d = {
        "universe": {
            "people": sorted_ids(u.people),
            "record_spaces": sorted_ids(u.record_spaces),
            "resources": sorted_ids(u.resources),
            "providers": sorted_ids(u.providers),
        }
    }
    for name in STATE_FIELDS:
        d[name] = _encode(getattr(s, name))
    return d


def to_json(s: SystemState, indent: Optional[int] = None) -> str:
    if indent is None:
        return json.dumps(to_dict(s), sort_keys=True, separators=(",", ":"))
    return json.dumps(to_dict(s), sort_keys=True, indent=indent)


def from_dict(d: dict) -> SystemState:
    ud = d["universe"]
    u = Universe(
        people=frozenset(ud["people"]),
        record_spaces=frozenset(ud["record_spaces"]),
        resources=frozenset(ud["resources"]),
        providers=frozenset(ud["providers"]),
    )
    kw = {}
    for name in STATE_FIELDS:
        kw[name] = frozenset(tuple(x) if isinstance(x, list) else x for x in d.get(name, []))
    return SystemState(universe=u, **kw)


def hash_state(s: SystemState) -> int:
    """64-bit digest of the canonical serialization."""
    return int.from_bytes(hashlib.blake2b(to_json(s).encode(), digest_size=8).digest(), "big")
