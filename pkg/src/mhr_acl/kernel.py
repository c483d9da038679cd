"""Guarded-event transition system for the health-record access model.

Every event is an all-or-nothing step: guards are evaluated in their listed
order against the pre-state, the first failing guard is reported as a
``GuardError`` and the state is returned untouched.  When all guards hold the
actions are computed from the pre-state only (parallel assignment) and the
redundant access relations are updated incrementally.

``mut`` arguments name deliberately broken variants of an event (see
``mhr_acl.mutants``); they exist so the checker can be shown to find bugs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional

from .relations import (
    cartesian_product,
    dom,
    domain_restrict,
    ident_key,
    image,
    inverse,
    range_restrict,
)
from .state import (
    Consumer,
    Operator,
    Provider,
    RecordCategory,
    SystemState,
    UnknownIdentifier,
    actor_key,
    can_view,
    hash_state,
)
NO_MUTANT: frozenset = frozenset()


class GuardError(Exception):
    """An event was submitted while one of its guards was false."""

    def __init__(self, event: str, guard: str, detail: str):
        super().__init__(f"{event}: {guard} failed: {detail}")
        self.event = event
        self.guard = guard
        self.detail = detail

    def __eq__(self, other):
        return (isinstance(other, GuardError)
                and (self.event, self.guard, self.detail) == (other.event, other.guard, other.detail))

    def __hash__(self):
        return hash((self.event, self.guard, self.detail))

    def __reduce__(self):
        return (GuardError, (self.event, self.guard, self.detail))


class UnknownEvent(ValueError):
    pass


class TraceDivergence(RuntimeError):
    """Replaying a trace produced a different outcome than was recorded."""


@dataclass(frozen=True, slots=True)
class Event:
    name: str
    args: tuple = ()

    def __str__(self):
        return " ".join([self.name, *(_token(a) for a in self.args)])

    def sort_key(self):
        return _event_key(self)


def _token(a) -> str:
    if isinstance(a, RecordCategory):
        return a.value
    return str(a)


@lru_cache(maxsize=65536)
def _event_key(e: Event):
    return (e.name, tuple(_arg_key(a) for a in e.args))


def _arg_key(a):
    if isinstance(a, (Consumer, Provider, Operator)):
        return actor_key(a)
    if isinstance(a, RecordCategory):
        return (9, a.value)
    return (5, ident_key(a))


# -- helpers -----------------------------------------------------------------

def _deny(event, guard, detail):
    raise GuardError(event, guard, detail)


def _pairs_left(r: frozenset, right) -> frozenset:
    """{x | x |-> right in r}"""
    return frozenset(x for x, y in r if y == right)


def _without_right(r: frozenset, rights: frozenset) -> frozenset:
    return frozenset(pr for pr in r if pr[1] not in rights)


def _without_left(r: frozenset, left) -> frozenset:
    return frozenset(pr for pr in r if pr[0] != left)


def _times(lefts: Iterable, right) -> frozenset:
    return frozenset((x, right) for x in lefts)


def actor_guard(s: SystemState, actor, c) -> bool:
    """May ``actor`` perform owner-control events on consumer ``c``'s record?

    The owner may act only while the record has no authorised representative;
    any authorised representative of the record may always act.
    """
    if not isinstance(actor, Consumer):
        return False
    m = s.space_of(c)
    if actor.id == c:
        return all(x != m for _, x in s.authorised_rep)
    return (actor.id, m) in s.authorised_rep


def _require_control(s, name, actor, c):
    if not actor_guard(s, actor, c):
        _deny(name, "grd1_r3", f"{actor} has no control over the record of {c}")


# -- record lifecycle --------------------------------------------------------

def _add_record(s: SystemState, c, r, category: RecordCategory, mut) -> SystemState:
    m = s.space_of(c)
    gl = _pairs_left(s.general_sp_list, m)
    rl = _pairs_left(s.restricted_sp_list, m)
    gn = _pairs_left(s.general_nominated, m)
    rn = _pairs_left(s.restricted_nominated, m)
    ch = dict(
        records=s.records | {r},
        records_mhr=s.records_mhr | {(r, m)},
        consumer_own_records=s.consumer_own_records | {(r, c)},
    )
    if category is RecordCategory.GENERAL:
        ch["general_records"] = s.general_records | {r}
        if "upload_skip_sp_access" not in mut:
            ch["general_sp_access"] = s.general_sp_access | _times(gl, r)
            ch["restricted_sp_access"] = s.restricted_sp_access | _times(gl | rl, r)
        ch["general_nominated_access"] = s.general_nominated_access | _times(gn, r)
        ch["restricted_nominated_access"] = s.restricted_nominated_access | _times(gn | rn, r)
    else:
        ch["restricted_records"] = s.restricted_records | {r}
        if "upload_skip_sp_access" not in mut:
            ch["restricted_sp_access"] = s.restricted_sp_access | _times(rl, r)
        ch["restricted_nominated_access"] = s.restricted_nominated_access | _times(rn, r)
    return dataclasses.replace(s, **ch)


def _drop_record_access(s: SystemState, rs: frozenset) -> dict:
    return dict(
        general_sp_access=_without_right(s.general_sp_access, rs),
        restricted_sp_access=_without_right(s.restricted_sp_access, rs),
        general_nominated_access=_without_right(s.general_nominated_access, rs),
        restricted_nominated_access=_without_right(s.restricted_nominated_access, rs),
    )


def register_consumer(s, p, m, mut=NO_MUTANT):
    n = "register_consumer"
    if p in s.consumers:
        _deny(n, "grd1", f"{p} is already a consumer")
    if p in s.system_operators:
        _deny(n, "grd2", f"{p} is a system operator")
    if m in s.mhr_db:
        _deny(n, "grd3", f"{m} is already in use")
    return dataclasses.replace(
        s,
        consumers=s.consumers | {p},
        mhr_db=s.mhr_db | {m},
        my_hr=s.my_hr | {(p, m)},
    )


def opt_out(s, c, mut=NO_MUTANT):
    if c not in s.consumers:
        _deny("opt_out", "grd1", f"{c} is not a consumer")
    m = s.space_of(c)
    ch = dict(
        consumers=s.consumers - {c},
        mhr_db=s.mhr_db - {m},
        my_hr=s.my_hr - {(c, m)},
    )
    if "opt_out_no_cascade" in mut:
        return dataclasses.replace(s, **ch)
    gone = s.records_in(m)
    ms = frozenset([m])

    def strip(r):
        # pairs naming c on the left or m on the right
        return frozenset(pr for pr in r if pr[0] != c and pr[1] != m)

    ch.update(
        records=s.records - gone,
        records_mhr=frozenset(pr for pr in s.records_mhr if pr[1] != m),
        consumer_own_records=frozenset(pr for pr in s.consumer_own_records if pr[0] not in gone),
        general_records=s.general_records - gone,
        restricted_records=s.restricted_records - gone,
        hidden_records=s.hidden_records - gone,
        consumer_sp=_without_left(s.consumer_sp, c),
        sp_mhr_access=_without_right(s.sp_mhr_access, ms),
        general_sp_list=_without_right(s.general_sp_list, ms),
        restricted_sp_list=_without_right(s.restricted_sp_list, ms),
        revoked_sp_list=_without_right(s.revoked_sp_list, ms),
        general_sp_access=_without_right(s.general_sp_access, gone),
        restricted_sp_access=_without_right(s.restricted_sp_access, gone),
        general_nominated=strip(s.general_nominated),
        restricted_nominated=strip(s.restricted_nominated),
        full_access_nominated=strip(s.full_access_nominated),
        general_nominated_access=frozenset(
            pr for pr in s.general_nominated_access if pr[0] != c and pr[1] not in gone),
        restricted_nominated_access=frozenset(
            pr for pr in s.restricted_nominated_access if pr[0] != c and pr[1] not in gone),
        authorised_rep=strip(s.authorised_rep),
    )
    return dataclasses.replace(s, **ch)


def upload_record(s, actor, c, r, category, mut=NO_MUTANT):
    n = "upload_record"
    if c not in s.consumers:
        _deny(n, "grd1", f"{c} is not a consumer")
    if r in s.records:
        _deny(n, "grd2", f"{r} already exists")
    if category is RecordCategory.HIDDEN:
        _deny(n, "grd3", "uploaded records are general or restricted")
    _require_control(s, n, actor, c)
    return _add_record(s, c, r, category, mut)


def delete_record(s, actor, c, r, mut=NO_MUTANT):
    n = "delete_record"
    if (r, c) not in s.consumer_own_records:
        _deny(n, "grd1", f"{r} is not owned by {c}")
    _require_control(s, n, actor, c)
    rs = frozenset([r])
    return dataclasses.replace(
        s,
        records=s.records - rs,
        records_mhr=frozenset(pr for pr in s.records_mhr if pr[0] != r),
        consumer_own_records=s.consumer_own_records - {(r, c)},
        general_records=s.general_records - rs,
        restricted_records=s.restricted_records - rs,
        hidden_records=s.hidden_records - rs,
        **_drop_record_access(s, rs),
    )


def restrict_record(s, actor, c, r, mut=NO_MUTANT):
    n = "restrict_record"
    if (r, c) not in s.consumer_own_records:
        _deny(n, "grd1", f"{r} is not owned by {c}")
    if r not in s.general_records:
        _deny(n, "grd2", f"{r} is not marked general")
    _require_control(s, n, actor, c)
    m = s.space_of(c)
    rs = frozenset([r])
    gl = _pairs_left(s.general_sp_list, m)
    gn = _pairs_left(s.general_nominated, m)
    return dataclasses.replace(
        s,
        restricted_records=s.restricted_records | rs,
        general_records=(s.general_records if "drop_act2_restrict" in mut
                         else s.general_records - rs),
        general_sp_access=_without_right(s.general_sp_access, rs),
        restricted_sp_access=s.restricted_sp_access - _times(gl, r),
        general_nominated_access=_without_right(s.general_nominated_access, rs),
        restricted_nominated_access=s.restricted_nominated_access - _times(gn, r),
    )


def general_record(s, actor, c, r, mut=NO_MUTANT):
    n = "general_record"
    if (r, c) not in s.consumer_own_records:
        _deny(n, "grd1", f"{r} is not owned by {c}")
    if r not in s.restricted_records:
        _deny(n, "grd2", f"{r} is not marked restricted")
    _require_control(s, n, actor, c)
    m = s.space_of(c)
    gl = _pairs_left(s.general_sp_list, m)
    gn = _pairs_left(s.general_nominated, m)
    return dataclasses.replace(
        s,
        general_records=s.general_records | {r},
        restricted_records=s.restricted_records - {r},
        general_sp_access=s.general_sp_access | _times(gl, r),
        restricted_sp_access=s.restricted_sp_access | _times(gl, r),
        general_nominated_access=s.general_nominated_access | _times(gn, r),
        restricted_nominated_access=s.restricted_nominated_access | _times(gn, r),
    )


def hide_record(s, actor, c, r, mut=NO_MUTANT):
    n = "hide_record"
    if (r, c) not in s.consumer_own_records:
        _deny(n, "grd1", f"{r} is not owned by {c}")
    if r in s.hidden_records:
        _deny(n, "grd2", f"{r} is already hidden")
    _require_control(s, n, actor, c)
    rs = frozenset([r])
    return dataclasses.replace(
        s,
        hidden_records=s.hidden_records | rs,
        general_records=s.general_records - rs,
        restricted_records=s.restricted_records - rs,
        **_drop_record_access(s, rs),
    )


def unhide_record(s, op, r, mut=NO_MUTANT):
    n = "unhide_record"
    if op not in s.system_operators:
        _deny(n, "grd1", f"{op} is not a system operator")
    if r not in s.hidden_records:
        _deny(n, "grd2", f"{r} is not hidden")
    m = next(x for y, x in s.records_mhr if y == r)
    gl = _pairs_left(s.general_sp_list, m)
    rl = _pairs_left(s.restricted_sp_list, m)
    gn = _pairs_left(s.general_nominated, m)
    rn = _pairs_left(s.restricted_nominated, m)
    return dataclasses.replace(
        s,
        hidden_records=s.hidden_records - {r},
        general_records=s.general_records | {r},
        general_sp_access=s.general_sp_access | _times(gl, r),
        restricted_sp_access=s.restricted_sp_access | _times(gl | rl, r),
        general_nominated_access=s.general_nominated_access | _times(gn, r),
        restricted_nominated_access=s.restricted_nominated_access | _times(gn | rn, r),
    )


def view_record(s, actor, r, mut=NO_MUTANT):
    n = "view_record"
    if r not in s.records:
        _deny(n, "grd1", f"{r} does not exist")
    if not can_view(s, actor, r):
        _deny(n, "grd2", f"{actor} may not view {r}")
    return s


# -- service providers -------------------------------------------------------

def register_service_provider(s, sp, mut=NO_MUTANT):
    if sp in s.service_providers:
        _deny("register_service_provider", "grd1", f"{sp} is already registered")
    return dataclasses.replace(s, service_providers=s.service_providers | {sp})


def assign_provider(s, actor, c, sp, mut=NO_MUTANT):
    n = "assign_provider"
    if c not in s.consumers:
        _deny(n, "grd1", f"{c} is not a consumer")
    if sp not in s.service_providers:
        _deny(n, "grd2", f"{sp} is not registered")
    if (c, sp) in s.consumer_sp:
        _deny(n, "grd3", f"{sp} already cares for {c}")
    _require_control(s, n, actor, c)
    m = s.space_of(c)
    visible = frozenset(r for r, x in s.records_mhr if x == m and r in s.general_records)
    new_access = cartesian_product([sp], visible)
    return dataclasses.replace(
        s,
        consumer_sp=s.consumer_sp | {(c, sp)},
        sp_mhr_access=s.sp_mhr_access | {(sp, m)},
        general_sp_list=s.general_sp_list | {(sp, m)},
        general_sp_access=s.general_sp_access | new_access,
        restricted_sp_access=s.restricted_sp_access | new_access,
    )


def _relist_provider(s, n, actor, c, sp, target):
    if c not in s.consumers:
        _deny(n, "grd1", f"{c} is not a consumer")
    m = s.space_of(c)
    if (sp, m) not in s.sp_mhr_access:
        _deny(n, "grd2", f"{sp} has no access to {m}")
    if (sp, m) in getattr(s, target):
        _deny(n, "grd3", f"{sp} is already in {target} for {m}")
    _require_control(s, n, actor, c)
    pair = {(sp, m)}
    in_space = s.records_in(m)
    old = cartesian_product([sp], in_space)
    if target == "restricted_sp_list":
        gen_access = s.general_sp_access - old
        restr_access = (s.restricted_sp_access - old) | cartesian_product(
            [sp], in_space & (s.general_records | s.restricted_records))
    else:
        new = cartesian_product([sp], in_space & s.general_records)
        gen_access = (s.general_sp_access - old) | new
        restr_access = (s.restricted_sp_access - old) | new
    lists = {k: getattr(s, k) - pair for k in ("general_sp_list", "restricted_sp_list", "revoked_sp_list")}
    lists[target] = getattr(s, target) | pair
    return dataclasses.replace(s, general_sp_access=gen_access, restricted_sp_access=restr_access, **lists)


def grant_restricted_sp(s, actor, c, sp, mut=NO_MUTANT):
    return _relist_provider(s, "grant_restricted_sp", actor, c, sp, "restricted_sp_list")


def grant_general_sp(s, actor, c, sp, mut=NO_MUTANT):
    return _relist_provider(s, "grant_general_sp", actor, c, sp, "general_sp_list")


def revoke_access_sp(s, actor, c, sp, mut=NO_MUTANT):
    n = "revoke_access_sp"
    if c not in s.consumers:
        _deny(n, "grd1_r1", f"{c} owns no record")
    mhr = s.space_of(c)
    if (c, sp) not in s.consumer_sp:
        _deny(n, "grd2_r1", f"{sp} does not care for {c}")
    if (sp, mhr) in s.revoked_sp_list:
        _deny(n, "grd3_r1", f"{sp} is already revoked for {mhr}")
    _require_control(s, n, actor, c)
    pair = {(sp, mhr)}
    in_space = image(inverse(s.records_mhr), frozenset([mhr]))
    ch = dict(
        revoked_sp_list=s.revoked_sp_list | pair,                       # act1_r1
        restricted_sp_list=s.restricted_sp_list - pair,                 # act2_r1
        general_sp_list=s.general_sp_list - pair,                       # act3_r1
    )
    if "drop_act4_r1" not in mut:
        ch["general_sp_access"] = s.general_sp_access - range_restrict(
            domain_restrict(frozenset([sp]), s.general_sp_access), in_space)
    if "drop_act5_r1" not in mut:
        ch["restricted_sp_access"] = s.restricted_sp_access - range_restrict(
            domain_restrict(frozenset([sp]), s.restricted_sp_access), in_space)
    return dataclasses.replace(s, **ch)


def _provider_upload(s, n, sp, c, r, lists, category, mut):
    if c not in s.consumers:
        _deny(n, "grd1", f"{c} is not a consumer")
    m = s.space_of(c)
    if not any((sp, m) in getattr(s, k) for k in lists):
        _deny(n, "grd2", f"{sp} is not in {' or '.join(lists)} for {m}")
    if r in s.records:
        _deny(n, "grd3", f"{r} already exists")
    return _add_record(s, c, r, category, mut)


def upload_general_record_SP(s, sp, c, r, mut=NO_MUTANT):
    # restricted providers inherit the general providers' permissions
    return _provider_upload(s, "upload_general_record_SP", sp, c, r,
                            ("general_sp_list", "restricted_sp_list"), RecordCategory.GENERAL, mut)


def upload_restricted_record_SP(s, sp, c, r, mut=NO_MUTANT):
    return _provider_upload(s, "upload_restricted_record_SP", sp, c, r,
                            ("restricted_sp_list",), RecordCategory.RESTRICTED, mut)


# -- nominated representatives -----------------------------------------------

def _add_nominee(s, name, actor, c, nom, restricted, mut):
    if c not in s.consumers:
        _deny(name, "grd1", f"{c} is not a consumer")
    if nom == c and "add_nominated_self" not in mut:
        _deny(name, "grd2", f"{c} cannot nominate themselves")
    if nom not in s.consumers:
        _deny(name, "grd3", f"{nom} is not a consumer")
    m = s.space_of(c)
    pair = (nom, m)
    if pair in s.general_nominated:
        _deny(name, "grd4", f"{nom} is already a general nominee of {m}")
    if pair in s.restricted_nominated:
        _deny(name, "grd5", f"{nom} is already a restricted nominee of {m}")
    if pair in s.full_access_nominated:
        _deny(name, "grd6", f"{nom} is already a full access nominee of {m}")
    _require_control(s, name, actor, c)
    in_space = s.records_in(m)
    if restricted:
        visible = in_space & (s.general_records | s.restricted_records)
        return dataclasses.replace(
            s,
            restricted_nominated=s.restricted_nominated | {pair},
            restricted_nominated_access=s.restricted_nominated_access
            | cartesian_product([nom], visible),
        )
    new = cartesian_product([nom], in_space & s.general_records)
    return dataclasses.replace(
        s,
        general_nominated=s.general_nominated | {pair},
        general_nominated_access=s.general_nominated_access | new,
        restricted_nominated_access=s.restricted_nominated_access | new,
    )


def add_nominated_general(s, actor, c, n, mut=NO_MUTANT):
    return _add_nominee(s, "add_nominated_general", actor, c, n, False, mut)


def add_nominated_restricted(s, actor, c, n, mut=NO_MUTANT):
    return _add_nominee(s, "add_nominated_restricted", actor, c, n, True, mut)


def grant_full_access_to_nominated(s, actor, c, n, mut=NO_MUTANT):
    name = "grant_full_access_to_nominated"
    if c == n and "drop_grd1_r2" not in mut:
        _deny(name, "grd1_r2", f"{c} cannot nominate themselves")
    if c not in s.consumers:
        _deny(name, "grd2_r2", f"{c} owns no record")
    mhr = s.space_of(c)
    if (n, mhr) in s.general_nominated:
        _deny(name, "grd3_r2", f"{n} is already a general nominee of {mhr}")
    if (n, mhr) in s.restricted_nominated:
        _deny(name, "grd4_r2", f"{n} is already a restricted nominee of {mhr}")
    if (n, mhr) in s.full_access_nominated:
        _deny(name, "grd5_r2", f"{n} is already a full access nominee of {mhr}")
    if n not in s.consumers:
        _deny(name, "grd6_r2", f"{n} is not a consumer")
    _require_control(s, name, actor, c)
    pair = {(n, mhr)}
    visible = dom(domain_restrict(s.general_records | s.restricted_records,
                                  range_restrict(s.records_mhr, frozenset([mhr]))))
    return dataclasses.replace(
        s,
        restricted_nominated=(s.restricted_nominated if "drop_act1_r2" in mut
                              else s.restricted_nominated | pair),                  # act1_r2
        full_access_nominated=s.full_access_nominated | pair,                       # act2_r2
        restricted_nominated_access=s.restricted_nominated_access
        | cartesian_product([n], visible),                                          # act3_r2
    )


def remove_nominated(s, actor, c, n, mut=NO_MUTANT):
    name = "remove_nominated"
    if c not in s.consumers:
        _deny(name, "grd1", f"{c} is not a consumer")
    m = s.space_of(c)
    pair = (n, m)
    if not (pair in s.general_nominated or pair in s.restricted_nominated
            or pair in s.full_access_nominated):
        _deny(name, "grd2", f"{n} is not a nominee of {m}")
    _require_control(s, name, actor, c)
    old = cartesian_product([n], s.records_in(m))
    return dataclasses.replace(
        s,
        general_nominated=s.general_nominated - {pair},
        restricted_nominated=s.restricted_nominated - {pair},
        full_access_nominated=s.full_access_nominated - {pair},
        general_nominated_access=s.general_nominated_access - old,
        restricted_nominated_access=s.restricted_nominated_access - old,
    )


def _nominee_upload(s, name, n, c, r, category, mut):
    if c not in s.consumers:
        _deny(name, "grd1", f"{c} is not a consumer")
    if (n, s.space_of(c)) not in s.full_access_nominated:
        _deny(name, "grd2", f"{n} has no full access to the record of {c}")
    if r in s.records:
        _deny(name, "grd3", f"{r} already exists")
    return _add_record(s, c, r, category, mut)


def upload_general_record_nominated(s, n, c, r, mut=NO_MUTANT):
    return _nominee_upload(s, "upload_general_record_nominated", n, c, r, RecordCategory.GENERAL, mut)


def upload_restricted_record_nominated(s, n, c, r, mut=NO_MUTANT):
    return _nominee_upload(s, "upload_restricted_record_nominated", n, c, r,
                           RecordCategory.RESTRICTED, mut)


# -- authorised representatives ----------------------------------------------

def assign_authorised_rep(s, op, a, c, mut=NO_MUTANT):
    n = "assign_authorised_rep"
    if op not in s.system_operators:
        _deny(n, "grd1", f"{op} is not a system operator")
    if a not in s.consumers:
        _deny(n, "grd2", f"{a} is not a consumer")
    if c not in s.consumers:
        _deny(n, "grd3", f"{c} is not a consumer")
    if a == c and "assign_rep_self" not in mut:
        _deny(n, "grd4", f"{c} cannot represent themselves")
    m = s.space_of(c)
    if (a, m) in s.authorised_rep:
        _deny(n, "grd5", f"{a} already represents {m}")
    return dataclasses.replace(s, authorised_rep=s.authorised_rep | {(a, m)})


def remove_authorised_rep(s, op, a, c, mut=NO_MUTANT):
    n = "remove_authorised_rep"
    if op not in s.system_operators:
        _deny(n, "grd1", f"{op} is not a system operator")
    if c not in s.consumers:
        _deny(n, "grd2", f"{c} is not a consumer")
    m = s.space_of(c)
    if (a, m) not in s.authorised_rep:
        _deny(n, "grd3", f"{a} does not represent {m}")
    return dataclasses.replace(s, authorised_rep=s.authorised_rep - {(a, m)})


# -- catalog -----------------------------------------------------------------

# slot kinds: person, space, record, provider, actor, category
@dataclass(frozen=True)
class EventSpec:
    name: str
    slots: tuple
    handler: Callable
    guards: tuple
    owner_control: bool = False


_C = ("actor", "person")      # actor acting on consumer c's record

CATALOG: dict[str, EventSpec] = {e.name: e for e in [
    EventSpec("register_consumer", ("person", "space"), register_consumer, ("grd1", "grd2", "grd3")),
    EventSpec("opt_out", ("person",), opt_out, ("grd1",)),
    EventSpec("upload_record", _C + ("record", "category"), upload_record,
              ("grd1", "grd2", "grd3", "grd1_r3"), True),
    EventSpec("delete_record", _C + ("record",), delete_record, ("grd1", "grd1_r3"), True),
    EventSpec("restrict_record", _C + ("record",), restrict_record, ("grd1", "grd2", "grd1_r3"), True),
    EventSpec("general_record", _C + ("record",), general_record, ("grd1", "grd2", "grd1_r3"), True),
    EventSpec("hide_record", _C + ("record",), hide_record, ("grd1", "grd2", "grd1_r3"), True),
    EventSpec("unhide_record", ("person", "record"), unhide_record, ("grd1", "grd2")),
    EventSpec("view_record", ("actor", "record"), view_record, ("grd1", "grd2")),
    EventSpec("register_service_provider", ("provider",), register_service_provider, ("grd1",)),
    EventSpec("assign_provider", _C + ("provider",), assign_provider,
              ("grd1", "grd2", "grd3", "grd1_r3"), True),
    EventSpec("grant_restricted_sp", _C + ("provider",), grant_restricted_sp,
              ("grd1", "grd2", "grd3", "grd1_r3"), True),
    EventSpec("grant_general_sp", _C + ("provider",), grant_general_sp,
              ("grd1", "grd2", "grd3", "grd1_r3"), True),
    EventSpec("revoke_access_sp", _C + ("provider",), revoke_access_sp,
              ("grd1_r1", "grd2_r1", "grd3_r1", "grd1_r3"), True),
    EventSpec("upload_general_record_SP", ("provider", "person", "record"), upload_general_record_SP,
              ("grd1", "grd2", "grd3")),
    EventSpec("upload_restricted_record_SP", ("provider", "person", "record"),
              upload_restricted_record_SP, ("grd1", "grd2", "grd3")),
    EventSpec("add_nominated_general", _C + ("person",), add_nominated_general,
              ("grd1", "grd2", "grd3", "grd4", "grd5", "grd6", "grd1_r3"), True),
    EventSpec("add_nominated_restricted", _C + ("person",), add_nominated_restricted,
              ("grd1", "grd2", "grd3", "grd4", "grd5", "grd6", "grd1_r3"), True),
    EventSpec("grant_full_access_to_nominated", _C + ("person",), grant_full_access_to_nominated,
              ("grd1_r2", "grd2_r2", "grd3_r2", "grd4_r2", "grd5_r2", "grd6_r2", "grd1_r3"), True),
    EventSpec("remove_nominated", _C + ("person",), remove_nominated, ("grd1", "grd2", "grd1_r3"), True),
    EventSpec("upload_general_record_nominated", ("person", "person", "record"),
              upload_general_record_nominated, ("grd1", "grd2", "grd3")),
    EventSpec("upload_restricted_record_nominated", ("person", "person", "record"),
              upload_restricted_record_nominated, ("grd1", "grd2", "grd3")),
    EventSpec("assign_authorised_rep", ("person", "person", "person"), assign_authorised_rep,
              ("grd1", "grd2", "grd3", "grd4", "grd5")),
    EventSpec("remove_authorised_rep", ("person", "person", "person"), remove_authorised_rep,
              ("grd1", "grd2", "grd3")),
]}

OWNER_CONTROL_EVENTS = tuple(n for n, e in CATALOG.items() if e.owner_control)


def check_identifiers(s: SystemState, e: Event) -> EventSpec:
    """Resolve the event spec, rejecting unknown names, arity mismatches and
    identifiers outside the universe."""
    spec = CATALOG.get(e.name)
    if spec is None:
        raise UnknownEvent(f"unknown event: {e.name}")
    if len(e.args) != len(spec.slots):
        raise UnknownEvent(f"{e.name} takes {len(spec.slots)} arguments, got {len(e.args)}")
    u = s.universe
    for kind, a in zip(spec.slots, e.args):
        if kind == "person":
            ok = a in u.people
        elif kind == "space":
            ok = a in u.record_spaces
        elif kind == "record":
            ok = a in u.resources
        elif kind == "provider":
            ok = a in u.providers
        elif kind == "category":
            ok = isinstance(a, RecordCategory)
        else:
            ok = (a.id in u.providers if isinstance(a, Provider)
                  else isinstance(a, (Consumer, Operator)) and a.id in u.people)
        if not ok:
            raise UnknownIdentifier(f"{e.name}: {a!r} is not a valid {kind}")
    return spec


def apply(s: SystemState, e: Event, mut: frozenset = NO_MUTANT) -> tuple[SystemState, Optional[GuardError]]:
    """Fire ``e`` on ``s``.

    Returns ``(successor, None)`` if every guard holds, else ``(s, error)``
    with the first failing guard.
    """
    spec = check_identifiers(s, e)
    try:
        return spec.handler(s, *e.args, mut=mut), None
    except GuardError as err:
        return s, err


def fire(s: SystemState, e: Event, mut: frozenset = NO_MUTANT) -> SystemState:
    """Like ``apply`` but raises ``GuardError`` on rejection."""
    spec = check_identifiers(s, e)
    return spec.handler(s, *e.args, mut=mut)


# -- traces ------------------------------------------------------------------

@dataclass(frozen=True)
class Trace:
    initial: SystemState
    steps: tuple = field(default_factory=tuple)   # (Event, GuardError | None)

    def events(self) -> list:
        return [e for e, _ in self.steps]


def record_trace(initial: SystemState, events: Iterable[Event],
                 mut: frozenset = NO_MUTANT) -> tuple[Trace, SystemState]:
    s = initial
    steps = []
    for e in events:
        s, err = apply(s, e, mut)
        steps.append((e, err))
    return Trace(initial, tuple(steps)), s


def replay(t: Trace, mut: frozenset = NO_MUTANT) -> SystemState:
    s = t.initial
    for i, (e, recorded) in enumerate(t.steps):
        s, err = apply(s, e, mut)
        if err != recorded:
            got = "applied" if err is None else f"rejected ({err.guard})"
            want = "applied" if recorded is None else f"rejected ({recorded.guard})"
            raise TraceDivergence(f"step {i + 1} ({e}): recorded {want}, replay {got}")
    return s


def trace_digest(t: Trace, mut: frozenset = NO_MUTANT) -> int:
    return hash_state(replay(t, mut))
