"""Bounded exhaustive exploration and seeded random fuzzing of the kernel."""

from __future__ import annotations

import itertools
import os
import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .kernel import CATALOG, Event, Trace, apply, fire, record_trace
from .mutants import mutation_set
from .relations import sorted_ids
from .state import (
    MODEL_INVARIANTS,
    Consumer,
    Operator,
    Provider,
    RecordCategory,
    SystemState,
    Universe,
    can_view,
    check_invariants,
    derived_divergence,
    initial_state,
)

DEFAULT_CAP = 5_000_000


class StateCapExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"state cap of {cap} distinct states exceeded")
        self.cap = cap


def default_cap() -> int:
    return int(os.environ.get("MHR_ACL_CAP", DEFAULT_CAP))


@dataclass
class CheckerConfig:
    people: int = 2
    spaces: int = 2
    records: int = 2
    providers: int = 1
    operators: int = 1
    max_depth: int = 6
    mode: str = "exhaustive"          # exhaustive | random
    seed: int = 1
    trace_count: int = 100
    trace_length: int = 20
    invariants: Optional[tuple] = None   # None means all
    cap: int = field(default_factory=default_cap)
    stop_on_violation: bool = False
    mutant: Optional[str] = None

    def __post_init__(self):
        for name in ("people", "spaces", "records"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("providers", "operators", "max_depth", "trace_count", "trace_length"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.mode not in ("exhaustive", "random"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.cap < 1:
            raise ValueError("cap must be positive")
        mutation_set(self.mutant)   # validates the name

    def universe(self) -> tuple[Universe, frozenset]:
        return Universe.of_sizes(self.people, self.spaces, self.records, self.providers, self.operators)

    def selected(self) -> tuple:
        return MODEL_INVARIANTS if self.invariants is None else tuple(self.invariants)

    def sizes(self) -> dict:
        return dict(people=self.people, spaces=self.spaces, records=self.records,
                    providers=self.providers, operators=self.operators)


@dataclass
class Counterexample:
    trace: Trace
    violated: list

    @property
    def depth(self) -> int:
        return len(self.trace.steps)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "trace": [str(e) for e, _ in self.trace.steps],
            "violated": [{"id": str(v.id), "witness": v.witness} for v in self.violated],
        }


@dataclass
class CheckerReport:
    mode: str
    states_visited: int = 0
    transitions_fired: int = 0
    depth_reached: int = 0
    violations: list = field(default_factory=list)
    elapsed: float = 0.0
    mutant: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "mode": self.mode,
            "mutant": self.mutant,
            "states_visited": self.states_visited,
            "transitions_fired": self.transitions_fired,
            "depth_reached": self.depth_reached,
            "violations": [cx.to_dict() for cx in self.violations],
        }
        if timing:
            d["elapsed"] = round(self.elapsed, 3)
        return d


# -- enumeration -------------------------------------------------------------

def all_actors(u: Universe) -> list:
    people = sorted_ids(u.people)
    return ([Consumer(p) for p in people] + [Provider(sp) for sp in sorted_ids(u.providers)]
            + [Operator(p) for p in people])


def all_instantiations(u: Universe) -> list:
    """Every event over every well-typed argument tuple, in canonical order."""
    domains = {
        "person": sorted_ids(u.people),
        "space": sorted_ids(u.record_spaces),
        "record": sorted_ids(u.resources),
        "provider": sorted_ids(u.providers),
        "actor": all_actors(u),
        "category": list(RecordCategory),
    }
    out = []
    for name, spec in CATALOG.items():
        for args in itertools.product(*(domains[k] for k in spec.slots)):
            out.append(Event(name, args))
    out.sort(key=Event.sort_key)
    return out


_INSTANTIATION_CACHE: dict = {}


def enumerate_enabled_brute(s: SystemState, mut: frozenset = frozenset()) -> list:
    """Enabled events found by trying every instantiation against the guards."""
    u = s.universe
    if u not in _INSTANTIATION_CACHE:
        _INSTANTIATION_CACHE[u] = all_instantiations(u)
    return [e for e in _INSTANTIATION_CACHE[u] if apply(s, e, mut)[1] is None]


def _controllers(s: SystemState, m) -> list:
    reps = [a for a, x in s.authorised_rep if x == m]
    if reps:
        return [Consumer(a) for a in reps]
    return [Consumer(s.owner_of_space(m))]


def enumerate_enabled(s: SystemState, u: Optional[Universe] = None,
                      mut: frozenset = frozenset()) -> list:
    """All enabled event instantiations in ``s``, sorted canonically.

    The unmutated kernel is enumerated constructively from the state; mutants
    fall back to filtering every instantiation through the guards.
    """
    if mut:
        return enumerate_enabled_brute(s, mut)
    u = u or s.universe
    C = s.consumers
    ev: list = []
    add = ev.append
    free_records = sorted_ids(u.resources - s.records)
    cats = (RecordCategory.GENERAL, RecordCategory.RESTRICTED)

    for p in u.people - C - s.system_operators:
        for m in u.record_spaces - s.mhr_db:
            add(Event("register_consumer", (p, m)))
    for sp in u.providers - s.service_providers:
        add(Event("register_service_provider", (sp,)))
    for op in s.system_operators:
        for r in s.hidden_records:
            add(Event("unhide_record", (op, r)))
    for r in s.records:
        for a in all_actors(u):
            if can_view(s, a, r):
                add(Event("view_record", (a, r)))

    owned: dict = {c: [] for c in C}
    for r, c in s.consumer_own_records:
        owned[c].append(r)

    for c, m in s.my_hr:
        add(Event("opt_out", (c,)))
        ctl = _controllers(s, m)
        for a in ctl:
            for r in free_records:
                for cat in cats:
                    add(Event("upload_record", (a, c, r, cat)))
            for r in owned[c]:
                add(Event("delete_record", (a, c, r)))
                if r in s.general_records:
                    add(Event("restrict_record", (a, c, r)))
                elif r in s.restricted_records:
                    add(Event("general_record", (a, c, r)))
                if r not in s.hidden_records:
                    add(Event("hide_record", (a, c, r)))
            for sp in s.service_providers:
                if (c, sp) not in s.consumer_sp:
                    add(Event("assign_provider", (a, c, sp)))
                    continue
                if (sp, m) not in s.restricted_sp_list:
                    add(Event("grant_restricted_sp", (a, c, sp)))
                if (sp, m) not in s.general_sp_list:
                    add(Event("grant_general_sp", (a, c, sp)))
                if (sp, m) not in s.revoked_sp_list:
                    add(Event("revoke_access_sp", (a, c, sp)))
            for n in C:
                if n == c:
                    continue
                pair = (n, m)
                if (pair in s.general_nominated or pair in s.restricted_nominated
                        or pair in s.full_access_nominated):
                    add(Event("remove_nominated", (a, c, n)))
                else:
                    add(Event("add_nominated_general", (a, c, n)))
                    add(Event("add_nominated_restricted", (a, c, n)))
                    add(Event("grant_full_access_to_nominated", (a, c, n)))
        for sp in s.service_providers:
            in_general = (sp, m) in s.general_sp_list
            in_restricted = (sp, m) in s.restricted_sp_list
            for r in free_records:
                if in_general or in_restricted:
                    add(Event("upload_general_record_SP", (sp, c, r)))
                if in_restricted:
                    add(Event("upload_restricted_record_SP", (sp, c, r)))
        for n, x in s.full_access_nominated:
            if x == m:
                for r in free_records:
                    add(Event("upload_general_record_nominated", (n, c, r)))
                    add(Event("upload_restricted_record_nominated", (n, c, r)))
        for op in s.system_operators:
            for a in C:
                if a == c:
                    continue
                if (a, m) in s.authorised_rep:
                    add(Event("remove_authorised_rep", (op, a, c)))
                else:
                    add(Event("assign_authorised_rep", (op, a, c)))
    ev.sort(key=Event.sort_key)
    return ev


# -- exploration -------------------------------------------------------------

def _path(parents: dict, s: SystemState) -> list:
    events = []
    while parents[s] is not None:
        prev, e = parents[s]
        events.append(e)
        s = prev
    events.reverse()
    return events


def _counterexample(s0, events, violated, mut) -> Counterexample:
    trace, _ = record_trace(s0, events, mut)
    return Counterexample(trace, list(violated))


def explore(cfg: CheckerConfig) -> CheckerReport:
    """Breadth-first exploration from the initial state up to ``cfg.max_depth``.

    Each distinct state is invariant-checked once.  A counterexample (the
    shortest path) is kept for every invariant the first time it is seen
    violated; violating states are not expanded further.
    """
    t0 = time.perf_counter()
    mut = mutation_set(cfg.mutant)
    sel = cfg.selected()
    u, ops = cfg.universe()
    s0 = initial_state(u, ops)
    report = CheckerReport(mode="exhaustive", mutant=cfg.mutant)

    parents: dict = {s0: None}
    queue = deque([(s0, 0)])
    seen_ids: set = set()
    while queue:
        s, d = queue.popleft()
        report.states_visited += 1
        report.depth_reached = max(report.depth_reached, d)
        violated = check_invariants(s, sel)
        if violated:
            ids = {v.id for v in violated}
            if not ids <= seen_ids:
                seen_ids |= ids
                report.violations.append(_counterexample(s0, _path(parents, s), violated, mut))
                if cfg.stop_on_violation:
                    break
            continue
        if d >= cfg.max_depth:
            continue
        for e in enumerate_enabled(s, u, mut):
            t = fire(s, e, mut)
            report.transitions_fired += 1
            if t not in parents:
                if len(parents) >= cfg.cap:
                    raise StateCapExceeded(cfg.cap)
                parents[t] = (s, e)
                queue.append((t, d + 1))
    report.elapsed = time.perf_counter() - t0
    return report


def trace_rng(seed: int, index: int) -> random.Random:
    return random.Random(seed * 1_000_003 + index)


def fuzz(cfg: CheckerConfig) -> CheckerReport:
    """Seeded random walks: each step is drawn uniformly from the enabled
    events, then checked against the invariants and the recomputation oracle."""
    t0 = time.perf_counter()
    mut = mutation_set(cfg.mutant)
    sel = cfg.selected()
    u, ops = cfg.universe()
    s0 = initial_state(u, ops)
    report = CheckerReport(mode="random", mutant=cfg.mutant)
    seen_ids: set = set()

    initial_bad = (check_invariants(s0, sel) + derived_divergence(s0)) if cfg.trace_count else []
    for i in range(cfg.trace_count):
        rng = trace_rng(cfg.seed, i)
        s = s0
        report.states_visited += 1
        events = []
        bad = initial_bad
        for _ in range(cfg.trace_length):
            if bad:
                break
            enabled = enumerate_enabled(s, u, mut)
            if not enabled:
                break
            e = enabled[rng.randrange(len(enabled))]
            s = fire(s, e, mut)
            events.append(e)
            report.transitions_fired += 1
            report.states_visited += 1
            bad = check_invariants(s, sel) + derived_divergence(s)
        report.depth_reached = max(report.depth_reached, len(events))
        if bad:
            ids = {v.id for v in bad}
            if not ids <= seen_ids:
                seen_ids |= ids
                report.violations.append(_counterexample(s0, events, bad, mut))
                if cfg.stop_on_violation:
                    break
    report.elapsed = time.perf_counter() - t0
    return report


def run(cfg: CheckerConfig) -> CheckerReport:
    return explore(cfg) if cfg.mode == "exhaustive" else fuzz(cfg)
