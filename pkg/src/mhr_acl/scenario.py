"""Scenario/trace files: a universe header followed by one event per line.

    # comment
    universe people=2 spaces=1 records=1 providers=0 operators=1
    register_consumer p1 m1
    restrict_record p1 p1 r1 expect deny

Identifiers are the symbolic ids produced by ``Universe.of_sizes``.  Actor
slots resolve by namespace: provider ids become ``Provider``, operator ids
``Operator`` and other people ``Consumer``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .kernel import CATALOG, Event, GuardError, apply
from .state import (
    Consumer,
    InvariantViolation,
    Operator,
    Provider,
    RecordCategory,
    SystemState,
    Universe,
    check_invariants,
    initial_state,
)

SIZE_KEYS = ("people", "spaces", "records", "providers", "operators")
_TOKEN = re.compile(r"\S+")


class ScenarioError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass
class Step:
    event: Event
    expect: Optional[bool] = None     # True ok, False deny, None unchecked
    line: int = 0


@dataclass
class Scenario:
    sizes: dict
    universe: Universe
    operators: frozenset
    steps: list = field(default_factory=list)

    def initial(self) -> SystemState:
        return initial_state(self.universe, self.operators)


def _tokens(text: str) -> list[tuple[int, str]]:
    return [(m.start() + 1, m.group()) for m in _TOKEN.finditer(text)]


def _parse_header(toks, lineno) -> dict:
    sizes = {"providers": 0, "operators": 0}
    for col, tok in toks[1:]:
        key, eq, val = tok.partition("=")
        if not eq or key not in SIZE_KEYS:
            raise ScenarioError(lineno, col, f"expected one of {', '.join(k + '=<n>' for k in SIZE_KEYS)}")
        if not val.isdigit():
            raise ScenarioError(lineno, col + len(key) + 1, f"{key} needs a non-negative integer")
        sizes[key] = int(val)
    for key in ("people", "spaces", "records"):
        if key not in sizes:
            raise ScenarioError(lineno, 1, f"universe header is missing {key}=<n>")
    return sizes


def _resolve(kind: str, tok: str, u: Universe, ops: frozenset):
    if kind == "category":
        try:
            return RecordCategory(tok)
        except ValueError:
            return None
    if kind == "actor":
        if tok in u.providers:
            return Provider(tok)
        if tok in ops:
            return Operator(tok)
        if tok in u.people:
            return Consumer(tok)
        return None
    carrier = {"person": u.people, "space": u.record_spaces,
               "record": u.resources, "provider": u.providers}[kind]
    return tok if tok in carrier else None


def parse_scenario(text: str) -> Scenario:
    sc: Optional[Scenario] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw.split("#", 1)[0])
        if not toks:
            continue
        if sc is None:
            if toks[0][1] != "universe":
                if toks[0][1] not in CATALOG:
                    raise ScenarioError(lineno, toks[0][0], f"unknown event {toks[0][1]!r}")
                raise ScenarioError(lineno, toks[0][0], "scenario must start with a 'universe' header")
            sizes = _parse_header(toks, lineno)
            u, ops = Universe.of_sizes(**sizes)
            sc = Scenario(sizes, u, ops)
            continue
        if toks[0][1] == "universe":
            raise ScenarioError(lineno, toks[0][0], "duplicate universe header")

        expect = None
        if len(toks) >= 2 and toks[-2][1] == "expect":
            col, word = toks[-1]
            if word not in ("ok", "deny"):
                raise ScenarioError(lineno, col, f"expected 'ok' or 'deny', got {word!r}")
            expect = word == "ok"
            toks = toks[:-2]
        elif toks[-1][1] == "expect":
            raise ScenarioError(lineno, toks[-1][0], "'expect' needs 'ok' or 'deny'")

        col, name = toks[0]
        spec = CATALOG.get(name)
        if spec is None:
            raise ScenarioError(lineno, col, f"unknown event {name!r}")
        args = toks[1:]
        if len(args) != len(spec.slots):
            where = args[len(spec.slots)][0] if len(args) > len(spec.slots) else len(raw.rstrip()) + 1
            raise ScenarioError(lineno, where,
                                f"{name} takes {len(spec.slots)} arguments "
                                f"({', '.join(spec.slots)}), got {len(args)}")
        values = []
        for kind, (acol, tok) in zip(spec.slots, args):
            v = _resolve(kind, tok, sc.universe, sc.operators)
            if v is None:
                raise ScenarioError(lineno, acol, f"{tok!r} is not a {kind} of the declared universe")
            values.append(v)
        sc.steps.append(Step(Event(name, tuple(values)), expect, lineno))
    if sc is None:
        raise ScenarioError(1, 1, "empty scenario: missing 'universe' header")
    return sc


def format_scenario(sizes: dict, events: Iterable[Event],
                    outcomes: Optional[Iterable[Optional[GuardError]]] = None,
                    comment: str = "") -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append("universe " + " ".join(f"{k}={sizes[k]}" for k in SIZE_KEYS))
    events = list(events)
    outs = list(outcomes) if outcomes is not None else [None] * len(events)
    for e, err in zip(events, outs):
        lines.append(f"{e} expect {'ok' if err is None else 'deny'}")
    return "\n".join(lines) + "\n"


@dataclass
class StepResult:
    step: Step
    error: Optional[GuardError]

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def matches(self) -> bool:
        return self.step.expect is None or self.step.expect == self.ok


@dataclass
class RunResult:
    results: list
    final: SystemState
    mismatch: Optional[StepResult]
    violations: list

    @property
    def passed(self) -> bool:
        return self.mismatch is None and not self.violations


def run_scenario(sc: Scenario, mut: frozenset = frozenset()) -> RunResult:
    """Replay the scenario, stopping at the first expectation mismatch."""
    s = sc.initial()
    results = []
    for step in sc.steps:
        s, err = apply(s, step.event, mut)
        res = StepResult(step, err)
        results.append(res)
        if not res.matches:
            return RunResult(results, s, res, check_invariants(s))
    violations: list[InvariantViolation] = check_invariants(s)
    return RunResult(results, s, None, violations)
