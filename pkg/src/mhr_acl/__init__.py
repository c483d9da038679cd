"""Executable access-control model of a national health-record system."""

from .kernel import Event, GuardError, Trace, actor_guard, apply, fire, replay
from .state import (
    Consumer,
    InvariantId,
    InvariantViolation,
    Operator,
    Provider,
    RecordCategory,
    SystemState,
    Universe,
    can_view,
    check_invariants,
    hash_state,
    initial_state,
    recompute_derived,
    to_json,
)

__all__ = [
    "Consumer", "Event", "GuardError", "InvariantId", "InvariantViolation", "Operator",
    "Provider", "RecordCategory", "SystemState", "Trace", "Universe", "actor_guard", "apply",
    "can_view", "check_invariants", "fire", "hash_state", "initial_state", "recompute_derived",
    "replay", "to_json",
]
