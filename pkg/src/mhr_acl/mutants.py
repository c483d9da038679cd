"""Deliberately broken kernel variants used to show the checker finds bugs."""

from __future__ import annotations

from dataclasses import dataclass

from .state import InvariantId


@dataclass(frozen=True)
class Mutant:
    name: str
    description: str
    expected: InvariantId


MUTANTS: dict[str, Mutant] = {m.name: m for m in [
    Mutant("drop_act4_r1", "revoke_access_sp leaves the provider's general access in place",
           InvariantId.INV_9),
    Mutant("drop_act5_r1", "revoke_access_sp leaves the provider's restricted access in place",
           InvariantId.INV_10),
    Mutant("drop_grd1_r2", "grant_full_access_to_nominated lets an owner nominate themselves",
           InvariantId.INV_14),
    Mutant("drop_act1_r2", "grant_full_access_to_nominated skips the restricted nominee list",
           InvariantId.INV_13),
    Mutant("drop_act2_restrict", "restrict_record leaves the record marked general",
           InvariantId.INV_5),
    Mutant("opt_out_no_cascade", "opt_out removes only the consumer, space and mapping",
           InvariantId.INV_3),
    Mutant("assign_rep_self", "assign_authorised_rep accepts the owner as their own representative",
           InvariantId.INV_18),
    Mutant("add_nominated_self", "add_nominated_* accept the owner as their own nominee",
           InvariantId.INV_14),
    Mutant("upload_skip_sp_access", "record uploads do not extend provider access",
           InvariantId.INV_9),
]}


def mutation_set(name: str | None) -> frozenset:
    if not name:
        return frozenset()
    if name not in MUTANTS:
        raise KeyError(f"unknown mutant {name!r}; known: {', '.join(sorted(MUTANTS))}")
    return frozenset([name])
