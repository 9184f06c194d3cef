"""Literal, set-based readings of the preference relation.

Nothing here uses the bitmask prefix tables of :mod:`pbpsc.core`; the j-th
candidate is found by actually breaking ties, which makes these helpers a
second, independent route to the same sets.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .core import PBInstance


def rank(inst: PBInstance, voter: str) -> dict[str, int]:
    v = inst.voters[inst.voter_index[voter]]
    return {c: t for t, e in enumerate(v.prefs.classes) for c in e}


def weakly_prefers(inst: PBInstance, voter: str, a: str, b: str) -> bool:
    r = rank(inst, voter)
    return r[a] <= r[b]


def jth_choice(inst: PBInstance, voter: str, j: int, reverse_ties: bool = False) -> str:
    """The j-th candidate after breaking ties (by input order, or reversed)."""
    r = rank(inst, voter)
    pos = inst.index
    sign = -1 if reverse_ties else 1
    order = sorted(r, key=lambda c: (r[c], sign * pos[c]))
    return order[min(j, len(order)) - 1]


def at_least_jth(inst: PBInstance, voter: str, j: int, reverse_ties: bool = False) -> frozenset[str]:
    if inst.m == 0:
        return frozenset()
    r = rank(inst, voter)
    pivot = r[jth_choice(inst, voter, j, reverse_ties)]
    return frozenset(c for c in r if r[c] <= pivot)


def solidly_supports(inst: PBInstance, voters: Iterable[str], cands: Iterable[str]) -> bool:
    cands = frozenset(cands)
    outside = [c.id for c in inst.candidates if c.id not in cands]
    for v in voters:
        r = rank(inst, v)
        if any(r[x] > r[y] for x in cands for y in outside):
            return False
    return True


def bar(inst: PBInstance, voters: Iterable[str], size: int) -> frozenset[str]:
    out: set[str] = set()
    for v in voters:
        out |= at_least_jth(inst, v, size)
    return frozenset(out)


def approvals(inst: PBInstance, voter: str) -> frozenset[str]:
    v = inst.voters[inst.voter_index[voter]]
    return frozenset(v.prefs.classes[0]) if v.prefs.classes else frozenset()


def cost(inst: PBInstance, cands: Iterable[str]) -> Fraction:
    by_id = {c.id: c.cost for c in inst.candidates}
    return sum((by_id[c] for c in cands), Fraction(0))


def entitlement(inst: PBInstance, voters: Iterable[str]) -> Fraction:
    by_id = {v.id: v.weight for v in inst.voters}
    return sum((by_id[v] for v in voters), Fraction(0)) * inst.limit / inst.n
