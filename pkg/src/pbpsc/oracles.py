"""Brute-force ground truth: feasible-outcome enumeration, axiom search and
definition-level IPSC/CPSC predicates.

The ``Definitional`` predicates deliberately avoid the verifiers' shortcuts
(supporter tables, prefix masks, knapsack for the inner bundle); they loop
over every voter set, every candidate set and every bundle, so agreement
with :mod:`pbpsc.axioms` is a genuine double-entry check.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterator

from . import definitions as raw
from .axioms import COMMITTEE_AXIOMS, verify
from ._exact import to_rat
from .core import Outcome, PBInstance, SizeGuardError
from .knapsack import KnapsackResult, max_knapsack

OUTCOME_GUARD = 20

__all__ = [
    "Definitional",
    "KnapsackResult",
    "cpsc_exists",
    "enumerate_feasible_outcomes",
    "find_outcomes",
    "max_knapsack",
]


def enumerate_feasible_outcomes(inst: PBInstance, force: bool = False) -> Iterator[Outcome]:
    """Every W with w(W) <= L, in lexicographic order of position tuples."""
    if inst.m > OUTCOME_GUARD and not force:
        raise SizeGuardError(f"refusing to enumerate 2^{inst.m} outcomes (limit m <= {OUTCOME_GUARD})")
    ids = [c.id for c in inst.candidates]
    costs = inst.costs
    limit = inst.limit

    def walk(start: int, chosen: list[int], spent: Fraction) -> Iterator[Outcome]:
        yield Outcome(tuple(ids[k] for k in chosen), spent)
        for k in range(start, inst.m):
            if spent + costs[k] <= limit:
                chosen.append(k)
                yield from walk(k + 1, chosen, spent + costs[k])
                chosen.pop()

    yield from walk(0, [], Fraction(0))


def find_outcomes(inst: PBInstance, axiom: str, first: bool = False, force: bool = False) -> list[Outcome]:
    """All feasible outcomes the verifier for ``axiom`` accepts.

    Committee axioms only look at outcomes of size exactly k.
    """
    committee = axiom in COMMITTEE_AXIOMS
    found = []
    for W in enumerate_feasible_outcomes(inst, force=force):
        if committee and len(W) != inst.limit:
            continue
        if verify(inst, W, axiom, force=force).satisfied:
            found.append(W)
            if first:
                break
    return found


def cpsc_exists(inst: PBInstance, force: bool = False) -> Outcome | None:
    hits = find_outcomes(inst, "cpsc", first=True, force=force)
    return hits[0] if hits else None


class Definitional:
    """IPSC / CPSC / exhaustive / maximal-cost evaluated straight from the definitions."""

    def __init__(self, inst: PBInstance):
        self.inst = inst
        self.voters = [v.id for v in inst.voters]
        self.cands = [c.id for c in inst.candidates]
        self.candidate_sets = [
            frozenset(combo) for r in range(1, inst.m + 1) for combo in combinations(self.cands, r)
        ]
        self.voter_sets = [
            frozenset(combo) for r in range(1, inst.n + 1) for combo in combinations(self.voters, r)
        ]
        self.solid = {
            cs: frozenset(v for v in self.voters if raw.solidly_supports(inst, [v], cs))
            for cs in self.candidate_sets
        }
        # Ties broken the opposite way from the verifiers' reading on purpose.
        self.upper = {
            (v, j): raw.at_least_jth(inst, v, j, reverse_ties=True)
            for v in self.voters
            for j in range(1, inst.m + 1)
        }
        self.cost = {c.id: c.cost for c in inst.candidates}
        self.weight = {v.id: v.weight for v in inst.voters}

    def _w(self, cands) -> Fraction:
        return sum((self.cost[c] for c in cands), Fraction(0))

    def _coalitions(self):
        inst = self.inst
        for cs in self.candidate_sets:
            backers = self.solid[cs]
            for vs in self.voter_sets:
                if vs <= backers:
                    bar = frozenset().union(*(self.upper[v, len(cs)] for v in vs))
                    q = sum((self.weight[v] for v in vs), Fraction(0)) * inst.limit / inst.n
                    yield cs, vs, bar, q

    def exhaustive(self, W) -> bool:
        chosen = frozenset(W)
        spent = self._w(chosen)
        return all(spent + self.cost[c] > self.inst.limit for c in self.cands if c not in chosen)

    def maxcost(self, W) -> bool:
        spent = self._w(W)
        for r in range(1, self.inst.m + 1):
            for combo in combinations(self.cands, r):
                if spent < self._w(combo) <= self.inst.limit:
                    return False
        return True

    def ipsc(self, W) -> bool:
        chosen = frozenset(W)
        for cs, vs, bar, q in self._coalitions():
            got = bar & chosen
            spent = self._w(got)
            if spent < q and any(spent + self.cost[c] <= q for c in cs - got):
                return False
        return True

    def cpsc(self, W) -> bool:
        chosen = frozenset(W)
        for cs, vs, bar, q in self._coalitions():
            got = bar & chosen
            spent = self._w(got)
            if not spent < q:
                continue
            members = sorted(cs)
            for r in range(1, len(members) + 1):
                for bundle in combinations(members, r):
                    if spent < self._w(bundle) <= q:
                        return False
        return True


def enumerate_knapsack(items: dict[str, Fraction], capacity) -> Fraction:
    """Best weight by plain subset enumeration (reference for :func:`max_knapsack`)."""
    names = list(items)
    best = Fraction(0)
    cap = to_rat(capacity)
    for r in range(len(names) + 1):
        for combo in combinations(names, r):
            w = sum((items[c] for c in combo), Fraction(0))
            if best < w <= cap:
                best = w
    return best
