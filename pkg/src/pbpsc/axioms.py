"""Exact decision procedures, with witnesses, for the proportionality axioms.

Every check enumerates coalitions exhaustively. General-preference checks
walk solidly supported pairs ``(N', C')`` in the order
``(|C'|, |N'|, C' lexicographic, N' lexicographic)``, so the first
violation found is also the minimal witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator

from . import definitions as raw
from ._exact import fmt_rat
from .core import (
    Outcome,
    PBInstance,
    PreconditionError,
    SizeGuardError,
)
from .knapsack import max_knapsack

GUARD = 16

SATISFIED = "satisfied"
VIOLATED = "violated"


@dataclass(frozen=True)
class Witness:
    """Concrete tuple certifying a violation.

    ``values`` carries the sides of the violated inequality, named as in
    the report, e.g. ``spent`` (weight of the bar set inside W) and ``quota``.
    """

    axiom: str
    voters: tuple[str, ...]
    candidates: tuple[str, ...]
    bundle: tuple[str, ...] | None = None
    candidate: str | None = None
    level: int | None = None
    reason: str = "coalition"
    values: tuple[tuple[str, Fraction], ...] = ()

    def value(self, name: str) -> Fraction:
        return dict(self.values)[name]

    def to_dict(self) -> dict:
        out: dict = {"axiom": self.axiom, "reason": self.reason, "voters": list(self.voters),
                     "candidates": list(self.candidates)}
        if self.bundle is not None:
            out["bundle"] = list(self.bundle)
        if self.candidate is not None:
            out["candidate"] = self.candidate
        if self.level is not None:
            out["level"] = self.level
        out["values"] = {k: fmt_rat(v) for k, v in self.values}
        return out


@dataclass(frozen=True)
class Verdict:
    axiom: str
    witness: Witness | None = field(default=None)

    @property
    def satisfied(self) -> bool:
        return self.witness is None

    @property
    def status(self) -> str:
        return SATISFIED if self.witness is None else VIOLATED

    def to_dict(self) -> dict:
        out: dict = {"axiom": self.axiom, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        return out


# -- enumeration helpers ----------------------------------------------------


def _guard(inst: PBInstance, force: bool) -> None:
    if not force and (inst.n > GUARD or inst.m > GUARD):
        raise SizeGuardError(
            f"exhaustive search refused for n={inst.n}, m={inst.m} (limit {GUARD}); use force to override"
        )


def _bits(mask: int) -> list[int]:
    return [k for k in range(mask.bit_length()) if mask >> k & 1]


def _mask(positions: Iterable[int]) -> int:
    out = 0
    for k in positions:
        out |= 1 << k
    return out


def _subsets(universe: int, size: int) -> Iterator[int]:
    for combo in combinations(_bits(universe), size):
        yield _mask(combo)


def _solid_pairs(inst: PBInstance) -> Iterator[tuple[int, int]]:
    """Solidly supported pairs ``(C', N')`` in minimal-witness order."""
    if inst.m <= GUARD:
        table = inst.supporter_table
        support = table.__getitem__
    else:
        support = inst.supporters_mask
    by_size = [[_mask(c) for c in combinations(range(inst.m), s)] for s in range(inst.m + 1)]
    for sc in range(1, inst.m + 1):
        groups = [(cm, support(cm)) for cm in by_size[sc]]
        groups = [(cm, sup) for cm, sup in groups if sup]
        for sn in range(1, inst.n + 1):
            for cm, sup in groups:
                if sup.bit_count() >= sn:
                    for vm in _subsets(sup, sn):
                        yield cm, vm


def _voter_subsets(inst: PBInstance) -> Iterator[int]:
    for sn in range(1, inst.n + 1):
        for combo in combinations(range(inst.n), sn):
            yield _mask(combo)


def _outcome_mask(inst: PBInstance, W) -> int:
    if isinstance(W, Outcome):
        return inst.mask_of(W.selected)
    return inst.mask_of(inst.outcome(W).selected)


def _knap(inst: PBInstance, cmask: int, capacity: Fraction):
    return max_knapsack([(inst.candidates[k].id, inst.costs[k]) for k in _bits(cmask)], capacity)


# check_ipsc routes its two comparisons through these so the crosscheck
# mutation harness can flip them.
def _under(spent: Fraction, bound: Fraction) -> bool:
    return spent < bound


def _fits(total: Fraction, bound: Fraction) -> bool:
    return total <= bound


def _require_dichotomous(inst: PBInstance) -> None:
    if not inst.is_dichotomous:
        raise PreconditionError("this axiom needs dichotomous (approval) preferences")


def _require_committee(inst: PBInstance, wmask: int) -> int:
    if not inst.is_multiwinner:
        raise PreconditionError("this axiom needs a multi-winner instance (unit costs and weights, integer limit)")
    k = inst.limit.numerator
    if wmask.bit_count() != k:
        raise PreconditionError(f"committee must have exactly k={k} members, got {wmask.bit_count()}")
    return k


def _require_normalized(inst: PBInstance) -> int:
    _require_dichotomous(inst)
    if inst.limit.denominator != 1:
        raise PreconditionError("limit must be a positive integer")
    if inst.m and min(inst.costs) != 1:
        raise PreconditionError("the cheapest candidate must cost exactly 1")
    return inst.limit.numerator


def _approval_sets(inst: PBInstance, vm: int) -> tuple[int, int]:
    union, inter = 0, inst.full_mask
    for i in _bits(vm):
        a = inst.approval_mask(i)
        union |= a
        inter &= a
    return union, inter


# -- outcome-level predicates ------------------------------------------------


def check_exhaustive(inst: PBInstance, W, force: bool = False) -> Verdict:
    wmask = _outcome_mask(inst, W)
    spent = inst.cost_of(wmask)
    for k in range(inst.m):
        if not wmask >> k & 1 and spent + inst.costs[k] <= inst.limit:
            return Verdict("exhaustive", _not_exhaustive("exhaustive", inst, wmask, k))
    return Verdict("exhaustive")


def check_maxcost(inst: PBInstance, W, force: bool = False) -> Verdict:
    wmask = _outcome_mask(inst, W)
    best = max_knapsack([(c.id, c.cost) for c in inst.candidates], inst.limit)
    if inst.cost_of(wmask) < best.best_weight:
        return Verdict("maxcost", _not_max_cost("maxcost", inst, wmask, best))
    return Verdict("maxcost")


def _not_exhaustive(axiom: str, inst: PBInstance, wmask: int, k: int) -> Witness:
    spent = inst.cost_of(wmask)
    return Witness(
        axiom, inst.voter_ids_of(inst.all_voters_mask), inst.ids_of(inst.full_mask),
        candidate=inst.candidates[k].id, reason="not exhaustive",
        values=(("spent", spent), ("with_candidate", spent + inst.costs[k]), ("quota", inst.limit)),
    )


def _not_max_cost(axiom: str, inst: PBInstance, wmask: int, best) -> Witness:
    return Witness(
        axiom, inst.voter_ids_of(inst.all_voters_mask), inst.ids_of(inst.full_mask),
        bundle=best.best_set, reason="not maximal cost",
        values=(("spent", inst.cost_of(wmask)), ("bundle", best.best_weight), ("quota", inst.limit)),
    )


# -- general preferences ---------------------------------------------------------


def check_ipsc(inst: PBInstance, W, force: bool = False) -> Verdict:
    """Inclusion PSC.

    Violated when a coalition solidly supporting ``C'`` is below its quota
    on its bar set inside W, yet some unfunded member of ``C'`` would still
    fit within the quota once added to that spending.
    """
    _guard(inst, force)
    wmask = _outcome_mask(inst, W)
    for cm, vm in _solid_pairs(inst):
        got = inst.bar_mask(vm, cm.bit_count()) & wmask
        spent, q = inst.cost_of(got), inst.quota_of(vm)
        if not _under(spent, q):
            continue
        for k in _bits(cm & ~got):
            if _fits(spent + inst.costs[k], q):
                return Verdict("ipsc", Witness(
                    "ipsc", inst.voter_ids_of(vm), inst.ids_of(cm), candidate=inst.candidates[k].id,
                    values=(("spent", spent), ("with_candidate", spent + inst.costs[k]), ("quota", q)),
                ))
    return Verdict("ipsc")


def check_cpsc(inst: PBInstance, W, force: bool = False) -> Verdict:
    """Comparative PSC; the inner bundle search is an exact knapsack over ``C'``."""
    _guard(inst, force)
    wmask = _outcome_mask(inst, W)
    memo: dict[tuple[int, Fraction], object] = {}
    for cm, vm in _solid_pairs(inst):
        got = inst.bar_mask(vm, cm.bit_count()) & wmask
        spent, q = inst.cost_of(got), inst.quota_of(vm)
        if not spent < q:
            continue
        key = (cm, q)
        if key not in memo:
            memo[key] = _knap(inst, cm, q)
        best = memo[key]
        if spent < best.best_weight:
            return Verdict("cpsc", Witness(
                "cpsc", inst.voter_ids_of(vm), inst.ids_of(cm), bundle=best.best_set,
                values=(("spent", spent), ("bundle", best.best_weight), ("quota", q)),
            ))
    return Verdict("cpsc")


# -- approval ballots ------------------------------------------------------------


def check_ipsc_approval(inst: PBInstance, W, force: bool = False) -> Verdict:
    """IPSC via its approval-ballot characterization (exhaustive + coalition test)."""
    _require_dichotomous(inst)
    _guard(inst, force)
    wmask = _outcome_mask(inst, W)
    spent_all = inst.cost_of(wmask)
    for k in range(inst.m):
        if not wmask >> k & 1 and spent_all + inst.costs[k] <= inst.limit:
            return Verdict("ipsc-approval", _not_exhaustive("ipsc-approval", inst, wmask, k))
    for vm in _voter_subsets(inst):
        union, inter = _approval_sets(inst, vm)
        got = union & wmask
        spent, q = inst.cost_of(got), inst.quota_of(vm)
        if not spent < q:
            continue
        for k in _bits(inter & ~got):
            if spent + inst.costs[k] <= q:
                return Verdict("ipsc-approval", Witness(
                    "ipsc-approval", inst.voter_ids_of(vm), inst.ids_of(inter),
                    candidate=inst.candidates[k].id,
                    values=(("spent", spent), ("with_candidate", spent + inst.costs[k]), ("quota", q)),
                ))
    return Verdict("ipsc-approval")


def check_cpsc_approval(inst: PBInstance, W, force: bool = False) -> Verdict:
    """CPSC via its approval-ballot characterization (maximal cost + coalition test)."""
    _require_dichotomous(inst)
    _guard(inst, force)
    wmask = _outcome_mask(inst, W)
    best_all = max_knapsack([(c.id, c.cost) for c in inst.candidates], inst.limit)
    if inst.cost_of(wmask) < best_all.best_weight:
        return Verdict("cpsc-approval", _not_max_cost("cpsc-approval", inst, wmask, best_all))
    for vm in _voter_subsets(inst):
        union, inter = _approval_sets(inst, vm)
        spent, q = inst.cost_of(union & wmask), inst.quota_of(vm)
        best = _knap(inst, inter, q)
        if spent < best.best_weight:
            return Verdict("cpsc-approval", Witness(
                "cpsc-approval", inst.voter_ids_of(vm), inst.ids_of(inter), bundle=best.best_set,
                values=(("spent", spent), ("bundle", best.best_weight), ("quota", q)),
            ))
    return Verdict("cpsc-approval")


def check_bpjr_l(inst: PBInstance, W, force: bool = False) -> Verdict:
    """BPJR-L; needs approvals, cheapest cost 1 and an integer limit."""
    L = _require_normalized(inst)
    _guard(inst, force)
    wmask = _outcome_mask(inst, W)
    n = inst.n
    for vm in _voter_subsets(inst):
        size = vm.bit_count()
        union, inter = _approval_sets(inst, vm)
        spent = inst.cost_of(union & wmask)
        cap = Fraction(size * L, n)
        best = None
        # Both side conditions get harder as the level grows.
        for level in range(1, L + 1):
            if size * L < level * n or inst.cost_of(inter) < level:
                break
            best = best or _knap(inst, inter, cap)
            if spent < best.best_weight:
                return Verdict("bpjr-l", Witness(
                    "bpjr-l", inst.voter_ids_of(vm), inst.ids_of(inter), bundle=best.best_set, level=level,
                    values=(("spent", spent), ("bundle", best.best_weight), ("quota", cap)),
                ))
    return Verdict("bpjr-l")


def check_local_bpjr_l(inst: PBInstance, W, force: bool = False) -> Verdict:
    """Local-BPJR-L: no optimal level-bounded bundle of common approvals strictly extends W'."""
    L = _require_normalized(inst)
    _guard(inst, force)
    wmask = _outcome_mask(inst, W)
    n = inst.n
    for vm in _voter_subsets(inst):
        size = vm.bit_count()
        union, inter = _approval_sets(inst, vm)
        have = union & wmask
        if have & ~inter:
            continue
        for level in range(1, L + 1):
            if size * L < level * n:
                break
            optima = _argmax_bundles(inst, inter, Fraction(level))
            for opt in optima:
                if opt != have and opt & have == have:
                    return Verdict("local-bpjr-l", Witness(
                        "local-bpjr-l", inst.voter_ids_of(vm), inst.ids_of(inter), bundle=inst.ids_of(opt),
                        level=level, values=(("spent", inst.cost_of(have)), ("bundle", inst.cost_of(opt)),
                                             ("quota", Fraction(level))),
                    ))
    return Verdict("local-bpjr-l")


def _argmax_bundles(inst: PBInstance, universe: int, cap: Fraction) -> list[int]:
    best, out = Fraction(-1), []
    sub = universe
    while True:
        w = inst.cost_of(sub)
        if w <= cap:
            if w > best:
                best, out = w, [sub]
            elif w == best:
                out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & universe
    return sorted(out, key=_bits)


# -- multi-winner ------------------------------------------------------------------


def check_pjr(inst: PBInstance, W, force: bool = False) -> Verdict:
    _require_dichotomous(inst)
    wmask = _outcome_mask(inst, W)
    k = _require_committee(inst, wmask)
    _guard(inst, force)
    n = inst.n
    for vm in _voter_subsets(inst):
        size = vm.bit_count()
        union, inter = _approval_sets(inst, vm)
        hits = (union & wmask).bit_count()
        for level in range(1, k + 1):
            if size * k < level * n or inter.bit_count() < level:
                break
            if hits < level:
                return Verdict("pjr", Witness(
                    "pjr", inst.voter_ids_of(vm), inst.ids_of(inter), level=level,
                    values=(("spent", Fraction(hits)), ("quota", Fraction(level))),
                ))
    return Verdict("pjr")


def check_gen_psc(inst: PBInstance, W, force: bool = False) -> Verdict:
    wmask = _outcome_mask(inst, W)
    k = _require_committee(inst, wmask)
    _guard(inst, force)
    n = inst.n
    for cm, vm in _solid_pairs(inst):
        csize, size = cm.bit_count(), vm.bit_count()
        hits = (inst.bar_mask(vm, csize) & wmask).bit_count()
        for level in range(1, k + 1):
            if size * k < level * n:
                break
            if hits < min(level, csize):
                return Verdict("gen-psc", Witness(
                    "gen-psc", inst.voter_ids_of(vm), inst.ids_of(cm), level=level,
                    values=(("spent", Fraction(hits)), ("quota", Fraction(min(level, csize)))),
                ))
    return Verdict("gen-psc")


def check_cpsc_mw(inst: PBInstance, W, force: bool = False) -> Verdict:
    wmask = _outcome_mask(inst, W)
    k = _require_committee(inst, wmask)
    _guard(inst, force)
    n = inst.n
    for cm, vm in _solid_pairs(inst):
        csize = cm.bit_count()
        hits = (inst.bar_mask(vm, csize) & wmask).bit_count()
        room = min(csize, vm.bit_count() * k // n)
        if hits < room:
            bundle = _mask(_bits(cm)[:room])
            return Verdict("cpsc-mw", Witness(
                "cpsc-mw", inst.voter_ids_of(vm), inst.ids_of(cm), bundle=inst.ids_of(bundle),
                values=(("spent", Fraction(hits)), ("bundle", Fraction(room)),
                        ("quota", Fraction(vm.bit_count() * k, n))),
            ))
    return Verdict("cpsc-mw")


AXIOMS: dict[str, Callable[..., Verdict]] = {
    "exhaustive": check_exhaustive,
    "maxcost": check_maxcost,
    "ipsc": check_ipsc,
    "cpsc": check_cpsc,
    "ipsc-approval": check_ipsc_approval,
    "cpsc-approval": check_cpsc_approval,
    "bpjr-l": check_bpjr_l,
    "local-bpjr-l": check_local_bpjr_l,
    "pjr": check_pjr,
    "gen-psc": check_gen_psc,
    "cpsc-mw": check_cpsc_mw,
}

COMMITTEE_AXIOMS = frozenset({"pjr", "gen-psc", "cpsc-mw"})


def verify(inst: PBInstance, W, axiom: str, force: bool = False) -> Verdict:
    try:
        check = AXIOMS[axiom]
    except KeyError:
        raise PreconditionError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}") from None
    return check(inst, W, force=force)


# -- independent witness re-check ------------------------------------------------------


def confirm_witness(inst: PBInstance, W, witness: Witness) -> bool:
    """Re-derive a violation from the raw definitions, ignoring how it was found.

    Uses the literal relation-based sets of :mod:`pbpsc.definitions`, then
    checks that the numbers stored in the witness match the recomputation.
    """
    chosen = frozenset(W.selected if isinstance(W, Outcome) else W)
    tag, N1, C1 = witness.axiom, witness.voters, frozenset(witness.candidates)
    limit = inst.limit
    n = inst.n
    if witness.reason == "not exhaustive":
        c = witness.candidate
        spent = raw.cost(inst, chosen)
        ok = c not in chosen and spent + raw.cost(inst, [c]) <= limit
        return ok and _same(witness, spent=spent, quota=limit)
    if witness.reason == "not maximal cost":
        bundle = frozenset(witness.bundle)
        spent = raw.cost(inst, chosen)
        ok = raw.cost(inst, bundle) <= limit and spent < raw.cost(inst, bundle)
        return ok and _same(witness, spent=spent, bundle=raw.cost(inst, bundle))

    if tag in ("ipsc", "cpsc", "gen-psc", "cpsc-mw"):
        if not N1 or not C1 or not raw.solidly_supports(inst, N1, C1):
            return False
        got = raw.bar(inst, N1, len(C1)) & chosen
        q = raw.entitlement(inst, N1)
        if tag == "ipsc":
            c = witness.candidate
            spent = raw.cost(inst, got)
            ok = c in C1 and c not in got and spent < q and spent + raw.cost(inst, [c]) <= q
            return ok and _same(witness, spent=spent, quota=q)
        if tag == "cpsc":
            bundle = frozenset(witness.bundle)
            spent = raw.cost(inst, got)
            ok = bundle <= C1 and spent < q and spent < raw.cost(inst, bundle) <= q
            return ok and _same(witness, spent=spent, bundle=raw.cost(inst, bundle), quota=q)
        k = limit.numerator
        if tag == "gen-psc":
            level = witness.level
            ok = len(N1) * k >= level * n and len(got) < min(level, len(C1))
            return ok and _same(witness, spent=Fraction(len(got)))
        bundle = frozenset(witness.bundle)
        ok = bundle <= C1 and len(bundle) * n <= len(N1) * k and len(got) < len(bundle)
        return ok and _same(witness, spent=Fraction(len(got)))

    union = frozenset().union(*(raw.approvals(inst, v) for v in N1)) if N1 else frozenset()
    inter = frozenset.intersection(*(raw.approvals(inst, v) for v in N1)) if N1 else frozenset()
    if not N1 or inter != C1:
        return False
    have = union & chosen
    spent = raw.cost(inst, have)
    q = raw.entitlement(inst, N1)
    if tag == "ipsc-approval":
        c = witness.candidate
        ok = c in inter and c not in have and spent < q and spent + raw.cost(inst, [c]) <= q
        return ok and _same(witness, spent=spent, quota=q)
    if tag == "cpsc-approval":
        bundle = frozenset(witness.bundle)
        ok = bundle <= inter and raw.cost(inst, bundle) <= q and spent < raw.cost(inst, bundle)
        return ok and _same(witness, spent=spent, bundle=raw.cost(inst, bundle))
    if tag == "bpjr-l":
        level, bundle = witness.level, frozenset(witness.bundle)
        cap = Fraction(len(N1)) * limit / n
        ok = (
            len(N1) * limit >= level * n
            and raw.cost(inst, inter) >= level
            and bundle <= inter
            and raw.cost(inst, bundle) <= cap
            and spent < raw.cost(inst, bundle)
            and raw.cost(inst, bundle) == _brute_best(inst, inter, cap)
        )
        return ok and _same(witness, spent=spent)
    if tag == "local-bpjr-l":
        level, bundle = witness.level, frozenset(witness.bundle)
        ok = (
            len(N1) * limit >= level * n
            and bundle <= inter
            and have < bundle
            and raw.cost(inst, bundle) <= level
            and raw.cost(inst, bundle) == _brute_best(inst, inter, Fraction(level))
        )
        return ok and _same(witness, spent=spent)
    if tag == "pjr":
        level = witness.level
        ok = len(N1) * limit >= level * n and len(inter) >= level and len(have) < level
        return ok and _same(witness, spent=Fraction(len(have)))
    return False


def _brute_best(inst: PBInstance, pool: frozenset[str], cap: Fraction) -> Fraction:
    items = sorted(pool)
    best = Fraction(0)
    for r in range(len(items) + 1):
        for combo in combinations(items, r):
            w = raw.cost(inst, combo)
            if best < w <= cap:
                best = w
    return best


def _same(witness: Witness, **expected: Fraction) -> bool:
    stored = dict(witness.values)
    return all(stored.get(name) == value for name, value in expected.items())


__all__ = [
    "AXIOMS",
    "COMMITTEE_AXIOMS",
    "Verdict",
    "Witness",
    "check_bpjr_l",
    "check_cpsc",
    "check_cpsc_approval",
    "check_cpsc_mw",
    "check_exhaustive",
    "check_gen_psc",
    "check_ipsc",
    "check_ipsc_approval",
    "check_local_bpjr_l",
    "check_maxcost",
    "check_pjr",
    "confirm_witness",
    "verify",
]
