"""PB Expanding Approvals Rule with configurable tie-breaking and a full trace."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from ._exact import fmt_rat
from .core import Outcome, PBInstance, PreconditionError


class Selection(str, Enum):
    LEX = "lex"
    MIN_COST = "min-cost"
    MAX_SUPPORT = "max-support"


class Reweighting(str, Enum):
    PROPORTIONAL = "proportional"
    LEX_DEPLETION = "lex-depletion"


@dataclass(frozen=True)
class EarConfig:
    selection: Selection = Selection.LEX
    reweighting: Reweighting = Reweighting.PROPORTIONAL

    def __post_init__(self):
        object.__setattr__(self, "selection", Selection(self.selection))
        object.__setattr__(self, "reweighting", Reweighting(self.reweighting))


@dataclass(frozen=True)
class EarStep:
    level: int
    support: tuple[tuple[str, Fraction], ...]
    threshold: tuple[tuple[str, Fraction], ...]
    eligible: tuple[str, ...]
    chosen: str | None = None
    payers: tuple[str, ...] = ()
    deductions: tuple[tuple[str, Fraction], ...] = ()

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "support": {c: fmt_rat(v) for c, v in self.support},
            "threshold": {c: fmt_rat(v) for c, v in self.threshold},
            "eligible": list(self.eligible),
            "chosen": self.chosen,
            "payers": list(self.payers),
            "deductions": {v: fmt_rat(d) for v, d in self.deductions},
        }


@dataclass(frozen=True)
class EarTrace:
    steps: tuple[EarStep, ...] = field(default_factory=tuple)

    @property
    def selections(self) -> tuple[EarStep, ...]:
        return tuple(s for s in self.steps if s.chosen is not None)

    def to_json(self) -> str:
        return json.dumps({"steps": [s.to_dict() for s in self.steps]}, indent=2, ensure_ascii=False) + "\n"


def support_of(inst: PBInstance, residual: Mapping[str, Fraction] | Sequence[Fraction], j: int, c: str) -> Fraction:
    """Residual weight of voters whose rank-``j`` weak-preference set contains ``c``."""
    if isinstance(residual, Mapping):
        residual = [residual[v.id] for v in inst.voters]
    k = inst.index[c]
    return sum((b for i, b in enumerate(residual) if inst.pref_mask(i, j) >> k & 1), Fraction(0))


def pb_ear(inst: PBInstance, cfg: EarConfig | None = None) -> tuple[Outcome, EarTrace]:
    """Run PB-EAR.

    Rank level ``j`` starts at 1. At each pass the candidates whose weighted
    support at level ``j`` reaches ``n * w(c) / L`` are eligible; if none is,
    ``j`` goes up, otherwise one is funded and its supporters at that level
    lose exactly ``n * w(c) / L`` weight in total. The loop runs while some
    unfunded candidate still fits the remaining budget, so the result is
    exhaustive.
    """
    cfg = cfg or EarConfig()
    n, m, limit = inst.n, inst.m, inst.limit
    costs = inst.costs
    ids = [c.id for c in inst.candidates]
    vids = [v.id for v in inst.voters]
    residual = list(inst.weights)
    threshold = [n * w / limit for w in costs]
    chosen_mask = 0
    spent = Fraction(0)
    j = 1
    steps: list[EarStep] = []

    def open_candidates() -> list[int]:
        return [k for k in range(m) if not chosen_mask >> k & 1]

    while any(spent + costs[k] <= limit for k in open_candidates()):
        levels = [inst.pref_mask(i, j) for i in range(n)]
        unfunded = open_candidates()
        support = {
            k: sum((residual[i] for i in range(n) if levels[i] >> k & 1), Fraction(0)) for k in unfunded
        }
        eligible = [k for k in unfunded if support[k] >= threshold[k]]
        record = dict(
            level=j,
            support=tuple((ids[k], support[k]) for k in unfunded),
            threshold=tuple((ids[k], threshold[k]) for k in unfunded),
            eligible=tuple(ids[k] for k in eligible),
        )
        if not eligible:
            steps.append(EarStep(**record))
            j += 1
            if j > m + 1:
                raise AssertionError("rank level exceeded m + 1")
            continue

        pick = _select(cfg.selection, eligible, costs, support)
        if spent + costs[pick] > limit:
            raise AssertionError("threshold admitted a candidate that does not fit")
        payers = [i for i in range(n) if levels[i] >> pick & 1]
        cuts = _deductions(cfg.reweighting, payers, residual, threshold[pick])
        for i, d in cuts:
            residual[i] -= d
            if residual[i] < 0:
                raise AssertionError("voter weight went negative")
        chosen_mask |= 1 << pick
        spent += costs[pick]
        steps.append(
            EarStep(
                **record,
                chosen=ids[pick],
                payers=tuple(vids[i] for i in payers),
                deductions=tuple((vids[i], d) for i, d in cuts),
            )
        )
    return Outcome(inst.ids_of(chosen_mask), spent), EarTrace(tuple(steps))


def _select(rule: Selection, eligible: list[int], costs, support) -> int:
    if rule is Selection.LEX:
        return eligible[0]
    if rule is Selection.MIN_COST:
        return min(eligible, key=lambda k: (costs[k], k))
    if rule is Selection.MAX_SUPPORT:
        return min(eligible, key=lambda k: (-support[k], k))
    raise PreconditionError(f"unknown selection rule {rule}")


def _deductions(rule: Reweighting, payers: list[int], residual: list[Fraction], due: Fraction):
    pool = sum((residual[i] for i in payers), Fraction(0))
    if pool < due:
        raise AssertionError("supporters cannot cover the charge")
    if rule is Reweighting.PROPORTIONAL:
        return [(i, residual[i] * due / pool) for i in payers]
    out = []
    left = due
    for i in payers:
        take = min(residual[i], left)
        out.append((i, take))
        left -= take
    return out
