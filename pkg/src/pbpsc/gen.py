"""Seeded random instance generation.

No floats are drawn: probabilities are rationals and every coin is a
``randrange`` against their denominator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from ._exact import to_rat
from .core import PBInstance, PreconditionError

COST_MODELS = ("unit", "uniform")
PREF_MODELS = ("strict", "dichotomous", "weak")
WEIGHT_MODELS = ("unit", "random")


@dataclass(frozen=True)
class GenParams:
    seed: int
    n: int
    m: int
    costs: str = "unit"
    prefs: str = "strict"
    p: Fraction = Fraction(1, 2)
    limit: Fraction | None = None
    weights: str = "unit"
    grid: int = 10

    def __post_init__(self):
        object.__setattr__(self, "p", to_rat(self.p))
        if self.limit is not None:
            object.__setattr__(self, "limit", to_rat(self.limit))
        if self.n < 1 or self.m < 0:
            raise PreconditionError("need n >= 1 voters and m >= 0 candidates")
        if self.costs not in COST_MODELS:
            raise PreconditionError(f"cost model must be one of {COST_MODELS}")
        if self.prefs not in PREF_MODELS:
            raise PreconditionError(f"preference model must be one of {PREF_MODELS}")
        if self.weights not in WEIGHT_MODELS:
            raise PreconditionError(f"weight model must be one of {WEIGHT_MODELS}")
        if not 0 <= self.p <= 1:
            raise PreconditionError("p must lie in [0, 1]")
        if self.limit is not None and self.limit <= 0:
            raise PreconditionError("limit must be positive")
        if self.grid < 1:
            raise PreconditionError("grid must be positive")


def _coin(rng: random.Random, p: Fraction) -> bool:
    return rng.randrange(p.denominator) < p.numerator


def generate(params: GenParams) -> PBInstance:
    """Same params, same instance, on every platform."""
    rng = random.Random(params.seed)
    names = [f"c{k + 1}" for k in range(params.m)]
    if params.limit is not None:
        limit = params.limit
    elif params.costs == "unit":
        limit = Fraction(rng.randint(1, max(1, params.m)))
    else:
        limit = Fraction(rng.randint(2, max(2, params.m)))

    if params.costs == "unit":
        costs = [Fraction(1)] * params.m
    else:
        # Grid points in [1, L].
        top = int(limit * params.grid)
        lo = params.grid
        costs = [Fraction(rng.randint(lo, max(lo, top)), params.grid) for _ in names]

    voters = []
    for i in range(params.n):
        voters.append((str(i + 1), Fraction(1), _ranking(rng, params, names)))
    if params.weights == "random":
        raw = [rng.randint(1, 4) for _ in voters]
        total = sum(raw)
        voters = [(vid, Fraction(r * params.n, total), prefs) for (vid, _, prefs), r in zip(voters, raw)]
    return PBInstance.build(list(zip(names, costs)), voters, limit)


def _ranking(rng: random.Random, params: GenParams, names: list[str]) -> list[list[str]]:
    if params.prefs == "dichotomous":
        approved = [c for c in names if _coin(rng, params.p)]
        return [approved] if approved else []
    order = names[:]
    rng.shuffle(order)
    if params.prefs == "strict":
        return [[c] for c in order]
    classes = 1
    while classes < len(order) and _coin(rng, params.p):
        classes += 1
    cuts = sorted(rng.sample(range(1, len(order)), classes - 1)) if classes > 1 else []
    bounds = [0, *cuts, len(order)]
    return [order[a:b] for a, b in zip(bounds, bounds[1:])]


FAMILIES = ("pb", "mw", "approval-int")


def mixed_instance(seed: int, n_max: int, m_max: int, family: str = "pb") -> PBInstance:
    """Instance for the property suites.

    ``pb``: any preference model, unit or rational costs, unit or random weights.
    ``mw``: multi-winner (unit costs and weights, integer k <= m).
    ``approval-int``: approvals, integer costs with cheapest exactly 1, unit
    weights, integer limit.
    """
    rng = random.Random(f"{family}:{seed}")
    n = rng.randint(1, n_max)
    m = rng.randint(1, m_max)
    prefs = rng.choice(PREF_MODELS)
    p = Fraction(rng.randint(1, 3), 4)
    sub = rng.randrange(2**32)
    if family == "mw":
        k = rng.randint(1, m)
        return generate(GenParams(sub, n, m, "unit", prefs, p, Fraction(k)))
    if family == "approval-int":
        base = generate(GenParams(sub, n, m, "unit", "dichotomous", p))
        costs = [rng.randint(1, 3) for _ in range(m)]
        costs[rng.randrange(m)] = 1
        limit = rng.randint(1, sum(costs))
        voters = [(v.id, 1, v.prefs.classes) for v in base.voters]
        return PBInstance.build(list(zip(base.index, costs)), voters, limit)
    if family != "pb":
        raise PreconditionError(f"unknown family {family!r}")
    return generate(GenParams(sub, n, m, rng.choice(COST_MODELS), prefs, p, weights=rng.choice(WEIGHT_MODELS)))
