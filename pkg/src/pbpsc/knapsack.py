"""Exact 0/1 max-weight knapsack (value == weight) over rational costs."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ._exact import to_rat

# Beyond this many items plain enumeration is too slow in pure Python.
ENUMERATION_LIMIT = 16


@dataclass(frozen=True)
class KnapsackResult:
    best_weight: Fraction
    best_set: tuple[str, ...]


def max_knapsack(items: Mapping[str, object] | Sequence[tuple[str, object]], capacity) -> KnapsackResult:
    """Heaviest subset of ``items`` whose total cost fits in ``capacity``.

    Ties between optimal subsets go to the lexicographically smallest tuple
    of item positions, so ``{a:3, b:2, c:2, d:2}`` at capacity 4 yields
    ``(b, c)``.
    """
    pairs = list(items.items()) if isinstance(items, Mapping) else list(items)
    ids = [str(k) for k, _ in pairs]
    costs = [to_rat(v) for _, v in pairs]
    if any(c <= 0 for c in costs):
        raise ValueError("knapsack costs must be positive")
    cap = to_rat(capacity)
    if len(ids) <= ENUMERATION_LIMIT:
        mask = _enumerate(costs, cap)
    else:
        mask = _branch_and_bound(costs, cap)
    chosen = tuple(ids[k] for k in range(len(ids)) if mask >> k & 1)
    return KnapsackResult(sum((costs[k] for k in range(len(ids)) if mask >> k & 1), Fraction(0)), chosen)


def _lex_key(mask: int) -> tuple[int, ...]:
    return tuple(k for k in range(mask.bit_length()) if mask >> k & 1)


def _enumerate(costs: list[Fraction], cap: Fraction) -> int:
    m = len(costs)
    table = [Fraction(0)] * (1 << m)
    best_w, best = Fraction(0), 0
    for mask in range(1, 1 << m):
        low = mask & -mask
        table[mask] = table[mask ^ low] + costs[low.bit_length() - 1]
        w = table[mask]
        if w > cap:
            continue
        if w > best_w or (w == best_w and _lex_key(mask) < _lex_key(best)):
            best_w, best = w, mask
    return best


def _branch_and_bound(costs: list[Fraction], cap: Fraction) -> int:
    # Depth-first, include-before-exclude in item order: the first optimum
    # reached is the lexicographically smallest one, so equal bounds prune.
    m = len(costs)
    suffix = [Fraction(0)] * (m + 1)
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] + costs[k]
    best_w = Fraction(-1)
    best = 0
    stack = [(0, Fraction(0), 0)]
    while stack:
        k, w, mask = stack.pop()
        if w > best_w:
            best_w, best = w, mask
            if best_w == cap:
                break
        if k == m or w + suffix[k] <= best_w:
            continue
        stack.append((k + 1, w, mask))
        if w + costs[k] <= cap:
            stack.append((k + 1, w + costs[k], mask | 1 << k))
    return best
