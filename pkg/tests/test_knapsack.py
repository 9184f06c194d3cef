from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbpsc.knapsack import ENUMERATION_LIMIT, _branch_and_bound, _enumerate, max_knapsack
from pbpsc.oracles import enumerate_knapsack


def brute(items: dict, cap):
    """(best weight, lexicographically first optimal index tuple)."""
    names = list(items)
    best = (Fraction(-1), ())
    for r in range(len(names) + 1):
        for combo in combinations(range(len(names)), r):
            w = sum((items[names[k]] for k in combo), Fraction(0))
            if w <= cap and (w > best[0] or (w == best[0] and combo < best[1])):
                best = (w, combo)
    return best[0], tuple(names[k] for k in best[1])


def test_one_voter_capacity_four():
    res = max_knapsack({"a": 3, "b": 2, "c": 2, "d": 2}, 4)
    assert res.best_weight == 4 and res.best_set == ("b", "c")


def test_empty():
    res = max_knapsack({}, 5)
    assert res.best_weight == 0 and res.best_set == ()


def test_rational_costs():
    items = {"a": Fraction(1), "b": Fraction(9, 10), "c": Fraction(1)}
    assert enumerate_knapsack(items, 2) == 2
    res = max_knapsack(items, 2)
    assert (res.best_weight, res.best_set) == (2, ("a", "c"))


def test_nothing_fits():
    assert max_knapsack({"a": 5}, 1).best_set == ()


def test_refuses_float():
    with pytest.raises(TypeError):
        max_knapsack({"a": 0.5}, 1)


weights = st.fractions(min_value=Fraction(1, 6), max_value=10, max_denominator=6)


@settings(max_examples=300, deadline=None)
@given(st.lists(weights, max_size=10), st.fractions(min_value=0, max_value=30, max_denominator=4))
def test_both_paths_match_brute_force(ws, cap):
    items = {f"i{k}": w for k, w in enumerate(ws)}
    want_w, want_set = brute(items, cap)
    res = max_knapsack(items, cap)
    assert (res.best_weight, res.best_set) == (want_w, want_set)
    e, b = _enumerate(list(ws), cap), _branch_and_bound(list(ws), cap)
    # Same optimum and the same lexicographic tie-break on either path.
    assert e == b


def test_large_instance_uses_branch_and_bound():
    ws = [Fraction(k % 7 + 1, k % 3 + 1) for k in range(ENUMERATION_LIMIT + 6)]
    items = {f"i{k:02d}": w for k, w in enumerate(ws)}
    cap = sum(ws) / 3
    res = max_knapsack(items, cap)
    assert res.best_weight <= cap
    assert sum((items[c] for c in res.best_set), Fraction(0)) == res.best_weight
    # Integer-scaled DP as an independent reference.
    scale = 6
    ints = [int(w * scale) for w in ws]
    reach = {0}
    for w in ints:
        reach |= {r + w for r in reach if r + w <= cap * scale}
    assert res.best_weight == Fraction(max(reach), scale)
