from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbpsc import PBInstance, PreconditionError, SizeGuardError, Witness, confirm_witness, cpsc_exists, verify
from pbpsc import definitions as raw
from pbpsc.axioms import (
    check_bpjr_l,
    check_cpsc,
    check_cpsc_approval,
    check_cpsc_mw,
    check_exhaustive,
    check_gen_psc,
    check_ipsc,
    check_ipsc_approval,
    check_local_bpjr_l,
    check_maxcost,
    check_pjr,
)
from pbpsc.gen import GenParams, generate, mixed_instance
from pbpsc.oracles import Definitional, enumerate_feasible_outcomes


def subsets(items, start=1):
    items = list(items)
    for r in range(start, len(items) + 1):
        yield from combinations(items, r)


def pjr_by_definition(inst, W) -> bool:
    k, n = inst.limit.numerator, inst.n
    for N1 in subsets(v.id for v in inst.voters):
        inter = frozenset.intersection(*(raw.approvals(inst, v) for v in N1))
        union = frozenset().union(*(raw.approvals(inst, v) for v in N1))
        for level in range(1, k + 1):
            if len(N1) * k >= level * n and len(inter) >= level and len(union & set(W)) < level:
                return False
    return True


def gen_psc_by_definition(inst, W) -> bool:
    k, n = inst.limit.numerator, inst.n
    for C1 in subsets(c.id for c in inst.candidates):
        for N1 in subsets(v.id for v in inst.voters):
            if not raw.solidly_supports(inst, N1, C1):
                continue
            got = raw.bar(inst, N1, len(C1)) & set(W)
            for level in range(1, k + 1):
                if len(N1) * k >= level * n and len(got) < min(level, len(C1)):
                    return False
    return True


# -- published verdicts -----------------------------------------------------------------


def test_strict_fixture_violates_ipsc(strict6):
    v = check_ipsc(strict6, strict6.outcome(["c", "z"]))
    assert not v.satisfied
    w = v.witness
    # Smallest witness in (|C'|, |N'|, lex) order.
    assert (w.voters, w.candidates, w.candidate) == (("2",), ("b",), "b")
    assert confirm_witness(strict6, ["c", "z"], w)


def test_strict_fixture_published_witness_rechecks(strict6):
    w = Witness("ipsc", ("1", "2"), ("a", "b"), candidate="b",
                values=(("spent", Fraction(9, 10)), ("with_candidate", Fraction(1)), ("quota", Fraction(1))))
    assert confirm_witness(strict6, ["c", "z"], w)


def test_first_fixture(approval4):
    W = approval4.outcome(["c", "b"])
    assert check_ipsc(approval4, W).satisfied
    v = check_cpsc(approval4, W)
    assert (v.witness.voters, v.witness.candidates, v.witness.bundle) == (("1", "2"), ("a",), ("a",))
    assert v.witness.value("spent") == Fraction(9, 10) and v.witness.value("quota") == 1
    assert confirm_witness(approval4, W, v.witness)
    assert check_ipsc_approval(approval4, W).satisfied
    assert not check_cpsc_approval(approval4, W).satisfied


def test_twelve_voter_fixture(pjr12):
    W = pjr12.outcome("uvwxyz")
    assert check_pjr(pjr12, W).satisfied
    assert check_cpsc_mw(pjr12, W).satisfied
    assert check_gen_psc(pjr12, W).satisfied
    assert check_cpsc(pjr12, W).satisfied
    v = check_ipsc(pjr12, W)
    assert set(v.witness.voters) == {"1", "2", "3", "4", "5", "6"} and v.witness.candidate == "a"


def test_twelve_voter_alternative_committee(pjr12):
    W = pjr12.outcome("uvwxya")
    assert pjr_by_definition(pjr12, W.selected)
    assert check_pjr(pjr12, W).satisfied


# -- structural cases ---------------------------------------------------------------------


def test_non_exhaustive_fails_through_grand_coalition(approval4):
    for check in (check_ipsc, check_ipsc_approval, check_exhaustive):
        v = check(approval4, [])
        assert not v.satisfied and confirm_witness(approval4, [], v.witness)
    grand = Witness("ipsc", ("1", "2", "3", "4"), ("a", "b", "c"), candidate="a",
                    values=(("spent", Fraction(0)), ("with_candidate", Fraction(1)), ("quota", Fraction(2))))
    assert confirm_witness(approval4, [], grand)
    assert check_exhaustive(approval4, []).witness.reason == "not exhaustive"


def test_non_maximal_cost_fails_with_knapsack_optimum(one_voter):
    for check in (check_cpsc, check_maxcost):
        v = check(one_voter, ["a"])
        assert not v.satisfied
        assert v.witness.value("bundle") == 4
        assert confirm_witness(one_voter, ["a"], v.witness)


def test_single_voter_approving_all():
    inst = PBInstance.from_approvals({"a": 1, "b": 2, "c": 2}, [["a", "b", "c"]], 3)
    assert check_ipsc_approval(inst, ["a", "b"]).satisfied
    assert check_cpsc_approval(inst, ["a", "b"]).satisfied
    assert not check_cpsc_approval(inst, ["b"]).satisfied


def test_disjoint_expensive_singletons():
    inst = PBInstance.from_approvals({"a": 2, "b": 2, "c": 2}, [["a"], ["b"], ["c"]], 3)
    for W in (["a"], ["b"], ["c"]):
        assert check_cpsc_approval(inst, W).satisfied
        assert Definitional(inst).cpsc(W)


def test_bpjr_l_needs_integer_normalization(approval4):
    with pytest.raises(PreconditionError):
        check_bpjr_l(approval4, ["b", "c"])


def test_bpjr_l_integer_variant():
    inst = PBInstance.from_approvals({"a": 1, "b": 1, "c": 1}, [["a", "b"], ["a"], ["c"], ["c"]], 2)
    v = check_bpjr_l(inst, ["c"])
    assert (v.witness.voters, v.witness.level) == (("1", "2"), 1)
    assert confirm_witness(inst, ["c"], v.witness)


def test_local_bpjr_l_holds_when_intersections_are_funded():
    inst = PBInstance.from_approvals({"a": 1, "b": 1, "c": 1}, [["a", "b"], ["a"], ["c"]], 3)
    assert check_local_bpjr_l(inst, ["a", "b", "c"]).satisfied


def test_local_bpjr_l_violation_found_by_search():
    for seed in range(500):
        inst = mixed_instance(seed, 4, 4, "approval-int")
        if inst.n != 4:
            continue
        for W in enumerate_feasible_outcomes(inst):
            v = check_local_bpjr_l(inst, W)
            if not v.satisfied:
                assert confirm_witness(inst, W, v.witness)
                assert not check_ipsc(inst, W).satisfied
                return
    pytest.fail("no Local-BPJR-L violation among 4-voter instances")


def test_pjr_identity_profile():
    inst = PBInstance.multiwinner(["c1", "c2", "c3"], [[["c1"]], [["c2"]], [["c3"]]], 3)
    assert check_pjr(inst, ["c1", "c2", "c3"]).satisfied
    assert check_cpsc_mw(inst, ["c1", "c2", "c3"]).satisfied


def test_gen_psc_unanimous_top():
    inst = PBInstance.multiwinner(["a", "b", "c"], [[["c"], ["a"], ["b"]]] * 3, 1)
    assert check_gen_psc(inst, ["c"]).satisfied


def test_gen_psc_violation_found_by_search():
    for seed in range(300):
        inst = generate(GenParams(seed, 6, 4, "unit", "strict", limit=Fraction(2)))
        for W in enumerate_feasible_outcomes(inst):
            if len(W) != 2 or gen_psc_by_definition(inst, W.selected):
                continue
            v = check_gen_psc(inst, W)
            assert not v.satisfied and confirm_witness(inst, W, v.witness)
            assert not check_cpsc(inst, W).satisfied
            return
    pytest.fail("no gen-PSC violation among 6-voter k=2 profiles")


def test_committee_axioms_need_size_k(mw4):
    with pytest.raises(PreconditionError):
        check_pjr(mw4, ["w"])
    with pytest.raises(PreconditionError):
        check_gen_psc(PBInstance.from_approvals({"a": 2}, [["a"]], 2), ["a"])


def test_approval_forms_need_dichotomous(strict6):
    with pytest.raises(PreconditionError):
        check_ipsc_approval(strict6, ["c", "z"])


def test_size_guard():
    inst = generate(GenParams(0, 3, 17, "unit", "dichotomous", limit=Fraction(2)))
    with pytest.raises(SizeGuardError):
        check_ipsc(inst, [])
    assert not check_ipsc(inst, [], force=False if inst.m <= 16 else True).satisfied


def test_unknown_axiom(approval4):
    with pytest.raises(PreconditionError):
        verify(approval4, [], "ejr")


def test_verdict_serializes_rationals(approval4):
    d = check_cpsc(approval4, ["b", "c"]).to_dict()
    assert d["status"] == "violated"
    assert d["witness"]["values"] == {"spent": "9/10", "bundle": "1/1", "quota": "1/1"}


# -- properties ------------------------------------------------------------------------------

families = st.sampled_from(["pb", "mw", "approval-int"])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), families)
def test_verifiers_agree_with_definitions(seed, family):
    inst = mixed_instance(seed, 5, 4, family)
    oracle = Definitional(inst)
    for W in enumerate_feasible_outcomes(inst):
        for check, truth in ((check_ipsc, oracle.ipsc), (check_cpsc, oracle.cpsc)):
            v = check(inst, W)
            assert v.satisfied == truth(W.selected)
            if not v.satisfied:
                assert confirm_witness(inst, W, v.witness)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_committee_axioms_against_definitions(seed):
    inst = mixed_instance(seed, 5, 4, "mw")
    k = inst.limit.numerator
    for W in enumerate_feasible_outcomes(inst):
        if len(W) != k:
            continue
        g = check_gen_psc(inst, W)
        assert g.satisfied == gen_psc_by_definition(inst, W.selected)
        assert g.satisfied == check_cpsc_mw(inst, W).satisfied == check_cpsc(inst, W).satisfied
        if inst.is_dichotomous:
            p = check_pjr(inst, W)
            assert p.satisfied == pjr_by_definition(inst, W.selected)
            if not p.satisfied:
                assert confirm_witness(inst, W, p.witness)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_approval_forms_and_bpjr(seed):
    inst = mixed_instance(seed, 5, 4, "approval-int")
    for W in enumerate_feasible_outcomes(inst):
        ipsc, cpsc = check_ipsc(inst, W), check_cpsc(inst, W)
        assert ipsc.satisfied == check_ipsc_approval(inst, W).satisfied
        assert cpsc.satisfied == check_cpsc_approval(inst, W).satisfied
        b = check_bpjr_l(inst, W)
        assert cpsc.satisfied == (b.satisfied and check_maxcost(inst, W).satisfied)
        if not b.satisfied:
            assert confirm_witness(inst, W, b.witness)
        if ipsc.satisfied:
            assert check_local_bpjr_l(inst, W).satisfied


def test_single_approval_voter_without_cpsc():
    # Every maximal-cost outcome (cost 7) leaves the voter's approvals at 4 < 5.
    inst = PBInstance.from_approvals({"c1": 1, "c2": 3, "c3": 3, "c4": 1}, [["c1", "c3", "c4"]], 7)
    assert cpsc_exists(inst) is None
    assert not any(Definitional(inst).cpsc(W.selected) for W in enumerate_feasible_outcomes(inst))


def test_dichotomous_cpsc_exists_when_everything_fits():
    inst = PBInstance.from_approvals({"a": 1, "b": 2}, [["a"], ["b"]], 3)
    assert cpsc_exists(inst).selected == ("a", "b")


def test_single_candidate_cpsc():
    inst = PBInstance.from_approvals({"a": 2}, [["a"], []], 2)
    assert cpsc_exists(inst).selected == ("a",)


def test_weighted_dichotomous_instance_without_cpsc():
    # Existence needs unit weights: voters 1 and 3 carry 28/11 and can claim c1.
    inst = generate(GenParams(28, 4, 5, "uniform", "dichotomous", weights="random"))
    assert cpsc_exists(inst) is None
    assert not any(Definitional(inst).cpsc(W.selected) for W in enumerate_feasible_outcomes(inst))
