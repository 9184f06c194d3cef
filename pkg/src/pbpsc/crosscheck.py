"""Property suites: published fixtures, implication lattice, specializations,
oracle agreement and the PB-EAR guarantee.

Each suite returns a :class:`SuiteResult`; any counterexample carries the
full instance, the outcome and the witness so it can be replayed.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product
from random import Random
from typing import Callable, Iterator
from unittest import mock

from . import axioms
from ._exact import fmt_rat
from .axioms import (
    Verdict,
    check_bpjr_l,
    check_cpsc,
    check_cpsc_approval,
    check_cpsc_mw,
    check_gen_psc,
    check_ipsc,
    check_ipsc_approval,
    check_local_bpjr_l,
    check_pjr,
    confirm_witness,
    verify,
)
from .core import Outcome, PBInstance, dump_instance, is_exhaustive, is_maximal_cost, parse_instance
from .ear import EarConfig, EarTrace, Reweighting, Selection, pb_ear
from .gen import mixed_instance
from .knapsack import _branch_and_bound, max_knapsack
from .oracles import Definitional, enumerate_feasible_outcomes, enumerate_knapsack, find_outcomes

CONFIGS = tuple(EarConfig(s, r) for s, r in product(Selection, Reweighting))


@dataclass
class Failure:
    suite: str
    description: str
    instance: PBInstance | None = None
    outcome: tuple[str, ...] | None = None
    verdict: Verdict | None = None

    def render(self) -> str:
        lines = [f"[{self.suite}] {self.description}"]
        if self.outcome is not None:
            lines.append(f"  outcome: {{{', '.join(self.outcome)}}}")
        if self.verdict is not None and self.verdict.witness is not None:
            lines.append("  witness: " + json.dumps(self.verdict.witness.to_dict()))
        if self.instance is not None:
            lines.append("  instance:")
            lines += ["    " + line for line in dump_instance(self.instance).splitlines()]
        return "\n".join(lines)


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    checks: int = 0
    failures: list[Failure] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def expect(self, ok: bool, description: str, inst=None, W=None, verdict=None) -> bool:
        self.checks += 1
        if not ok:
            outcome = None if W is None else tuple(W)
            self.failures.append(Failure(self.name, description, inst, outcome, verdict))
        return ok


# -- fixtures --------------------------------------------------------------------


def load_fixtures() -> Iterator[tuple[str, PBInstance, dict]]:
    root = resources.files("pbpsc") / "fixtures"
    names = sorted(p.name[: -len(".json")] for p in root.iterdir()
                   if p.name.endswith(".json") and not p.name.endswith(".expected.json"))
    for name in names:
        inst = parse_instance((root / f"{name}.json").read_text(encoding="utf-8"))
        expected = json.loads((root / f"{name}.expected.json").read_text(encoding="utf-8"))
        yield name, inst, expected


def run_fixtures() -> SuiteResult:
    """Published verdicts. A check listed as disputed counts as matched only
    when the observed verdict is the documented one and its witness is
    confirmed by the definition-level oracle."""
    res = SuiteResult("fixtures")
    matched = disputed = 0
    for name, inst, expected in load_fixtures():
        res.cases += 1
        fixture_ok, fixture_disputed = True, False
        for chk in expected["checks"]:
            kind = chk["kind"]
            if kind == "verdict":
                W = inst.outcome(chk["outcome"])
                got = verify(inst, W, chk["axiom"])
                if got.status == chk["verdict"]:
                    ok = res.expect(True, "")
                elif "disputed" in chk and _dispute_holds(inst, W, got, chk):
                    fixture_disputed = True
                    res.notes.append(
                        f"{name}: {chk['axiom']} on {{{','.join(W.selected)}}} published {chk['verdict']}, "
                        f"observed {got.status} ({chk['disputed']['note']})"
                    )
                    ok = res.expect(True, "")
                else:
                    ok = res.expect(False, f"{name}: {chk['axiom']} expected {chk['verdict']}, got {got.status}",
                                    inst, W.selected, got)
            elif kind == "pb_ear":
                outs = {pb_ear(inst, cfg)[0].selected for cfg in CONFIGS}
                ok = res.expect(outs == {tuple(chk["outcome"])}, f"{name}: PB-EAR returned {sorted(outs)}", inst)
            elif kind == "member":
                found = [W.selected for W in find_outcomes(inst, chk["axiom"])]
                ok = res.expect(tuple(chk["outcome"]) in found,
                                f"{name}: {chk['outcome']} missing from {chk['axiom']} outcomes", inst)
            elif kind == "search":
                found = [list(W.selected) for W in find_outcomes(inst, chk["axiom"], first=chk.get("first", False))]
                ok = res.expect(found == chk["outcomes"], f"{name}: search {chk['axiom']} gave {found}", inst)
            elif kind == "knapsack":
                best = max_knapsack([(c.id, c.cost) for c in inst.candidates], chk["capacity"])
                ok = res.expect(
                    fmt_rat(best.best_weight) == chk["weight"] and list(best.best_set) == chk["set"],
                    f"{name}: knapsack gave {fmt_rat(best.best_weight)} {best.best_set}", inst,
                )
            else:
                ok = res.expect(False, f"{name}: unknown check kind {kind!r}")
            fixture_ok = fixture_ok and ok
        if fixture_ok:
            matched += 1
            disputed += fixture_disputed
    res.notes.insert(0, f"{matched}/{res.cases} fixtures consistent, {disputed} with a disputed published verdict")
    return res


def _dispute_holds(inst: PBInstance, W: Outcome, got: Verdict, chk: dict) -> bool:
    if got.status != chk["disputed"]["observed"]:
        return False
    oracle = Definitional(inst)
    if chk["axiom"] == "ipsc":
        truth = oracle.ipsc(W.selected)
    elif chk["axiom"] == "cpsc":
        truth = oracle.cpsc(W.selected)
    else:
        return False
    return (truth == got.satisfied) and (got.satisfied or confirm_witness(inst, W, got.witness))


# -- random-instance suites --------------------------------------------------------


def _family(seed: int, families: tuple[str, ...]) -> str:
    return families[seed % len(families)]


def lattice_instance(seed: int, n_max: int, m_max: int) -> PBInstance:
    return mixed_instance(seed, n_max, m_max, _family(seed, ("pb", "mw")))


def run_lattice(seeds: int = 200, n_max: int = 6, m_max: int = 5) -> SuiteResult:
    """Implications among axioms over every feasible outcome."""
    res = SuiteResult("lattice")
    for seed in range(seeds):
        inst = lattice_instance(seed, n_max, m_max)
        res.cases += 1
        mw = inst.is_multiwinner
        k = inst.limit.numerator if mw else None
        for W in enumerate_feasible_outcomes(inst):
            ipsc, cpsc = check_ipsc(inst, W), check_cpsc(inst, W)
            res.expect(not ipsc.satisfied or is_exhaustive(inst, W), "IPSC outcome not exhaustive", inst, W)
            res.expect(not cpsc.satisfied or is_maximal_cost(inst, W), "CPSC outcome not maximal cost", inst, W)
            if not mw or len(W) != k:
                continue
            gen, cmw = check_gen_psc(inst, W), check_cpsc_mw(inst, W)
            res.expect(gen.satisfied == cmw.satisfied == cpsc.satisfied,
                       f"gen-PSC {gen.status}, CPSC-MW {cmw.status}, CPSC {cpsc.status} disagree", inst, W)
            res.expect(not ipsc.satisfied or gen.satisfied, "IPSC committee violates gen-PSC", inst, W, gen)
            if inst.is_dichotomous:
                pjr = check_pjr(inst, W)
                res.expect(not ipsc.satisfied or pjr.satisfied, "IPSC committee violates PJR", inst, W, pjr)
                res.expect(pjr.satisfied == cpsc.satisfied,
                           f"PJR {pjr.status} but CPSC {cpsc.status}", inst, W, pjr if cpsc.satisfied else cpsc)
    return res


def run_specialization(seeds: int = 200, n_max: int = 6, m_max: int = 5) -> SuiteResult:
    """Approval characterizations agree with the general checks.

    Covers the dichotomous instances of the lattice suite plus one
    integer-cost approval instance per seed for the BPJR-L properties.
    """
    res = SuiteResult("specialization")
    for seed in range(seeds):
        for inst in (lattice_instance(seed, n_max, m_max), mixed_instance(seed, n_max, m_max, "approval-int")):
            if inst.is_dichotomous:
                res.cases += 1
                _specialize(res, inst)
    return res


def _specialize(res: SuiteResult, inst: PBInstance) -> None:
    normalized = (
        inst.limit.denominator == 1
        and min(inst.costs, default=0) == 1
        and all(c.denominator == 1 for c in inst.costs)
        and all(b == 1 for b in inst.weights)
    )
    for W in enumerate_feasible_outcomes(inst):
        ipsc, cpsc = check_ipsc(inst, W), check_cpsc(inst, W)
        ia, ca = check_ipsc_approval(inst, W), check_cpsc_approval(inst, W)
        res.expect(ipsc.satisfied == ia.satisfied, f"IPSC {ipsc.status} vs approval form {ia.status}", inst, W)
        res.expect(cpsc.satisfied == ca.satisfied, f"CPSC {cpsc.status} vs approval form {ca.status}", inst, W)
        if not normalized:
            continue
        bp = check_bpjr_l(inst, W)
        res.expect(cpsc.satisfied == (bp.satisfied and is_maximal_cost(inst, W)),
                   f"CPSC {cpsc.status} vs BPJR-L {bp.status} + maximal cost", inst, W)
        if ipsc.satisfied:
            loc = check_local_bpjr_l(inst, W)
            res.expect(loc.satisfied, "IPSC outcome violates Local-BPJR-L", inst, W, loc)


def run_oracle(seeds: int = 200, n_max: int = 6, m_max: int = 5) -> SuiteResult:
    """Verifiers against definition-level oracles, witness soundness, knapsack."""
    res = SuiteResult("oracle")
    for seed in range(seeds):
        inst = mixed_instance(seed, n_max, m_max, _family(seed, ("pb", "mw", "approval-int")))
        res.cases += 1
        oracle = Definitional(inst)
        for W in enumerate_feasible_outcomes(inst):
            ids = W.selected
            for name, check, truth in (
                ("ipsc", check_ipsc, oracle.ipsc),
                ("cpsc", check_cpsc, oracle.cpsc),
            ):
                v = check(inst, W)
                res.expect(v.satisfied == truth(ids), f"{name} verifier says {v.status}, definition disagrees",
                           inst, W, v)
                if not v.satisfied:
                    res.expect(confirm_witness(inst, W, v.witness), f"{name} witness does not re-check", inst, W, v)
            res.expect(is_exhaustive(inst, W) == oracle.exhaustive(ids), "exhaustive predicate disagrees", inst, W)
            res.expect(is_maximal_cost(inst, W) == oracle.maxcost(ids), "maximal-cost predicate disagrees", inst, W)
    for seed in range(5 * seeds):
        rng = Random(f"knapsack:{seed}")
        size = rng.randint(0, 12)
        items = {f"i{k}": Fraction(rng.randint(1, 40), rng.randint(1, 4)) for k in range(size)}
        cap = Fraction(rng.randint(1, 60), rng.randint(1, 3))
        truth = enumerate_knapsack(items, cap)
        best = max_knapsack(items, cap)
        bnb = _branch_and_bound(list(items.values()), cap)
        bnb_w = sum((w for k, w in enumerate(items.values()) if bnb >> k & 1), Fraction(0))
        res.expect(best.best_weight == truth and bnb_w == truth,
                   f"knapsack {dict((k, fmt_rat(v)) for k, v in items.items())} cap {fmt_rat(cap)}: "
                   f"enumeration {fmt_rat(truth)}, solver {fmt_rat(best.best_weight)}, b&b {fmt_rat(bnb_w)}")
    return res


def trace_problems(inst: PBInstance, W: Outcome, trace: EarTrace) -> list[str]:
    """Invariant violations in a PB-EAR trace (empty when the trace is sound)."""
    problems = []
    residual = {v.id: v.weight for v in inst.voters}
    cost = {c.id: c.cost for c in inst.candidates}
    spent = Fraction(0)
    for step in trace.steps:
        if step.level > inst.m + 1:
            problems.append(f"rank level {step.level} exceeds m + 1")
        if step.chosen is None:
            continue
        due = inst.n * cost[step.chosen] / inst.limit
        if sum((d for _, d in step.deductions), Fraction(0)) != due:
            problems.append(f"deductions for {step.chosen} do not sum to {fmt_rat(due)}")
        if spent + cost[step.chosen] > inst.limit:
            problems.append(f"{step.chosen} admitted without room in the budget")
        spent += cost[step.chosen]
        for v, d in step.deductions:
            residual[v] -= d
            if residual[v] < 0:
                problems.append(f"voter {v} weight negative")
        if sum(residual.values(), Fraction(0)) != inst.n - spent * inst.n / inst.limit:
            problems.append("weight not conserved")
    if tuple(s.chosen for s in trace.selections) and set(s.chosen for s in trace.selections) != set(W.selected):
        problems.append("trace selections differ from the outcome")
    return problems


def run_ear(seeds: int = 200, n_max: int = 6, m_max: int = 5) -> SuiteResult:
    """PB-EAR outputs satisfy IPSC under every configuration; IPSC outcomes exist."""
    res = SuiteResult("ear")
    for seed in range(seeds):
        inst = mixed_instance(seed, n_max, m_max, _family(seed, ("pb", "mw", "approval-int")))
        res.cases += 1
        seen: dict[tuple[str, ...], Verdict] = {}
        for cfg in CONFIGS:
            W, trace = pb_ear(inst, cfg)
            again = pb_ear(inst, cfg)
            res.expect(again == (W, trace), f"PB-EAR not deterministic under {cfg}", inst, W)
            if W.selected not in seen:
                seen[W.selected] = check_ipsc(inst, W)
            v = seen[W.selected]
            res.expect(v.satisfied, f"PB-EAR ({cfg.selection.value}, {cfg.reweighting.value}) output violates IPSC",
                       inst, W, v)
            res.expect(is_exhaustive(inst, W), "PB-EAR output not exhaustive", inst, W)
            for problem in trace_problems(inst, W, trace):
                res.expect(False, f"trace: {problem}", inst, W)
        res.expect(bool(find_outcomes(inst, "ipsc", first=True)), "no IPSC outcome found", inst)
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "fixtures": run_fixtures,
    "lattice": run_lattice,
    "specialization": run_specialization,
    "oracle": run_oracle,
    "ear": run_ear,
}


@contextmanager
def mutation(name: str | None):
    """Deliberately broken verifier, to prove the suites can fail."""
    if name is None:
        yield
        return
    flips = {
        "ipsc-flip": ("_under", lambda spent, bound: spent > bound),
        "ipsc-boundary": ("_fits", lambda total, bound: total < bound),
    }
    if name not in flips:
        raise ValueError(f"unknown mutation {name!r}; choose from {', '.join(flips)}")
    attr, fake = flips[name]
    with mock.patch.object(axioms, attr, fake):
        yield


MUTATIONS = ("ipsc-flip", "ipsc-boundary")


def crosscheck(seeds: int = 200, n_max: int = 6, m_max: int = 5, suites=None,
               mutate: str | None = None) -> list[SuiteResult]:
    chosen = list(suites or SUITES)
    out = []
    with mutation(mutate):
        for name in chosen:
            fn = SUITES[name]
            out.append(fn() if name == "fixtures" else fn(seeds, n_max, m_max))
    return out


def render(results: list[SuiteResult], max_failures: int = 3) -> str:
    lines = [f"{'suite':<16}{'cases':>7}{'checks':>9}{'counterexamples':>17}  status"]
    for r in results:
        lines.append(f"{r.name:<16}{r.cases:>7}{r.checks:>9}{len(r.failures):>17}  {'pass' if r.passed else 'FAIL'}")
    for r in results:
        for note in r.notes:
            lines.append(f"note[{r.name}]: {note}")
    for r in results:
        for f in r.failures[:max_failures]:
            lines.append("")
            lines.append(f.render())
        if len(r.failures) > max_failures:
            lines.append(f"... {len(r.failures) - max_failures} more counterexamples in {r.name}")
    return "\n".join(lines) + "\n"


__all__ = [
    "CONFIGS",
    "MUTATIONS",
    "SUITES",
    "SuiteResult",
    "crosscheck",
    "lattice_instance",
    "load_fixtures",
    "mutation",
    "render",
    "run_ear",
    "run_fixtures",
    "run_lattice",
    "run_oracle",
    "run_specialization",
    "trace_problems",
]
