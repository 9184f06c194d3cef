"""``pbpsc`` command line: compute, verify, search, gen, crosscheck.

Exit codes: 0 pass, 1 axiom violation (or crosscheck counterexample),
2 usage / parse / guard error, 3 empty search result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._exact import fmt_rat, to_rat
from .axioms import AXIOMS, COMMITTEE_AXIOMS, verify
from .core import InstanceError, Outcome, PBError, PBInstance, dump_instance, parse_instance
from .crosscheck import MUTATIONS, SUITES, crosscheck, render
from .ear import EarConfig, Reweighting, Selection, pb_ear
from .gen import COST_MODELS, PREF_MODELS, WEIGHT_MODELS, GenParams, generate
from .oracles import find_outcomes

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_EMPTY = 0, 1, 2, 3

AXIOM_LABELS = {
    "exhaustive": "exhaustive",
    "maxcost": "maximal-cost",
    "ipsc": "IPSC",
    "cpsc": "CPSC",
    "ipsc-approval": "IPSC (approval form)",
    "cpsc-approval": "CPSC (approval form)",
    "bpjr-l": "BPJR-L",
    "local-bpjr-l": "Local-BPJR-L",
    "pjr": "PJR",
    "gen-psc": "generalized PSC",
    "cpsc-mw": "CPSC (multi-winner)",
}


class UsageError(Exception):
    pass


def _axioms(values: list[str] | None, default: list[str] | None = None) -> list[str]:
    out: list[str] = []
    for chunk in values or default or []:
        for name in chunk.split(","):
            name = name.strip()
            if not name:
                continue
            if name not in AXIOMS:
                raise UsageError(f"unknown axiom {name!r}; choose from {', '.join(AXIOMS)}")
            if name not in out:
                out.append(name)
    if not out:
        raise UsageError("at least one --axiom is required")
    return out


def _load(args) -> PBInstance:
    path = Path(args.instance)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return parse_instance(text, normalize=args.normalize, mw=args.mw)
    except InstanceError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _parse_outcome(inst: PBInstance, arg: str) -> Outcome:
    """Comma-separated ids, an outcome document, or '' for the empty set."""
    path = Path(arg)
    if arg and path.is_file():
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        ids = doc.get("selected") if isinstance(doc, dict) else doc
        if not isinstance(ids, list) or not all(isinstance(c, str) for c in ids):
            raise UsageError(f"{path}: expected a list of candidate ids or {{\"selected\": [...]}}")
    else:
        ids = [c.strip() for c in arg.split(",") if c.strip()]
    return inst.outcome(ids)


def _braces(ids) -> str:
    return "{" + ", ".join(ids) + "}"


def _outcome_doc(inst: PBInstance, W: Outcome) -> str:
    doc = {"selected": list(W.selected), "cost": fmt_rat(W.total_cost), "slack": fmt_rat(inst.limit - W.total_cost)}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc


# -- verbs -------------------------------------------------------------------------


def cmd_compute(args, out) -> int:
    inst = _load(args)
    W, trace = pb_ear(inst, EarConfig(args.selection, args.reweight))
    out.write(f"selected: {_braces(W.selected)}\n")
    out.write(f"cost: {fmt_rat(W.total_cost)}\n")
    out.write(f"slack: {fmt_rat(inst.limit - W.total_cost)}\n")
    if args.trace:
        _write(args.trace, trace.to_json())
    if args.output:
        _write(args.output, _outcome_doc(inst, W))
    return EXIT_OK


def cmd_verify(args, out) -> int:
    inst = _load(args)
    W = _parse_outcome(inst, args.outcome)
    names = _axioms(args.axiom)
    verdicts = [verify(inst, W, name, force=args.force) for name in names]
    out.write(f"outcome: {_braces(W.selected)} (cost {fmt_rat(W.total_cost)} of {fmt_rat(inst.limit)})\n")
    for v in verdicts:
        out.write(f"{v.axiom}: {v.status}\n")
        w = v.witness
        if w is None:
            continue
        out.write(f"  witness ({w.reason}):\n")
        out.write(f"    N' = {_braces(w.voters)}\n")
        out.write(f"    C' = {_braces(w.candidates)}\n")
        if w.candidate is not None:
            out.write(f"    c* = {w.candidate}\n")
        if w.bundle is not None:
            out.write(f"    C'' = {_braces(w.bundle)}\n")
        if w.level is not None:
            out.write(f"    level = {w.level}\n")
        for key, value in w.values:
            out.write(f"    {key} = {fmt_rat(value)}\n")
    if args.output:
        doc = {"outcome": list(W.selected), "verdicts": [v.to_dict() for v in verdicts]}
        _write(args.output, json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    return EXIT_OK if all(v.satisfied for v in verdicts) else EXIT_VIOLATION


def cmd_search(args, out) -> int:
    inst = _load(args)
    names = _axioms(args.axiom)
    found: list[Outcome] = []
    for W in find_outcomes(inst, names[0], first=args.first and len(names) == 1, force=args.force):
        if all(verify(inst, W, name, force=args.force).satisfied for name in names[1:]):
            found.append(W)
            if args.first:
                break
    label = " and ".join(AXIOM_LABELS[n] for n in names)
    if args.output:
        doc = {"axioms": names, "outcomes": [list(W.selected) for W in found]}
        _write(args.output, json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    if not found:
        out.write(f"no {label} outcome exists\n")
        return EXIT_EMPTY
    committee = "" if not set(names) & COMMITTEE_AXIOMS else " of size k"
    out.write(f"{len(found)} {label} outcome{'s' if len(found) != 1 else ''}{committee}:\n")
    for W in found:
        out.write(f"  {_braces(W.selected)}  cost {fmt_rat(W.total_cost)}\n")
    return EXIT_OK


def cmd_gen(args, out) -> int:
    try:
        params = GenParams(
            seed=args.seed, n=args.n, m=args.m, costs=args.costs, prefs=args.prefs,
            p=to_rat(args.p), limit=None if args.limit is None else to_rat(args.limit), weights=args.weights,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    text = dump_instance(generate(params))
    if args.output:
        _write(args.output, text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_crosscheck(args, out) -> int:
    try:
        n_max, m_max = (int(x) for x in args.sizes.lower().split("x"))
    except ValueError as exc:
        raise UsageError(f"--sizes expects NxM, got {args.sizes!r}") from exc
    suites = None
    if args.suite:
        suites = [s for chunk in args.suite for s in chunk.split(",") if s]
        bad = [s for s in suites if s not in SUITES]
        if bad:
            raise UsageError(f"unknown suite {bad[0]!r}; choose from {', '.join(SUITES)}")
    results = crosscheck(args.seeds, n_max, m_max, suites, args.mutate)
    text = render(results)
    out.write(text)
    if args.output:
        _write(args.output, text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbpsc", description="Exact PB-EAR and proportionality axiom checks.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def instance_args(p):
        p.add_argument("instance", help="instance document (JSON)")
        p.add_argument("--mw", type=int, metavar="K", help="multi-winner: unit costs and weights, limit K")
        p.add_argument("--normalize", action="store_true", help="rescale voter weights to sum to n")
        p.add_argument("--output", "-o", metavar="FILE", help="also write a machine-readable result")

    p = sub.add_parser("compute", help="run PB-EAR")
    instance_args(p)
    p.add_argument("--selection", choices=[s.value for s in Selection], default=Selection.LEX.value)
    p.add_argument("--reweight", choices=[r.value for r in Reweighting], default=Reweighting.PROPORTIONAL.value)
    p.add_argument("--trace", metavar="FILE", help="write the step-by-step trace")
    p.set_defaults(run=cmd_compute)

    p = sub.add_parser("verify", help="check an outcome against axioms")
    instance_args(p)
    p.add_argument("outcome", help="comma-separated ids, an outcome file, or '' for the empty outcome")
    p.add_argument("--axiom", "-a", action="append", help="axiom name(s), comma-separated or repeated")
    p.add_argument("--force", action="store_true", help="lift the size guard")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("search", help="enumerate outcomes satisfying axioms")
    instance_args(p)
    p.add_argument("--axiom", "-a", action="append", help="axiom name(s); outcomes must satisfy all")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--all", dest="first", action="store_false", help="list every match (default)")
    mode.add_argument("--first", dest="first", action="store_true", help="stop at the first match")
    p.add_argument("--force", action="store_true", help="lift the size guard")
    p.set_defaults(run=cmd_search, first=False)

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-n", type=int, default=4, help="voters")
    p.add_argument("-m", type=int, default=4, help="candidates")
    p.add_argument("--costs", choices=COST_MODELS, default="unit")
    p.add_argument("--prefs", choices=PREF_MODELS, default="strict")
    p.add_argument("--p", default="1/2", help="approval / class-split probability (decimal or p/q)")
    p.add_argument("--limit", help="budget limit (default: drawn from the seed)")
    p.add_argument("--weights", choices=WEIGHT_MODELS, default="unit")
    p.add_argument("--output", "-o", metavar="FILE")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("crosscheck", help="run the property suites")
    p.add_argument("--sizes", default="6x5", help="max voters x max candidates (default 6x5)")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--suite", action="append", help=f"subset of: {', '.join(SUITES)}")
    p.add_argument("--mutate", choices=MUTATIONS, help="run against a deliberately broken verifier")
    p.add_argument("--output", "-o", metavar="FILE")
    p.set_defaults(run=cmd_crosscheck)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.run(args, out)
    except (UsageError, PBError) as exc:
        print(f"pbpsc {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
