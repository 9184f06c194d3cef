"""Exact participatory budgeting with weak ordinal preferences.

PB-EAR outcomes, IPSC/CPSC verification with witnesses, and brute-force
oracles, all in rational arithmetic.
"""

from ._exact import poison_floats, poison_requested

if poison_requested():
    poison_floats()

from .axioms import AXIOMS, Verdict, Witness, confirm_witness, verify  # noqa: E402
from .core import (  # noqa: E402
    Candidate,
    InstanceError,
    Outcome,
    PBError,
    PBInstance,
    PreconditionError,
    SizeGuardError,
    Voter,
    WeakOrder,
    dump_instance,
    parse_instance,
)
from .ear import EarConfig, EarTrace, Reweighting, Selection, pb_ear  # noqa: E402
from .knapsack import KnapsackResult, max_knapsack  # noqa: E402
from .oracles import cpsc_exists, enumerate_feasible_outcomes, find_outcomes  # noqa: E402

__all__ = [
    "AXIOMS",
    "Candidate",
    "EarConfig",
    "EarTrace",
    "InstanceError",
    "KnapsackResult",
    "Outcome",
    "PBError",
    "PBInstance",
    "PreconditionError",
    "Reweighting",
    "Selection",
    "SizeGuardError",
    "Verdict",
    "Voter",
    "WeakOrder",
    "Witness",
    "confirm_witness",
    "cpsc_exists",
    "dump_instance",
    "enumerate_feasible_outcomes",
    "find_outcomes",
    "max_knapsack",
    "parse_instance",
    "pb_ear",
    "verify",
]
