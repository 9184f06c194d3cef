"""PB instances with weak ordinal preferences, and the solid-coalition machinery.

Candidate and voter sets are handled internally as bitmasks over input
positions; the public functions take and return ids, always reported in
input order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from ._exact import fmt_rat, to_rat
from .knapsack import max_knapsack

# Above this many candidates (voters) per-mask lookup tables are not built.
TABLE_LIMIT = 16


class PBError(ValueError):
    """Base class for user-facing errors."""


class InstanceError(PBError):
    """Malformed or invalid instance document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class PreconditionError(PBError):
    """An operation was called outside its domain."""


class SizeGuardError(PBError):
    """Exponential search refused without ``force``."""


@dataclass(frozen=True)
class Candidate:
    id: str
    cost: Fraction


@dataclass(frozen=True)
class WeakOrder:
    """Equivalence classes, most preferred first; together they partition C."""

    classes: tuple[tuple[str, ...], ...]

    @property
    def is_strict(self) -> bool:
        return all(len(e) == 1 for e in self.classes)

    @property
    def is_dichotomous(self) -> bool:
        return len(self.classes) <= 2


@dataclass(frozen=True)
class Voter:
    id: str
    weight: Fraction
    prefs: WeakOrder


@dataclass(frozen=True)
class Outcome:
    selected: tuple[str, ...]
    total_cost: Fraction

    def __iter__(self):
        return iter(self.selected)

    def __len__(self):
        return len(self.selected)

    def __contains__(self, item):
        return item in self.selected


@dataclass(frozen=True)
class PBInstance:
    candidates: tuple[Candidate, ...]
    voters: tuple[Voter, ...]
    limit: Fraction

    def __post_init__(self):
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate candidate id")
        vids = [v.id for v in self.voters]
        if len(set(vids)) != len(vids):
            raise InstanceError("duplicate voter id")
        if not self.voters:
            raise InstanceError("an instance needs at least one voter")
        if self.limit <= 0:
            raise InstanceError(f"limit must be positive, got {fmt_rat(self.limit)}")
        for c in self.candidates:
            if c.cost <= 0:
                raise InstanceError(f"candidate {c.id!r} has nonpositive cost {fmt_rat(c.cost)}")
        full = set(ids)
        for v in self.voters:
            if v.weight < 0:
                raise InstanceError(f"voter {v.id!r} has negative weight")
            seen: list[str] = [c for e in v.prefs.classes for c in e]
            if any(not e for e in v.prefs.classes):
                raise InstanceError(f"voter {v.id!r} has an empty equivalence class")
            if len(seen) != len(set(seen)) or set(seen) != full:
                raise InstanceError(f"preferences of voter {v.id!r} do not partition the candidates")
        total = sum((v.weight for v in self.voters), Fraction(0))
        if total != len(self.voters):
            raise InstanceError(
                f"voter weights sum to {fmt_rat(total)}, expected n = {len(self.voters)}"
                " (pass normalize to rescale)"
            )

    # -- construction -----------------------------------------------------

    @classmethod
    def build(
        cls,
        costs: Mapping[str, object] | Sequence[tuple[str, object]],
        voters: Sequence[tuple[str, object, Sequence[Iterable[str]]]],
        limit,
        normalize: bool = False,
    ) -> "PBInstance":
        """Build from plain Python values.

        ``voters`` holds ``(id, weight, classes)`` triples; candidates a voter
        leaves unranked are appended as a final equivalence class.
        """
        pairs = list(costs.items()) if isinstance(costs, Mapping) else list(costs)
        cands = tuple(Candidate(str(cid), to_rat(cost)) for cid, cost in pairs)
        order = [c.id for c in cands]
        weights = [to_rat(w) for _, w, _ in voters]
        if normalize:
            weights = _normalized(weights)
        built = tuple(
            Voter(str(vid), wt, complete_order(classes, order))
            for (vid, _, classes), wt in zip(voters, weights)
        )
        return cls(cands, built, to_rat(limit))

    @classmethod
    def from_approvals(cls, costs, ballots: Sequence[Iterable[str]], limit, weights=None) -> "PBInstance":
        """Dichotomous instance; voters are named ``"1"``, ``"2"``, ..."""
        weights = weights or [1] * len(ballots)
        voters = [(str(k + 1), w, [list(a)] if list(a) else []) for k, (a, w) in enumerate(zip(ballots, weights))]
        return cls.build(costs, voters, limit)

    @classmethod
    def multiwinner(cls, candidates: Sequence[str], prefs: Sequence[Sequence[Iterable[str]]], k: int) -> "PBInstance":
        """Unit costs, unit weights, limit ``k``; voters named ``"1"``, ``"2"``, ..."""
        return cls.build(
            [(c, 1) for c in candidates],
            [(str(i + 1), 1, p) for i, p in enumerate(prefs)],
            k,
        )

    def outcome(self, selected: Iterable[str]) -> Outcome:
        """Validated feasible outcome, ids reordered to input order."""
        wanted = list(selected)
        unknown = [c for c in wanted if c not in self.index]
        if unknown:
            raise PreconditionError(f"unknown candidate(s): {', '.join(map(str, unknown))}")
        mask = self.mask_of(wanted)
        cost = self.cost_of(mask)
        if cost > self.limit:
            raise PreconditionError(
                f"outcome costs {fmt_rat(cost)} which exceeds the limit {fmt_rat(self.limit)}"
            )
        return Outcome(self.ids_of(mask), cost)

    # -- shape ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def m(self) -> int:
        return len(self.candidates)

    @cached_property
    def index(self) -> dict[str, int]:
        return {c.id: k for k, c in enumerate(self.candidates)}

    @cached_property
    def voter_index(self) -> dict[str, int]:
        return {v.id: k for k, v in enumerate(self.voters)}

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    @property
    def all_voters_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def is_dichotomous(self) -> bool:
        return all(v.prefs.is_dichotomous for v in self.voters)

    @property
    def is_strict(self) -> bool:
        return all(v.prefs.is_strict for v in self.voters)

    @property
    def is_multiwinner(self) -> bool:
        return (
            all(c.cost == 1 for c in self.candidates)
            and all(v.weight == 1 for v in self.voters)
            and self.limit.denominator == 1
        )

    # -- bitmask machinery -------------------------------------------------

    def mask_of(self, ids: Iterable[str] | Outcome) -> int:
        mask = 0
        for c in ids:
            mask |= 1 << self.index[c]
        return mask

    def ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(c.id for k, c in enumerate(self.candidates) if mask >> k & 1)

    def voter_mask_of(self, ids: Iterable[str]) -> int:
        mask = 0
        for v in ids:
            mask |= 1 << self.voter_index[v]
        return mask

    def voter_ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(v.id for k, v in enumerate(self.voters) if mask >> k & 1)

    @cached_property
    def costs(self) -> tuple[Fraction, ...]:
        return tuple(c.cost for c in self.candidates)

    @cached_property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(v.weight for v in self.voters)

    @cached_property
    def _cost_table(self) -> list[Fraction] | None:
        return _subset_sums(self.costs) if self.m <= TABLE_LIMIT else None

    @cached_property
    def _weight_table(self) -> list[Fraction] | None:
        return _subset_sums(self.weights) if self.n <= TABLE_LIMIT else None

    def cost_of(self, mask: int) -> Fraction:
        table = self._cost_table
        if table is not None:
            return table[mask]
        return sum((w for k, w in enumerate(self.costs) if mask >> k & 1), Fraction(0))

    def weight_of(self, vmask: int) -> Fraction:
        table = self._weight_table
        if table is not None:
            return table[vmask]
        return sum((b for k, b in enumerate(self.weights) if vmask >> k & 1), Fraction(0))

    @cached_property
    def _quota_table(self) -> list[Fraction] | None:
        table = self._weight_table
        return None if table is None else [b * self.limit / self.n for b in table]

    def quota_of(self, vmask: int) -> Fraction:
        table = self._quota_table
        if table is not None:
            return table[vmask]
        return self.weight_of(vmask) * self.limit / self.n

    @cached_property
    def class_masks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.mask_of(e) for e in v.prefs.classes) for v in self.voters)

    @cached_property
    def prefix_masks(self) -> tuple[tuple[int, ...], ...]:
        """``prefix_masks[i][j]``: candidates i weakly prefers to her j-th best (j <= m)."""
        out = []
        for classes in self.class_masks:
            row = [0]
            acc = 0
            queue = iter(classes)
            for j in range(1, self.m + 1):
                while acc.bit_count() < j:
                    acc |= next(queue)
                row.append(acc)
            out.append(tuple(row))
        return tuple(out)

    def pref_mask(self, i: int, j: int) -> int:
        if j >= self.m:
            return self.full_mask
        return self.prefix_masks[i][j]

    def solid_for(self, i: int, cmask: int) -> bool:
        """Every member of ``cmask`` is weakly above every non-member for voter i."""
        remaining = cmask
        for e in self.class_masks[i]:
            if remaining & ~e == 0:
                return True
            # C' continues below this class, so the class must lie inside C'.
            if e & ~cmask:
                return False
            remaining &= ~e
        return True

    def supporters_mask(self, cmask: int) -> int:
        out = 0
        for i in range(self.n):
            if self.solid_for(i, cmask):
                out |= 1 << i
        return out

    @cached_property
    def supporter_table(self) -> list[int]:
        """``supporter_table[cmask]`` for every candidate mask (small m only)."""
        return [self.supporters_mask(cmask) for cmask in range(1 << self.m)]

    def bar_mask(self, vmask: int, size: int) -> int:
        out = 0
        i = 0
        while vmask:
            if vmask & 1:
                out |= self.pref_mask(i, size)
            vmask >>= 1
            i += 1
        return out

    def approval_mask(self, i: int) -> int:
        return self.class_masks[i][0] if self.class_masks[i] else 0


def _subset_sums(values: Sequence[Fraction]) -> list[Fraction]:
    table = [Fraction(0)] * (1 << len(values))
    for mask in range(1, len(table)):
        low = mask & -mask
        table[mask] = table[mask ^ low] + values[low.bit_length() - 1]
    return table


def _normalized(weights: list[Fraction]) -> list[Fraction]:
    total = sum(weights, Fraction(0))
    if total <= 0:
        raise InstanceError("cannot normalize weights that sum to zero")
    n = len(weights)
    return [w * n / total for w in weights]


def complete_order(classes: Sequence[Iterable[str]], order: Sequence[str]) -> WeakOrder:
    """Order each class by input position and append the unranked remainder."""
    pos = {c: k for k, c in enumerate(order)}
    out = []
    ranked: set[str] = set()
    for e in classes:
        members = [str(c) for c in e]
        missing = [c for c in members if c not in pos]
        if missing:
            raise InstanceError(f"unknown candidate {missing[0]!r} in preferences")
        out.append(tuple(sorted(members, key=pos.__getitem__)))
        ranked.update(members)
    rest = tuple(c for c in order if c not in ranked)
    if rest:
        out.append(rest)
    return WeakOrder(tuple(out))


# -- set-level operations -------------------------------------------------


def _voter(inst: PBInstance, voter_id: str) -> int:
    try:
        return inst.voter_index[voter_id]
    except KeyError:
        raise PreconditionError(f"unknown voter {voter_id!r}") from None


def _cands(inst: PBInstance, ids) -> int:
    try:
        return inst.mask_of(ids)
    except KeyError as exc:
        raise PreconditionError(f"unknown candidate {exc.args[0]!r}") from None


def _voters(inst: PBInstance, ids) -> int:
    try:
        return inst.voter_mask_of(ids)
    except KeyError as exc:
        raise PreconditionError(f"unknown voter {exc.args[0]!r}") from None


def weak_pref_set(inst: PBInstance, voter_id: str, j: int) -> tuple[str, ...]:
    """Candidates voter ``voter_id`` ranks at least as high as her j-th choice.

    This is the union of the shortest prefix of her classes holding at least
    ``j`` candidates, so it does not depend on how ties are broken.
    """
    if j < 1:
        raise PreconditionError("rank level j starts at 1")
    return inst.ids_of(inst.pref_mask(_voter(inst, voter_id), j))


def is_solidly_supported(inst: PBInstance, voters: Iterable[str], cands: Iterable[str]) -> bool:
    vmask, cmask = _voters(inst, voters), _cands(inst, cands)
    return all(inst.solid_for(i, cmask) for i in range(inst.n) if vmask >> i & 1)


def supporters(inst: PBInstance, cands: Iterable[str]) -> tuple[str, ...]:
    """The largest voter set solidly supporting ``cands`` (may be empty)."""
    return inst.voter_ids_of(inst.supporters_mask(_cands(inst, cands)))


def bar_set(inst: PBInstance, voters: Iterable[str], cands: Iterable[str]) -> tuple[str, ...]:
    cmask = _cands(inst, cands)
    return inst.ids_of(inst.bar_mask(_voters(inst, voters), cmask.bit_count()))


def periphery(inst: PBInstance, voters: Iterable[str], cands: Iterable[str]) -> tuple[str, ...]:
    voters, cands = list(voters), list(cands)
    if not is_solidly_supported(inst, voters, cands):
        raise PreconditionError("periphery is only defined for a solidly supported candidate set")
    cmask = _cands(inst, cands)
    return inst.ids_of(inst.bar_mask(_voters(inst, voters), cmask.bit_count()) & ~cmask)


def quota(inst: PBInstance, voters: Iterable[str]) -> Fraction:
    """b(N') * L / n."""
    return inst.quota_of(_voters(inst, voters))


def _outcome_mask(inst: PBInstance, W) -> int:
    if isinstance(W, Outcome):
        return inst.mask_of(W.selected)
    return inst.mask_of(inst.outcome(W).selected)


def is_exhaustive(inst: PBInstance, W) -> bool:
    wmask = _outcome_mask(inst, W)
    spent = inst.cost_of(wmask)
    return all(spent + inst.costs[k] > inst.limit for k in range(inst.m) if not wmask >> k & 1)


def is_maximal_cost(inst: PBInstance, W) -> bool:
    wmask = _outcome_mask(inst, W)
    return inst.cost_of(wmask) == max_cost(inst)


def max_cost(inst: PBInstance) -> Fraction:
    return max_knapsack([(c.id, c.cost) for c in inst.candidates], inst.limit).best_weight


# -- documents ------------------------------------------------------------

_TOP_KEYS = {"limit", "candidates", "voters", "name"}


def parse_instance(text: str, normalize: bool = False, mw: int | None = None) -> PBInstance:
    """Parse an instance document.

    Quantities may be JSON numbers or strings holding a decimal or ``p/q``;
    both are converted exactly. With ``mw=k`` costs and weights default to 1
    and the limit becomes ``k``, regardless of what the document says.
    """
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InstanceError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise InstanceError("top level must be an object", 1)
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise InstanceError(f"unknown key {sorted(extra)[0]!r}", _line_of(text, f'"{sorted(extra)[0]}"'))
    loc = _Locator(text)

    def rat(raw, what: str, anchor: str):
        try:
            return to_rat(raw)
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"{what}: {exc}", loc.find(anchor)) from None

    if mw is not None:
        if mw < 1:
            raise InstanceError("committee size must be a positive integer")
        limit = Fraction(mw)
    else:
        if "limit" not in doc:
            raise InstanceError("missing 'limit'", 1)
        limit = rat(doc["limit"], "limit", '"limit"')

    raw_cands = doc.get("candidates", [])
    raw_voters = doc.get("voters")
    if not isinstance(raw_cands, list) or not isinstance(raw_voters, list):
        raise InstanceError("'candidates' and 'voters' must be lists", loc.find('"voters"'))

    costs: list[tuple[str, Fraction]] = []
    seen: set[str] = set()
    for k, entry in enumerate(raw_cands):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise InstanceError(f"candidate #{k} needs a string 'id'", loc.find('"candidates"'))
        cid = entry["id"]
        anchor = _id_pattern(cid)
        if cid in seen:
            raise InstanceError(f"duplicate candidate id {cid!r}", loc.find(anchor, nth=1, after='"candidates"'))
        seen.add(cid)
        if mw is not None:
            cost = Fraction(1)
        elif "cost" not in entry:
            raise InstanceError(f"candidate {cid!r} has no cost", loc.find(anchor, after='"candidates"'))
        else:
            cost = rat(entry["cost"], f"cost of {cid!r}", anchor)
        if cost <= 0:
            raise InstanceError(f"candidate {cid!r} has nonpositive cost", loc.find(anchor, after='"candidates"'))
        costs.append((cid, cost))
    if limit <= 0:
        raise InstanceError("limit must be positive", loc.find('"limit"'))

    order = [c for c, _ in costs]
    voters: list[tuple[str, Fraction, list]] = []
    vseen: set[str] = set()
    for k, entry in enumerate(raw_voters):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise InstanceError(f"voter #{k} needs a string 'id'", loc.find('"voters"'))
        vid = entry["id"]
        anchor = _id_pattern(vid)
        line = loc.find(anchor, nth=1 if vid in vseen else 0, after='"voters"')
        if vid in vseen:
            raise InstanceError(f"duplicate voter id {vid!r}", line)
        vseen.add(vid)
        weight = Fraction(1) if mw is not None or "weight" not in entry else rat(entry["weight"], f"weight of voter {vid!r}", anchor)
        if weight < 0:
            raise InstanceError(f"voter {vid!r} has negative weight", line)
        prefs = entry.get("prefs", [])
        if not isinstance(prefs, list) or not all(isinstance(e, list) and e for e in prefs):
            raise InstanceError(f"prefs of voter {vid!r} must be a list of nonempty lists", line)
        flat = [c for e in prefs for c in e]
        if not all(isinstance(c, str) for c in flat):
            raise InstanceError(f"prefs of voter {vid!r} must hold candidate ids", line)
        bad = [c for c in flat if c not in seen]
        if bad:
            raise InstanceError(f"voter {vid!r} ranks unknown candidate {bad[0]!r}", line)
        if len(flat) != len(set(flat)):
            raise InstanceError(f"voter {vid!r} ranks a candidate twice", line)
        voters.append((vid, weight, prefs))
    if not voters:
        raise InstanceError("an instance needs at least one voter", loc.find('"voters"'))

    weights = [w for _, w, _ in voters]
    total = sum(weights, Fraction(0))
    if total != len(voters):
        if not normalize:
            raise InstanceError(
                f"voter weights sum to {fmt_rat(total)}, expected n = {len(voters)} (use --normalize to rescale)",
                loc.find('"voters"'),
            )
        weights = _normalized(weights)
    built = tuple(Voter(vid, w, complete_order(p, order)) for (vid, _, p), w in zip(voters, weights))
    return PBInstance(tuple(Candidate(c, w) for c, w in costs), built, limit)


def dump_instance(inst: PBInstance) -> str:
    """Canonical document: every class written out, one record per line."""
    cands = [json.dumps({"id": c.id, "cost": fmt_rat(c.cost)}, ensure_ascii=False) for c in inst.candidates]
    voters = [
        json.dumps(
            {"id": v.id, "weight": fmt_rat(v.weight), "prefs": [list(e) for e in v.prefs.classes]},
            ensure_ascii=False,
        )
        for v in inst.voters
    ]
    out = ["{", f'  "limit": {json.dumps(fmt_rat(inst.limit))},']
    out += _block("candidates", cands) + [","]
    out += _block("voters", voters) + ["}", ""]
    return "\n".join(out).replace("\n,\n", ",\n")


def _block(key: str, rows: list[str]) -> list[str]:
    if not rows:
        return [f'  "{key}": []']
    return [f'  "{key}": [', ",\n".join("    " + r for r in rows), "  ]"]


def _id_pattern(ident: str) -> str:
    return '"id"\\s*:\\s*' + re.escape(json.dumps(ident))


def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


class _Locator:
    def __init__(self, text: str):
        self.text = text

    def find(self, pattern: str, nth: int = 0, after: str | None = None) -> int | None:
        start = 0
        if after is not None:
            hit = self.text.find(after)
            start = hit if hit >= 0 else 0
        found = list(re.finditer(pattern, self.text[start:]))
        if len(found) <= nth:
            return None
        pos = start + found[nth].start()
        return self.text.count("\n", 0, pos) + 1
