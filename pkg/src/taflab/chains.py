"""MI- and CMI-chains, truncated membership, and extraction of chains from ideal towers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from .fdcore import (
    DigraphAlgebra, DomainError, Ideal, MatrixUnit, enumerate_ideals, covers,
    ideal_from_generators, ideal_from_support, join, leq, meet_all,
    minimal_excluded_generators,
)
from .tower import (
    ArgumentError, DepthError, IdealTower, Presentation, contract,
)


class ExtractionError(RuntimeError):
    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class TriBool:
    status: str  # "out" | "in_up_to" | "in_certified"
    level: int | None = None
    depth: int | None = None
    evidence: Any = None

    @classmethod
    def out(cls, level, evidence=None):
        return cls("out", level=level, evidence=evidence)

    @classmethod
    def in_up_to(cls, depth, evidence=None):
        return cls("in_up_to", depth=depth, evidence=evidence)

    @classmethod
    def in_certified(cls, evidence=None):
        return cls("in_certified", evidence=evidence)

    @property
    def is_out(self):
        return self.status == "out"

    @property
    def is_in(self):
        return self.status != "out"

    def __str__(self):
        if self.status == "out":
            return f"out:{self.level}"
        if self.status == "in_up_to":
            return f"in_up_to:{self.depth}"
        return "in_certified"

    def to_json(self):
        ev = {"level": self.level} if self.status == "out" else {"depth": self.depth}
        if self.evidence is not None:
            ev["detail"] = self.evidence
        return {"status": self.status, "evidence": ev}


@dataclass(frozen=True)
class Chain:
    start_level: int
    units: tuple[MatrixUnit, ...]

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(MatrixUnit(*u) for u in self.units))
        if self.start_level < 1 or not self.units:
            raise ArgumentError("a chain needs a positive start level and at least one unit")

    @property
    def end_level(self) -> int:
        return self.start_level + len(self.units) - 1

    def at(self, level: int) -> MatrixUnit:
        if not self.start_level <= level <= self.end_level:
            raise DepthError(f"chain covers levels {self.start_level}..{self.end_level}")
        return self.units[level - self.start_level]

    def levels(self):
        return range(self.start_level, self.end_level + 1)

    def to_json(self):
        return {"start_level": self.start_level, "units": [str(u) for u in self.units]}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["start_level"]), tuple(MatrixUnit.parse(u) for u in data["units"]))


def fit_chain(pres: Presentation, ch: Chain):
    if ch.end_level > pres.depth:
        raise DepthError(f"chain reaches level {ch.end_level} but presentation has {pres.depth}")
    for k in ch.levels():
        pres.algebra(k).check_unit(ch.at(k))


def in_principal(e: MatrixUnit, gens) -> bool:
    """e lies in the ideal generated by the units ``gens`` (same level)."""
    return any(g.summand == e.summand and e.row <= g.row and e.col >= g.col for g in gens)


@dataclass
class ChainCheck:
    ok: bool
    witness_level: int | None = None

    def __bool__(self):
        return self.ok


def check_mi_chain(pres: Presentation, ch: Chain) -> ChainCheck:
    fit_chain(pres, ch)
    for k in range(ch.start_level, ch.end_level):
        if not in_principal(ch.at(k + 1), pres.image(ch.at(k), k, k + 1)):
            return ChainCheck(False, k)
    return ChainCheck(True)


def _last(ch: Chain, depth: int | None) -> int:
    return ch.end_level if depth is None else min(depth, ch.end_level)


def check_condition_c_mi(pres: Presentation, ch: Chain, depth: int | None = None) -> TriBool:
    """No unit f != e_k in Id_k(e_k) has e_{k+1} in Id_{k+1}(f)."""
    fit_chain(pres, ch)
    if depth is not None and depth > pres.depth:
        raise DepthError(f"depth {depth} exceeds presentation depth {pres.depth}")
    last = _last(ch, depth)
    for k in range(ch.start_level, last):
        e, nxt = ch.at(k), ch.at(k + 1)
        for f in pres.algebra(k).units():
            if f == e or not in_principal(f, [e]):
                continue
            if in_principal(nxt, pres.image(f, k, k + 1)):
                return TriBool.out(k, evidence={"f": str(f)})
    return TriBool.in_up_to(last)


def _is_subordinate_chain(pres, ch, lo, hi) -> int | None:
    for k in range(lo, hi):
        if ch.at(k + 1) not in pres.image(ch.at(k), k, k + 1):
            return k
    return None


def _period_window_ok(pres: Presentation, start: int, prop: str) -> bool:
    """Stationarity lets a property checked over one full period persist forever."""
    p = pres.stationary_period
    if p is None or start + p > pres.depth:
        return False
    return pres.all_embeddings_have(prop, start)


def chain_membership(pres: Presentation, ch: Chain, f, level: int, depth: int | None = None,
                     assume_stationary: bool = False) -> TriBool:
    """Is the unit f of A_level in the ideal corresponding to the chain?

    OUT once some e_k lands in Id_k(f).  IN_CERTIFIED needs declared
    stationarity, a subordinate chain across a full period, and embeddings
    for which no subordinate of a unit u is pushed into the largest ideal
    missing u; then e_k outside Id_k(f) forces e_{k+1} outside Id_{k+1}(f)
    for every subordinate continuation of the chain.
    """
    fit_chain(pres, ch)
    f = pres.algebra(level).check_unit(f)
    if level < ch.start_level:
        raise ArgumentError(f"unit at level {level} sits below the chain start {ch.start_level}")
    if depth is not None and depth > pres.depth:
        raise DepthError(f"depth {depth} exceeds presentation depth {pres.depth}")
    last = _last(ch, depth)
    if level > last:
        raise DepthError(f"chain data stops at level {last}, below {level}")
    for k in range(level, last + 1):
        if in_principal(ch.at(k), pres.image(f, level, k)):
            return TriBool.out(k)
    if assume_stationary and pres.stationary_period is not None:
        p = pres.stationary_period
        if last - level >= p and _is_subordinate_chain(pres, ch, level, last) is None \
                and _period_window_ok(pres, level, "subordinate_exact"):
            return TriBool.in_certified(evidence={"period": p, "checked_through": last})
    return TriBool.in_up_to(last)


def check_cmi_chain(pres: Presentation, ch: Chain, depth: int | None = None,
                    assume_stationary: bool = False) -> TriBool:
    """Subordinacy, then: the other subordinates of e_k never generate any later e_j."""
    fit_chain(pres, ch)
    if depth is not None and depth > pres.depth:
        raise DepthError(f"depth {depth} exceeds presentation depth {pres.depth}")
    last = _last(ch, depth)
    bad = _is_subordinate_chain(pres, ch, ch.start_level, last)
    if bad is not None:
        return TriBool.out(bad, evidence="not a subordinate")
    for k in range(ch.start_level, last):
        rest = pres.image(ch.at(k), k, k + 1) - {ch.at(k + 1)}
        for j in range(k + 1, last + 1):
            pushed = {v for u in rest for v in pres.image(u, k + 1, j)}
            if in_principal(ch.at(j), pushed):
                return TriBool.out(k, evidence={"captured_level": j})
        # an earlier e_j in this ideal would drag its subordinate e_{k+1} in too
    # One-step order preservation does not survive composition in general;
    # for single-summand towers whose embeddings also keep diagonal blocks in
    # order it does, so every composed image of e_k is order preserving and no
    # later e_j can sit inside the ideal of a sibling subordinate.
    if assume_stationary and pres.stationary_period is not None and pres.ordered \
            and _period_window_ok(pres, ch.start_level, "locally_order_preserving") \
            and _period_window_ok(pres, ch.start_level, "position_ordered"):
        return TriBool.in_certified(evidence={"period": pres.stationary_period,
                                              "reason": "ordered, locally order preserving embeddings"})
    return TriBool.in_up_to(last)


@dataclass
class Truncation:
    level: int
    depth: int
    certified_out: frozenset
    certified_in: frozenset
    candidate_ideal: Ideal
    verdicts: dict = field(repr=False, default_factory=dict)

    @property
    def exact(self) -> bool:
        return len(self.certified_in) + len(self.certified_out) == len(self.verdicts)


def chain_ideal_truncation(pres: Presentation, ch: Chain, level: int, depth: int | None = None,
                           assume_stationary: bool = False) -> Truncation:
    alg = pres.algebra(level)
    verdicts = {f: chain_membership(pres, ch, f, level, depth, assume_stationary) for f in alg.units()}
    out = frozenset(f for f, v in verdicts.items() if v.is_out)
    cert = frozenset(f for f, v in verdicts.items() if v.status == "in_certified")
    cand = ideal_from_support(alg, [f for f in alg.units() if f not in out])
    return Truncation(level, _last(ch, depth), out, cert, cand, verdicts)


def truncation_tower(pres: Presentation, ch: Chain, depth: int | None = None) -> IdealTower:
    last = _last(ch, depth)
    return IdealTower(ch.start_level, tuple(
        chain_ideal_truncation(pres, ch, k, last).candidate_ideal for k in range(ch.start_level, last + 1)))


# -- extraction -------------------------------------------------------------------

@dataclass
class Extraction:
    chain: Chain
    contraction: Presentation
    indices: tuple[int, ...]


def _join_at(pres: Presentation, I_j: Ideal, e: MatrixUnit, k: int, j: int) -> Ideal:
    return join(I_j, pres.principal(e, k, j))


def extract_chain_from_ideal(pres: Presentation, tower: IdealTower, depth: int | None = None) -> Extraction:
    """Run the meet-irreducible chain construction on a truncated ideal tower.

    Starting at the first proper level, take the smallest minimal excluded
    generator.  From level k, form at each later level j the meet over all
    minimal excluded generators e of (I_j join Id_j(e)); the first level
    where this exceeds I_j is kept, and the next chain unit is the smallest
    minimal excluded generator of I_j inside it.
    """
    depth = tower.top_level if depth is None else depth
    if depth > tower.top_level or depth > pres.depth:
        raise DepthError(f"depth {depth} beyond tower levels {tower.base_level}..{tower.top_level}")
    k = next((l for l in range(tower.base_level, depth + 1) if not tower.at(l).is_top), None)
    if k is None:
        raise ExtractionError("tower is the whole algebra at every level", {"levels": []})
    indices = [k]
    units = [minimal_excluded_generators(pres.algebra(k), tower.at(k))[0]]
    while k < depth:
        gens = minimal_excluded_generators(pres.algebra(k), tower.at(k))
        found = None
        for j in range(k + 1, depth + 1):
            I_j = tower.at(j)
            if I_j.is_top:
                continue
            J_j = meet_all(pres.algebra(j), [_join_at(pres, I_j, e, k, j) for e in gens])
            if J_j != I_j:
                found = (j, J_j)
                break
        if found is None:
            raise ExtractionError(
                f"no level in {k + 1}..{depth} rises above the tower from level {k}",
                {"levels": indices, "units": [str(u) for u in units], "stalled_at": k})
        j, J_j = found
        nxt = [e for e in minimal_excluded_generators(pres.algebra(j), tower.at(j)) if e in J_j]
        indices.append(j)
        units.append(min(nxt))
        k = j
    con = contract(pres, indices)
    return Extraction(Chain(1, tuple(units)), con, tuple(indices))


# -- minimal intervals ---------------------------------------------------------------

@dataclass(frozen=True)
class MinimalInterval:
    lower: Ideal
    upper: Ideal
    cone_class: int
    maximal: bool


def mic_minimal_intervals(alg: DigraphAlgebra, bound: int | None = None) -> list[MinimalInterval]:
    """Covering pairs [I, J] grouped by cone {K : J <= K join I}."""
    ideals = list(enumerate_ideals(alg, bound))
    pairs = [(I, J) for I in ideals for J in covers(alg, I)]
    cones = {}
    for I, J in pairs:
        cones[(I, J)] = frozenset(K for K in ideals if leq(J, join(K, I)))
    classes: dict[frozenset, int] = {}
    for p in pairs:
        classes.setdefault(cones[p], len(classes))
    out = []
    for I, J in pairs:
        cid = classes[cones[(I, J)]]
        peers = [a for a, b in pairs if classes[cones[(a, b)]] == cid]
        maximal = all(leq(P, I) for P in peers)
        out.append(MinimalInterval(I, J, cid, maximal))
    return out


def hasse_dot(alg: DigraphAlgebra, bound: int | None = None) -> str:
    ideals = list(enumerate_ideals(alg, bound))
    name = {I: f"n{k}" for k, I in enumerate(ideals)}
    lines = ["digraph ideals {", "  rankdir=BT;"]
    for I in ideals:
        label = "{" + ",".join(str(u) for u in I.support()) + "}"
        lines.append(f'  {name[I]} [label="{label}"];')
    for I in ideals:
        for J in covers(alg, I):
            lines.append(f"  {name[I]} -> {name[J]};")
    lines.append("}")
    return "\n".join(lines)
