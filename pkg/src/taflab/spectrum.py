"""Finite coordinates for the spectrum: points as diagonal paths, pairs as
subordinate chains, interval ideals, the sigma/tau ideals of an ordered
presentation, and integer cocycles.

Two kinds of points are supported.  A ``Point`` is a finite path of diagonal
units and only yields verdicts up to its length.  A ``DigitPoint`` describes
an eventually periodic path in a single-summand tower whose diagonal blocks
are laid out in order (refinement, nest): position ``(p - 1) * f + d + 1`` is
the d-th child of position p.  Digit points can be compared exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .chains import Chain, TriBool, Truncation, chain_membership, in_principal
from .fdcore import (
    DigraphAlgebra, Ideal, MatrixUnit, ideal_from_support, is_meet_irreducible, meet,
)
from .tower import ArgumentError, DepthError, Presentation, ValidationError


class UnsupportedOrderError(ValueError):
    pass


# -- points ---------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    path: tuple[MatrixUnit, ...]
    start_level: int = 1

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(MatrixUnit(*u) for u in self.path))

    @property
    def end_level(self):
        return self.start_level + len(self.path) - 1

    def at(self, level):
        if not self.start_level <= level <= self.end_level:
            raise DepthError(f"point known on levels {self.start_level}..{self.end_level}")
        return self.path[level - self.start_level]

    def to_json(self):
        return {"start_level": self.start_level, "units": [str(u) for u in self.path]}


@dataclass(frozen=True)
class DigitPoint:
    """Eventually periodic path: position ``first`` at level 1, then child digits."""
    first: int
    prefix: tuple[int, ...] = ()
    cycle: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.cycle:
            raise ArgumentError("cycle must be non-empty")
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))

    def digit(self, level: int) -> int:
        """Child digit used to step from level-1 to ``level`` (level >= 2)."""
        i = level - 2
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def digits(self, lo: int, count: int) -> tuple[int, ...]:
        return tuple(self.digit(k) for k in range(lo, lo + count))

    def position(self, level: int, factor: int) -> int:
        p = self.first
        for k in range(2, level + 1):
            p = (p - 1) * factor + self.digit(k) + 1
        return p

    def window(self, other: "DigitPoint") -> int:
        """Digits after which two eventually periodic tails have repeated."""
        return max(len(self.prefix), len(other.prefix)) + math.lcm(len(self.cycle), len(other.cycle))

    def to_json(self):
        return {"first": self.first, "prefix": list(self.prefix), "cycle": list(self.cycle)}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["first"]), tuple(data.get("prefix", ())), tuple(data.get("cycle", (0,))))


def _factor(pres: Presentation) -> int:
    if not pres.ordered:
        raise UnsupportedOrderError("presentation carries no diagonal order")
    if pres.depth < 2:
        return 1
    n1, n2 = pres.algebra(1).size(1), pres.algebra(2).size(1)
    f = n2 // n1
    for k in range(1, pres.depth):
        if pres.algebra(k + 1).size(1) != pres.algebra(k).size(1) * f:
            raise UnsupportedOrderError("digit points need a constant refinement factor")
    return f


def point_path(pres: Presentation, p, depth: int | None = None) -> Point:
    if isinstance(p, Point):
        return p
    depth = pres.depth if depth is None else depth
    f = _factor(pres)
    if not 1 <= p.first <= pres.algebra(1).size(1) or any(not 0 <= d < f for d in p.prefix + p.cycle):
        raise ArgumentError(f"digit point {p} does not fit factor {f}")
    return Point(tuple(MatrixUnit(1, q, q) for q in (p.position(k, f) for k in range(1, depth + 1))))


def make_point(pres: Presentation, units, start_level: int = 1) -> Point:
    pt = Point(tuple(units), start_level)
    if pt.end_level > pres.depth:
        raise DepthError("point path longer than the presentation")
    for k in range(pt.start_level, pt.end_level + 1):
        u = pres.algebra(k).check_unit(pt.at(k))
        if not u.is_diagonal:
            raise ValidationError(f"level {k}: {u} is not diagonal", [("diagonal", (f"level {k}",))])
        if k > pt.start_level and u not in pres.image(pt.at(k - 1), k - 1, k):
            raise ValidationError(f"level {k}: {u} is not a subordinate", [("subordinacy", (f"level {k}",))])
    return pt


@dataclass(frozen=True)
class PointPair:
    chain: Chain

    @property
    def x(self) -> Point:
        return Point(tuple(u.range_unit for u in self.chain.units), self.chain.start_level)

    @property
    def y(self) -> Point:
        return Point(tuple(u.domain_unit for u in self.chain.units), self.chain.start_level)

    def to_json(self):
        return self.chain.to_json()


def make_point_pair(pres: Presentation, chain) -> PointPair:
    if not isinstance(chain, Chain):
        chain = Chain(chain.get("start_level", 1), tuple(MatrixUnit.parse(u) if isinstance(u, str) else u
                                                          for u in chain["units"]))
    if chain.end_level > pres.depth:
        raise DepthError("chain longer than the presentation")
    for k in chain.levels():
        pres.algebra(k).check_unit(chain.at(k))
        if k > chain.start_level and chain.at(k) not in pres.image(chain.at(k - 1), k - 1, k):
            raise ValidationError(f"level {k}: {chain.at(k)} is not a subordinate of {chain.at(k - 1)}",
                                  [("subordinacy", (f"level {k}",))])
    return PointPair(chain)


@dataclass(frozen=True)
class IntervalSpec:
    pair: PointPair
    include_left: bool = True
    include_right: bool = True

    @property
    def closed(self):
        return self.include_left and self.include_right


# -- interval ideals ------------------------------------------------------------------

def _bounds(iv: IntervalSpec, s: MatrixUnit) -> tuple[int, int]:
    lo = s.row + (0 if iv.include_left else 1)
    hi = s.col - (0 if iv.include_right else 1)
    return lo, hi


def q_set(pres: Presentation, iv: IntervalSpec, level: int) -> frozenset:
    s = iv.pair.chain.at(level)
    lo, hi = _bounds(iv, s)
    return frozenset(MatrixUnit(s.summand, i, j) for i in range(lo, hi + 1) for j in range(i, hi + 1))


def interval_ideal(pres: Presentation, iv: IntervalSpec, level: int, depth: int | None = None,
                   assume_stationary: bool = False) -> Truncation:
    """Units at ``level`` none of whose subordinates (through ``depth``) fall in the rectangle."""
    ch = iv.pair.chain
    last = ch.end_level if depth is None else depth
    if last > ch.end_level or last > pres.depth:
        raise DepthError(f"depth {last} beyond the chain (ends at {ch.end_level})")
    if not ch.start_level <= level <= last:
        raise DepthError(f"level {level} outside {ch.start_level}..{last}")
    verdicts = {}
    for f in pres.algebra(level).units():
        if iv.closed:
            verdicts[f] = chain_membership(pres, ch, f, level, last, assume_stationary)
            continue
        v = TriBool.in_up_to(last)
        for k in range(level, last + 1):
            s = ch.at(k)
            lo, hi = _bounds(iv, s)
            if any(g.summand == s.summand and lo <= g.row and g.col <= hi
                   for g in pres.image(f, level, k)):
                v = TriBool.out(k)
                break
        verdicts[f] = v
    alg = pres.algebra(level)
    out = frozenset(f for f, v in verdicts.items() if v.is_out)
    cert = frozenset(f for f, v in verdicts.items() if v.status == "in_certified")
    cand = ideal_from_support(alg, [f for f in alg.units() if f not in out])
    return Truncation(level, last, out, cert, cand, verdicts)


# -- order ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    kind: str  # LT | GT | EQ | UNKNOWN_AT
    level: int | None = None

    def __str__(self):
        return self.kind if self.level is None else f"{self.kind}:{self.level}"


def _lex(a: DigitPoint, b: DigitPoint, lo: int = 2) -> int:
    """Compare digit tails from level ``lo`` on: -1, 0 or 1."""
    n = a.window(b) + max(0, 2 - lo) + 1
    for k in range(lo, lo + n):
        da, db = a.digit(k), b.digit(k)
        if da != db:
            return -1 if da < db else 1
    return 0


def order_compare(pres: Presentation, a, b, depth: int | None = None) -> Comparison:
    _factor(pres)
    if isinstance(a, DigitPoint) and isinstance(b, DigitPoint):
        if a.first != b.first:
            return Comparison("LT" if a.first < b.first else "GT", 1)
        n = a.window(b) + 2
        for k in range(2, n + 2):
            if a.digit(k) != b.digit(k):
                return Comparison("LT" if a.digit(k) < b.digit(k) else "GT", k)
        return Comparison("EQ")
    depth = pres.depth if depth is None else depth
    pa, pb = point_path(pres, a, depth), point_path(pres, b, depth)
    lo = max(pa.start_level, pb.start_level)
    hi = min(depth, pa.end_level, pb.end_level)
    for k in range(lo, hi + 1):
        x, y = pa.at(k).row, pb.at(k).row
        if x != y:
            return Comparison("LT" if x < y else "GT", k)
    if pa == pb:
        return Comparison("EQ")
    return Comparison("UNKNOWN_AT", hi)


# -- sigma and tau --------------------------------------------------------------------------

@dataclass
class SigmaTau:
    variant: str
    level: int
    depth: int
    certified_in: frozenset
    certified_out: frozenset
    unknown: frozenset
    candidate_ideal: Ideal

    @property
    def exact(self):
        return not self.unknown


def _is_refinement(pres):
    return pres.builder is not None and pres.builder.get("kind") == "refinement"


def _corner_status(pres, a, b, depth, variant) -> str:
    """Verdict for a depth-level unit sitting exactly at (pos a, pos b)."""
    if isinstance(a, DigitPoint) and isinstance(b, DigitPoint):
        c = _lex(a, b, depth + 1)
        pinned = c == 0 and _eventually_equal(a, b)
        if _is_refinement(pres):
            # the shift between two cylinders preserves order, so only the tails matter
            if c > 0:
                return "in"
            if c == 0:
                return "in" if variant == "tau" else "out"
            return "out"
        if pinned and variant == "sigma":
            return "out"
    return "unknown"


def _eventually_equal(a: DigitPoint, b: DigitPoint) -> bool:
    start = max(len(a.prefix), len(b.prefix)) + 2
    return all(a.digit(k) == b.digit(k) for k in range(start, start + math.lcm(len(a.cycle), len(b.cycle))))


def sigma_tau_ab(pres: Presentation, a, b, level: int, depth: int | None = None,
                 variant: str = "sigma") -> SigmaTau:
    """Truncation of {(x,y) : x < a or b < y} (sigma) or that set plus (a,b) (tau)."""
    if variant not in ("sigma", "tau"):
        raise ArgumentError("variant must be 'sigma' or 'tau'")
    f = _factor(pres)
    depth = pres.depth if depth is None else depth
    if not 1 <= level <= depth <= pres.depth:
        raise DepthError(f"need 1 <= level <= depth <= {pres.depth}")
    pa, pb = point_path(pres, a, depth), point_path(pres, b, depth)
    A, B = pa.at(depth).row, pb.at(depth).row
    corner = None
    cin, cout, unk = set(), set(), set()
    for u in pres.algebra(level).units():
        states = set()
        for g in pres.image(u, level, depth):
            r, c = g.row, g.col
            if r < A or c > B:
                states.add("in")
            elif (r, c) != (A, B):
                states.add("out")
            else:
                if corner is None:
                    corner = _corner_status(pres, a, b, depth, variant)
                states.add(corner)
            if "out" in states:
                break
        if "out" in states:
            cout.add(u)
        elif states == {"in"}:
            cin.add(u)
        else:
            unk.add(u)
    alg = pres.algebra(level)
    cand = ideal_from_support(alg, cin)
    return SigmaTau(variant, level, depth, frozenset(cin), frozenset(cout), frozenset(unk), cand)


def sigma_tau_tower(pres, a, b, depth=None, variant="sigma") -> list[Ideal]:
    depth = pres.depth if depth is None else depth
    return [sigma_tau_ab(pres, a, b, k, depth, variant).candidate_ideal for k in range(1, depth + 1)]


# -- point pair classification -----------------------------------------------------------

def gap_above(pres: Presentation, a: DigitPoint) -> bool:
    f = _factor(pres)
    top = f - 1
    if set(a.cycle) != {top}:
        return False
    is_max = a.first == pres.algebra(1).size(1) and all(d == top for d in a.prefix)
    return not is_max


def gap_below(pres: Presentation, b: DigitPoint) -> bool:
    _factor(pres)
    if set(b.cycle) != {0}:
        return False
    is_min = b.first == 1 and all(d == 0 for d in b.prefix)
    return not is_min


def successor(pres: Presentation, a: DigitPoint) -> DigitPoint:
    """Immediate successor of a point whose digits end in all-maximal."""
    f = _factor(pres)
    if not gap_above(pres, a):
        raise ArgumentError("point has no immediate successor")
    digits = list(a.prefix)
    while digits and digits[-1] == f - 1:
        digits.pop()
    if digits:
        digits[-1] += 1
        return DigitPoint(a.first, tuple(digits), (0,))
    return DigitPoint(a.first + 1, (), (0,))


def predecessor(pres: Presentation, b: DigitPoint) -> DigitPoint:
    f = _factor(pres)
    if not gap_below(pres, b):
        raise ArgumentError("point has no immediate predecessor")
    digits = list(b.prefix)
    while digits and digits[-1] == 0:
        digits.pop()
    if digits:
        digits[-1] -= 1
        return DigitPoint(b.first, tuple(digits), (f - 1,))
    return DigitPoint(b.first - 1, (), (f - 1,))


@dataclass
class Classification:
    sigma: str           # "1" | "2" | "top" | "not_MI" | "unknown"
    tau: str             # "3" | "top" | "not_MI" | "equals_sigma" | "unknown"
    in_P: bool | None
    gap_above_a: bool | None
    gap_below_b: bool | None
    certified: bool
    decomposition: dict | None = None

    def to_json(self):
        out = {"sigma": self.sigma, "tau": self.tau, "in_P": self.in_P,
               "gap_above_a": self.gap_above_a, "gap_below_b": self.gap_below_b,
               "certainty": "certified" if self.certified else "unknown"}
        if self.decomposition is not None:
            out["decomposition"] = {k: [I.to_json() for I in v] if isinstance(v, list) else v
                                    for k, v in self.decomposition.items()}
        return out


def _decompose(pres, a, b, depth, variant):
    """sigma (or tau) = rho1 meet rho2 with rho1 = sigma(a+, b), rho2 = sigma(a, b-)."""
    target = sigma_tau_tower(pres, a, b, depth, variant)
    rho1 = sigma_tau_tower(pres, successor(pres, a), b, depth, "sigma")
    rho2 = sigma_tau_tower(pres, a, predecessor(pres, b), depth, "sigma")
    meets = all(meet(x, y) == t for x, y, t in zip(rho1, rho2, target))
    strict = rho1[-1] != target[-1] and rho2[-1] != target[-1]
    return {"target": target, "rho1": rho1, "rho2": rho2, "meet_verified": meets,
            "strictly_larger": strict}


def classify_theorem_3_1(pres: Presentation, a, b, depth: int | None = None) -> Classification:
    _factor(pres)
    depth = pres.depth if depth is None else depth
    exact = (isinstance(a, DigitPoint) and isinstance(b, DigitPoint)
             and _is_refinement(pres) and pres.stationary_period is not None)
    cmp = order_compare(pres, a, b, depth)
    if not exact:
        if cmp.kind == "GT":
            return Classification("top", "top", None, None, None, True)
        return Classification("unknown", "unknown", None, None, None, False)
    if cmp.kind == "GT":
        return Classification("top", "top", False, None, None, True)
    if cmp.kind == "EQ":
        return Classification("1", "top", True, None, None, True)
    in_p = _eventually_equal(a, b)
    ga, gb = gap_above(pres, a), gap_below(pres, b)
    both = ga and gb
    if in_p:
        # in a refinement tower tau is always open
        tau = "not_MI" if both else "3"
        dec = _decompose(pres, a, b, depth, "tau") if both else None
        return Classification("1", tau, True, ga, gb, True, dec)
    sigma = "not_MI" if both else "2"
    dec = _decompose(pres, a, b, depth, "sigma") if both else None
    return Classification(sigma, "equals_sigma", False, ga, gb, True, dec)


def tower_looks_mi(pres: Presentation, tower: Sequence[Ideal], upto: int) -> bool:
    """Pairwise test: any two units missing from level k <= upto share a missing unit later.

    For u, v outside I_k this searches levels m in k..depth for a unit of
    Id_m(u) meet Id_m(v) outside I_m, which witnesses that (I + <u>) and
    (I + <v>) still meet above I.
    """
    depth = len(tower)
    for k in range(1, upto + 1):
        I_k = tower[k - 1]
        if I_k.is_top:
            continue
        missing = [u for u in pres.algebra(k).units() if u not in I_k]
        for i, u in enumerate(missing):
            for v in missing[i + 1:]:
                if not any(_meet_escapes(pres, u, v, k, m, tower[m - 1]) for m in range(k, depth + 1)):
                    return False
    return True


def _meet_escapes(pres, u, v, k, m, I_m) -> bool:
    both = meet(pres.principal(u, k, m), pres.principal(v, k, m))
    return not (both <= I_m)


# -- cocycles ---------------------------------------------------------------------------------

@dataclass
class Cocycle:
    labels: dict  # level -> {MatrixUnit: int} on A-units

    def eval(self, e, level: int) -> int:
        e = MatrixUnit(*e)
        if e.is_diagonal:
            return 0
        if e.row > e.col:
            return -self.labels[level][e.star]
        return self.labels[level][e]

    def to_json(self):
        return {"labels": {str(k): {str(e): v for e, v in sorted(m.items())} for k, m in self.labels.items()}}

    @classmethod
    def from_json(cls, data):
        return cls({int(k): {MatrixUnit.parse(e): int(v) for e, v in m.items()}
                    for k, m in data["labels"].items()})


def displacement_cocycle(pres: Presentation) -> Cocycle:
    """Label each unit by col - row; embedding-constant exactly for block-copy towers."""
    return Cocycle({k: {e: e.col - e.row for e in pres.algebra(k).units()} for k in range(1, pres.depth + 1)})


@dataclass
class CocycleReport:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def validate_cocycle(pres: Presentation, c: Cocycle, depth: int | None = None) -> CocycleReport:
    depth = pres.depth if depth is None else depth
    fails = []
    for k in range(1, depth + 1):
        units = pres.algebra(k).units()
        lab = c.labels.get(k)
        if lab is None or any(u not in lab for u in units):
            fails.append(("missing labels", f"level {k}"))
            continue
        for u in units:
            if u.is_diagonal and lab[u] != 0:
                fails.append(("diagonal not zero", f"{k}:{u}"))
        for e in units:
            for f in units:
                if e.summand == f.summand and e.col == f.row:
                    ef = MatrixUnit(e.summand, e.row, f.col)
                    if lab[e] + lab[f] != lab[ef]:
                        fails.append(("additivity", f"{k}:{e}*{f}"))
        if k < depth:
            nxt = c.labels.get(k + 1, {})
            for e in units:
                if any(nxt.get(g) != lab[e] for g in pres.image(e, k, k + 1)):
                    fails.append(("not constant on images", f"{k}:{e}"))
    return CocycleReport(not fails, fails)


@dataclass
class FinitenessReport:
    verdict: str  # "finite" | "infinite" | "unknown"
    running_max: list
    certified: bool

    def to_json(self):
        return {"verdict": self.verdict, "running_max": self.running_max, "certified": self.certified}


def interval_is_finite(pres: Presentation, c: Cocycle, iv: IntervalSpec, depth: int | None = None,
                       assume_stationary: bool = False) -> FinitenessReport:
    """Running maximum of |c| over the interval rectangles, level by level."""
    ch = iv.pair.chain
    depth = ch.end_level if depth is None else min(depth, ch.end_level)
    run, best = [], 0
    for k in range(ch.start_level, depth + 1):
        vals = [abs(c.eval(u, k)) for u in q_set(pres, iv, k)]
        best = max([best] + vals)
        run.append(best)
    p = pres.stationary_period
    if assume_stationary and p is not None and len(run) > p:
        tail = run[-(p + 1):]
        if len(set(tail)) == 1:
            return FinitenessReport("finite", run, True)
        if all(x < y for x, y in zip(tail, tail[1:])):
            return FinitenessReport("infinite", run, True)
    return FinitenessReport("unknown", run, False)


def interval_monotone(pres: Presentation, iv: IntervalSpec, depth: int | None = None) -> dict:
    """Whether the interval reaches the right end (increasing) or left end (decreasing) at each level."""
    ch = iv.pair.chain
    depth = ch.end_level if depth is None else min(depth, ch.end_level)
    inc = dec = True
    for k in range(ch.start_level, depth + 1):
        s = ch.at(k)
        n = pres.algebra(k).size(s.summand)
        inc &= s.col == n and iv.include_right
        dec &= s.row == 1 and iv.include_left
    return {"increasing": inc, "decreasing": dec, "either": inc or dec}
