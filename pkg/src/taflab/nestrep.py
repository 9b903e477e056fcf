"""Finite-level nest representation on the points of an interval."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .fdcore import Ideal, MatrixUnit, ideal_from_support
from .spectrum import IntervalSpec, interval_ideal, q_set
from .tower import Presentation

EXHAUSTIVE_LIMIT = 14


@dataclass
class FiniteNestRep:
    basis: tuple[MatrixUnit, ...]
    action: dict = field(repr=False)  # A-unit -> 0/1 matrix on the basis
    level: int = 0

    @property
    def dim(self):
        return len(self.basis)

    def pi(self, e) -> np.ndarray:
        e = MatrixUnit(*e)
        if e.row > e.col:
            return self.action[e.star].T.copy()
        return self.action[e]

    def is_partial_permutation(self) -> bool:
        for m in self.action.values():
            if m.size and (m.sum(axis=0).max() > 1 or m.sum(axis=1).max() > 1):
                return False
        return True

    def to_json(self):
        return {"basis": [str(u) for u in self.basis],
                "action": {str(e): m.astype(int).tolist() for e, m in sorted(self.action.items())}}


def build_nest_rep(pres: Presentation, iv: IntervalSpec, level: int) -> FiniteNestRep:
    q = q_set(pres, iv, level)
    basis = tuple(sorted(u for u in q if u.is_diagonal))
    index = {u.row: k for k, u in enumerate(basis)}
    summand = iv.pair.chain.at(level).summand
    n = len(basis)
    action = {}
    for e in pres.algebra(level).units():
        m = np.zeros((n, n), dtype=np.int8)
        if e.summand == summand and e.row in index and e.col in index:
            m[index[e.row], index[e.col]] = 1
        action[e] = m
    return FiniteNestRep(basis, action, level)


def check_multiplicative(rep: FiniteNestRep, units) -> list:
    """Pairs (e, f) with pi(e) pi(f) != pi(ef); ef = 0 when the units do not compose."""
    bad = []
    zero = np.zeros((rep.dim, rep.dim), dtype=np.int8)
    for e in units:
        for f in units:
            prod = rep.pi(e) @ rep.pi(f)
            if e.summand == f.summand and e.col == f.row:
                want = rep.pi(MatrixUnit(e.summand, e.row, f.col))
            else:
                want = zero
            if not np.array_equal(prod, want):
                bad.append((e, f))
    return bad


def _invariant(rep: FiniteNestRep, subset: frozenset) -> bool:
    for m in rep.action.values():
        cols = [j for j in subset]
        if not cols:
            return True
        image = np.nonzero(m[:, cols].any(axis=1))[0]
        if any(i not in subset for i in image):
            return False
    return True


def invariant_subspace_lattice(rep: FiniteNestRep) -> list[tuple[int, ...]]:
    """Coordinate subspaces invariant under every pi(e), sorted by dimension.

    Small bases are searched exhaustively; larger ones check every prefix and
    confirm that all single vectors generate a prefix.
    """
    n = rep.dim
    if n <= EXHAUSTIVE_LIMIT:
        found = [tuple(sorted(s)) for r in range(n + 1)
                 for s in itertools.combinations(range(n), r) if _invariant(rep, frozenset(s))]
    else:
        found = [tuple(range(r)) for r in range(n + 1) if _invariant(rep, frozenset(range(r)))]
    found.sort(key=len)
    for s in found:
        if s != tuple(range(len(s))):
            raise AssertionError(f"invariant subspace {s} is not an initial segment")
    return found


def is_nest(subspaces) -> bool:
    sets = [set(s) for s in subspaces]
    return all(a <= b or b <= a for a, b in itertools.combinations(sets, 2))


@dataclass
class KernelReport:
    kernel: frozenset
    candidate: Ideal
    certified_out: frozenset
    equal: bool
    kernel_in_candidate: bool
    out_in_complement: bool

    def to_json(self):
        return {"kernel": sorted(str(u) for u in self.kernel), "equal": self.equal,
                "kernel_in_candidate": self.kernel_in_candidate,
                "certified_out_outside_kernel": self.out_in_complement}


def kernel_truncation(rep: FiniteNestRep, pres: Presentation, iv: IntervalSpec, level: int,
                      depth: int | None = None) -> KernelReport:
    depth = level if depth is None else depth
    kernel = frozenset(e for e, m in rep.action.items() if not m.any())
    tr = interval_ideal(pres, iv, level, depth)
    cand = tr.candidate_ideal.support_set()
    return KernelReport(kernel, tr.candidate_ideal, tr.certified_out, kernel == cand,
                        kernel <= cand, not (tr.certified_out & kernel))
