"""Ideal lattices of finite-dimensional digraph algebras.

A digraph algebra here is a direct sum T_{n_1} + ... + T_{n_r} of upper
triangular matrix algebras.  Its closed two-sided ideals are exactly the
"staircase" patterns: a set of matrix units closed under moving up a row or
right a column.  We store an ideal as one threshold vector per summand,
``c[s][i-1]`` being the first column that row ``i`` of summand ``s`` reaches.

All indices are 1-based, matching the usual e_{ij} notation.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple


class CoordinateError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    pass


class CapacityError(RuntimeError):
    pass


DEFAULT_MAX_IDEALS = 10**7


class MatrixUnit(NamedTuple):
    summand: int
    row: int
    col: int

    def __str__(self) -> str:
        return f"{self.summand}:{self.row}:{self.col}"

    @classmethod
    def parse(cls, text: str) -> "MatrixUnit":
        parts = text.strip().split(":")
        if len(parts) != 3:
            raise CoordinateError(f"matrix unit must look like 's:i:j', got {text!r}")
        try:
            s, i, j = (int(p) for p in parts)
        except ValueError:
            raise CoordinateError(f"non-integer matrix unit coordinate in {text!r}") from None
        return cls(s, i, j)

    @property
    def star(self) -> "MatrixUnit":
        return MatrixUnit(self.summand, self.col, self.row)

    @property
    def is_diagonal(self) -> bool:
        return self.row == self.col

    @property
    def range_unit(self) -> "MatrixUnit":
        """Diagonal unit e e^* (the range projection)."""
        return MatrixUnit(self.summand, self.row, self.row)

    @property
    def domain_unit(self) -> "MatrixUnit":
        """Diagonal unit e^* e (the initial projection)."""
        return MatrixUnit(self.summand, self.col, self.col)


def unit_product(e: MatrixUnit, f: MatrixUnit) -> MatrixUnit | None:
    """Product of two matrix units, or None when it vanishes."""
    if e.summand == f.summand and e.col == f.row:
        return MatrixUnit(e.summand, e.row, f.col)
    return None


@dataclass(frozen=True)
class DigraphAlgebra:
    summand_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.summand_sizes)
        if not sizes:
            raise ShapeError("a digraph algebra needs at least one summand")
        if any(n < 1 for n in sizes):
            raise ShapeError(f"summand sizes must be positive, got {sizes}")
        object.__setattr__(self, "summand_sizes", sizes)

    @property
    def num_summands(self) -> int:
        return len(self.summand_sizes)

    def size(self, summand: int) -> int:
        return self.summand_sizes[summand - 1]

    def units(self) -> list[MatrixUnit]:
        """All matrix units of A (row <= col) in (summand, row, col) order."""
        return [
            MatrixUnit(s, i, j)
            for s, n in enumerate(self.summand_sizes, 1)
            for i in range(1, n + 1)
            for j in range(i, n + 1)
        ]

    def diagonal(self) -> list[MatrixUnit]:
        return [MatrixUnit(s, i, i) for s, n in enumerate(self.summand_sizes, 1)
                for i in range(1, n + 1)]

    def dimension(self) -> int:
        return sum(n * (n + 1) // 2 for n in self.summand_sizes)

    def contains_unit(self, e: MatrixUnit, allow_lower: bool = False) -> bool:
        if not 1 <= e.summand <= self.num_summands:
            return False
        n = self.size(e.summand)
        if not (1 <= e.row <= n and 1 <= e.col <= n):
            return False
        return allow_lower or e.row <= e.col

    def check_unit(self, e: MatrixUnit, allow_lower: bool = False) -> MatrixUnit:
        e = MatrixUnit(*e)
        if not self.contains_unit(e, allow_lower):
            raise CoordinateError(f"{e} is not a matrix unit of {self}")
        return e

    def __str__(self) -> str:
        return " + ".join(f"T_{n}" for n in self.summand_sizes)


@dataclass(frozen=True)
class Ideal:
    """A closed two-sided ideal, stored as per-summand threshold vectors.

    ``(s, i, j)`` belongs to the ideal iff ``j >= thresholds[s-1][i-1]``.
    """

    algebra: DigraphAlgebra
    thresholds: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        th = tuple(tuple(int(c) for c in vec) for vec in self.thresholds)
        sizes = self.algebra.summand_sizes
        if len(th) != len(sizes):
            raise ShapeError(f"expected {len(sizes)} threshold vectors, got {len(th)}")
        for n, vec in zip(sizes, th):
            if len(vec) != n:
                raise ShapeError(f"threshold vector {vec} does not fit T_{n}")
            for i, c in enumerate(vec, 1):
                if not i <= c <= n + 1:
                    raise ShapeError(f"threshold {c} for row {i} out of range in T_{n}")
            if any(a > b for a, b in zip(vec, vec[1:])):
                raise ShapeError(f"threshold vector {vec} is not nondecreasing")
        object.__setattr__(self, "thresholds", th)

    def __contains__(self, e) -> bool:
        s, i, j = e
        return j >= self.thresholds[s - 1][i - 1]

    def support(self) -> list[MatrixUnit]:
        return [MatrixUnit(s, i, j)
                for s, vec in enumerate(self.thresholds, 1)
                for i, c in enumerate(vec, 1)
                for j in range(c, len(vec) + 1)]

    def support_set(self) -> frozenset[MatrixUnit]:
        return frozenset(self.support())

    def generators(self) -> list[MatrixUnit]:
        """The corner units; the ideal is the smallest one containing them."""
        out = []
        for s, vec in enumerate(self.thresholds, 1):
            n = len(vec)
            for i, c in enumerate(vec, 1):
                if c <= n and (i == n or vec[i] > c):
                    out.append(MatrixUnit(s, i, c))
        return out

    def codimension(self) -> int:
        return self.algebra.dimension() - len(self.support())

    @property
    def is_zero(self) -> bool:
        return all(c == len(vec) + 1 for vec in self.thresholds for c in vec)

    @property
    def is_top(self) -> bool:
        return all(c == i for vec in self.thresholds for i, c in enumerate(vec, 1))

    def __le__(self, other: "Ideal") -> bool:
        return leq(self, other)

    def to_json(self) -> dict:
        return {"thresholds": [list(v) for v in self.thresholds]}

    @classmethod
    def from_json(cls, alg: DigraphAlgebra, data: dict) -> "Ideal":
        return cls(alg, tuple(tuple(v) for v in data["thresholds"]))

    def __str__(self) -> str:
        units = ", ".join(str(e) for e in self.support())
        return "{" + units + "}"


def zero_ideal(alg: DigraphAlgebra) -> Ideal:
    return Ideal(alg, tuple((n + 1,) * n for n in alg.summand_sizes))


def top_ideal(alg: DigraphAlgebra) -> Ideal:
    return Ideal(alg, tuple(tuple(range(1, n + 1)) for n in alg.summand_sizes))


def ideal_from_generators(alg: DigraphAlgebra, gens: Iterable) -> Ideal:
    """Smallest ideal containing ``gens``: the staircase closure."""
    th = [[n + 1] * n for n in alg.summand_sizes]
    for g in gens:
        s, i, j = alg.check_unit(g)
        vec = th[s - 1]
        for r in range(1, i + 1):
            if vec[r - 1] > j:
                vec[r - 1] = j
    return Ideal(alg, tuple(tuple(v) for v in th))


def ideal_from_support(alg: DigraphAlgebra, units: Iterable) -> Ideal:
    """Ideal with exactly this support; raises if the set is not a staircase."""
    units = frozenset(MatrixUnit(*u) for u in units)
    ideal = ideal_from_generators(alg, units)
    if ideal.support_set() != units:
        raise DomainError("unit set is not closed under the ideal law")
    return ideal


def principal_ideal(alg: DigraphAlgebra, e) -> Ideal:
    return ideal_from_generators(alg, [e])


def largest_ideal_excluding(alg: DigraphAlgebra, e) -> Ideal:
    """The unique maximal ideal that misses the matrix unit ``e``."""
    s, r, c = alg.check_unit(e)
    th = []
    for t, n in enumerate(alg.summand_sizes, 1):
        if t != s:
            th.append(tuple(range(1, n + 1)))
        else:
            th.append(tuple(i if i < r else max(i, c + 1) for i in range(1, n + 1)))
    return Ideal(alg, tuple(th))


def _check_same(I: Ideal, J: Ideal):
    if I.algebra != J.algebra:
        raise ShapeError(f"ideals live in different algebras: {I.algebra} vs {J.algebra}")


def meet(I: Ideal, J: Ideal) -> Ideal:
    _check_same(I, J)
    return Ideal(I.algebra, tuple(tuple(map(max, a, b)) for a, b in zip(I.thresholds, J.thresholds)))


def join(I: Ideal, J: Ideal) -> Ideal:
    _check_same(I, J)
    return Ideal(I.algebra, tuple(tuple(map(min, a, b)) for a, b in zip(I.thresholds, J.thresholds)))


def leq(I: Ideal, J: Ideal) -> bool:
    _check_same(I, J)
    return all(a >= b for va, vb in zip(I.thresholds, J.thresholds) for a, b in zip(va, vb))


def meet_all(alg: DigraphAlgebra, ideals: Iterable[Ideal]) -> Ideal:
    out = top_ideal(alg)
    for I in ideals:
        out = meet(out, I)
    return out


def join_all(alg: DigraphAlgebra, ideals: Iterable[Ideal]) -> Ideal:
    out = zero_ideal(alg)
    for I in ideals:
        out = join(out, I)
    return out


@dataclass(frozen=True)
class LatticeOps:
    meet: Ideal
    join: Ideal
    leq: bool

    def contains_e(self, e) -> tuple[bool, bool]:
        """Membership of ``e`` in (meet, join)."""
        return e in self.meet, e in self.join


def lattice_ops(alg: DigraphAlgebra, I: Ideal, J: Ideal) -> LatticeOps:
    if I.algebra != alg or J.algebra != alg:
        raise ShapeError("ideal does not belong to the given algebra")
    return LatticeOps(meet(I, J), join(I, J), leq(I, J))


def _cover_steps(I: Ideal) -> Iterator[tuple[MatrixUnit, Ideal]]:
    th = I.thresholds
    for s, vec in enumerate(th, 1):
        for i, c in enumerate(vec, 1):
            new = c - 1
            if new < i:
                continue
            if i > 1 and vec[i - 2] > new:
                continue
            nv = vec[: i - 1] + (new,) + vec[i:]
            yield MatrixUnit(s, i, new), Ideal(I.algebra, th[: s - 1] + (nv,) + th[s:])


def covers(alg: DigraphAlgebra, I: Ideal) -> list[Ideal]:
    """Minimal ideals strictly above ``I``; each adds a single matrix unit."""
    return [J for _, J in _cover_steps(I)]


def minimal_excluded_generators(alg: DigraphAlgebra, I: Ideal) -> list[MatrixUnit]:
    """Units e such that every ideal strictly above I contains one of them."""
    if I.is_top:
        raise DomainError("the whole algebra has no proper extension")
    return sorted(e for e, _ in _cover_steps(I))


def is_meet_irreducible(alg: DigraphAlgebra, I: Ideal) -> bool:
    return I.is_top or len(covers(alg, I)) == 1


def _staircases(n: int) -> Iterator[tuple[int, ...]]:
    """Nondecreasing vectors c with i <= c_i <= n+1, lexicographic order."""
    vec = [0] * n

    def rec(i: int, lo: int):
        if i > n:
            yield tuple(vec)
            return
        for c in range(max(lo, i), n + 2):
            vec[i - 1] = c
            yield from rec(i + 1, c)

    yield from rec(1, 1)


def catalan(k: int) -> int:
    from math import comb
    return comb(2 * k, k) // (k + 1)


def ideal_count(alg: DigraphAlgebra) -> int:
    out = 1
    for n in alg.summand_sizes:
        out *= catalan(n + 1)
    return out


def max_ideals_bound() -> int:
    return int(os.environ.get("TAFLAB_MAX_IDEALS", DEFAULT_MAX_IDEALS))


def enumerate_ideals(alg: DigraphAlgebra, bound: int | None = None) -> Iterator[Ideal]:
    bound = max_ideals_bound() if bound is None else bound
    total = ideal_count(alg)
    if total > bound:
        raise CapacityError(f"{alg} has {total} ideals, more than the bound {bound}")
    per = [list(_staircases(n)) for n in alg.summand_sizes]
    for combo in itertools.product(*per):
        yield Ideal(alg, combo)
