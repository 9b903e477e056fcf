"""Presentations: towers of digraph algebras joined by matrix-unit embeddings.

Levels are numbered from 1, as in A_1 -> A_2 -> ...  An embedding is stored
extensionally as the map sending each matrix unit of the source to the set of
target matrix units whose sum is its image.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .fdcore import (
    CoordinateError, DigraphAlgebra, Ideal, MatrixUnit, ShapeError,
    ideal_from_generators, largest_ideal_excluding, unit_product, zero_ideal,
)


class ValidationError(ValueError):
    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class DepthError(ValueError):
    pass


class ArgumentError(ValueError):
    pass


UnitSet = frozenset  # frozenset[MatrixUnit]


@dataclass(frozen=True)
class Embedding:
    source: DigraphAlgebra
    target: DigraphAlgebra
    images: Mapping[MatrixUnit, UnitSet] = field(repr=False)

    def image(self, e) -> UnitSet:
        e = MatrixUnit(*e)
        if e.row <= e.col:
            return self.images[e]
        return frozenset(u.star for u in self.images[e.star])


@dataclass
class Report:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok,
                "failures": [{"axiom": a, "witness": [str(w) for w in ws]} for a, ws in self.failures]}


def _is_partial_isometry(units: Iterable[MatrixUnit]) -> bool:
    units = list(units)
    rows = [(u.summand, u.row) for u in units]
    cols = [(u.summand, u.col) for u in units]
    return len(set(rows)) == len(rows) and len(set(cols)) == len(cols)


def set_product(a: Iterable[MatrixUnit], b: Iterable[MatrixUnit]) -> frozenset:
    out = set()
    for x in a:
        for y in b:
            p = unit_product(x, y)
            if p is not None:
                out.add(p)
    return frozenset(out)


def validate_embedding(emb: Embedding) -> Report:
    """Check the matrix-unit axioms; every violated axiom is reported with a witness."""
    fails = []
    src, tgt = emb.source, emb.target
    units = src.units()
    for e in units:
        img = emb.images.get(e)
        if not img:
            fails.append(("missing image", (e,)))
            continue
        bad = [u for u in img if not tgt.contains_unit(u)]
        if bad:
            fails.append(("image outside target A", (e, bad[0])))
        if not _is_partial_isometry(img):
            fails.append(("image not a partial isometry", (e,)))
    if fails:
        return Report(False, fails)

    diag = src.diagonal()
    seen: dict[MatrixUnit, MatrixUnit] = {}
    for d in diag:
        for u in emb.images[d]:
            if not u.is_diagonal:
                fails.append(("diagonal image not diagonal", (d, u)))
            if u in seen:
                fails.append(("diagonal images overlap", (seen[u], d, u)))
            seen[u] = d
    missing = [u for u in tgt.diagonal() if u not in seen]
    if missing:
        fails.append(("diagonal images do not partition target diagonal", (missing[0],)))

    for e in units:
        img = emb.images[e]
        rows = {u.range_unit for u in img}
        cols = {u.domain_unit for u in img}
        if rows != emb.images[e.range_unit] or cols != emb.images[e.domain_unit]:
            fails.append(("range/domain mismatch", (e,)))

    by_row: dict[tuple[int, int], list[MatrixUnit]] = {}
    for f in units:
        by_row.setdefault((f.summand, f.row), []).append(f)
    for e in units:
        for f in by_row.get((e.summand, e.col), ()):
            ef = MatrixUnit(e.summand, e.row, f.col)
            if set_product(emb.images[e], emb.images[f]) != emb.images[ef]:
                fails.append(("multiplicativity", (e, f)))
    return Report(not fails, fails)


def push_ideal(emb: Embedding, I: Ideal) -> Ideal:
    if I.algebra != emb.source:
        raise ShapeError("ideal does not live in the embedding source")
    gens = [u for g in I.generators() for u in emb.images[g]]
    return ideal_from_generators(emb.target, gens)


def restrict_ideal(emb: Embedding, J: Ideal) -> Ideal:
    if J.algebra != emb.target:
        raise ShapeError("ideal does not live in the embedding target")
    keep = [e for e in emb.source.units() if all(u in J for u in emb.images[e])]
    return ideal_from_generators(emb.source, keep)


def compose(first: Embedding, second: Embedding) -> Embedding:
    if first.target != second.source:
        raise ShapeError("embeddings are not composable")
    images = {e: frozenset(v for u in img for v in second.images[u])
              for e, img in first.images.items()}
    return Embedding(first.source, second.target, images)


# -- order preservation -------------------------------------------------------

def is_order_preserving(alg: DigraphAlgebra, v: Iterable, order=None) -> bool:
    """True when no two units (x,y), (u,w) of v satisfy x <= u <= w <= y.

    ``order`` may supply a per-summand key for diagonal positions; position
    order is used by default.
    """
    v = [alg.check_unit(u) for u in v]
    if not _is_partial_isometry(v):
        raise ArgumentError("unit set is not a partial isometry")
    key = order or (lambda s, i: i)
    for (a, b) in itertools.permutations(v, 2):
        if a.summand != b.summand:
            continue
        s = a.summand
        if key(s, a.row) <= key(s, b.row) <= key(s, b.col) <= key(s, a.col):
            return False
    return True


def is_locally_order_preserving(emb: Embedding) -> bool:
    return all(is_order_preserving(emb.target, emb.images[e]) for e in emb.source.units())


def is_subordinate_exact(emb: Embedding) -> bool:
    """No subordinate of a unit u lies in the push of the largest ideal missing u.

    Equivalently: for every ideal J and unit u of the source, if some
    subordinate of u lands in push(J) then u is already in J.
    """
    for u in emb.source.units():
        pushed = push_ideal(emb, largest_ideal_excluding(emb.source, u))
        if any(w in pushed for w in emb.images[u]):
            return False
    return True


def is_position_ordered(emb: Embedding) -> bool:
    """Image of every diagonal position lies strictly before the next one's.

    This is the nest condition: the embedding carries invariant projections
    (initial segments) to invariant projections, summand by summand.
    """
    src = emb.source
    for s, n in enumerate(src.summand_sizes, 1):
        spans: dict[int, list[tuple[int, int]]] = {}
        for i in range(1, n + 1):
            for u in emb.images[MatrixUnit(s, i, i)]:
                spans.setdefault(u.summand, []).append((i, u.row))
        for t, pairs in spans.items():
            by_i: dict[int, list[int]] = {}
            for i, r in pairs:
                by_i.setdefault(i, []).append(r)
            idx = sorted(by_i)
            for a, b in zip(idx, idx[1:]):
                if max(by_i[a]) >= min(by_i[b]):
                    return False
    return True


def multiplicity_matrix(emb: Embedding) -> tuple[tuple[int, ...], ...]:
    rows = []
    for s in range(1, emb.source.num_summands + 1):
        counts = [0] * emb.target.num_summands
        for u in emb.images[MatrixUnit(s, 1, 1)]:
            counts[u.summand - 1] += 1
        rows.append(tuple(counts))
    return tuple(rows)


# -- presentations --------------------------------------------------------------

@dataclass(frozen=True)
class Presentation:
    levels: tuple[DigraphAlgebra, ...]
    embeddings: tuple[Embedding, ...] = field(repr=False)
    stationary_period: int | None = None
    relabeling: tuple[int, ...] | None = None
    ordered: bool = False
    builder: Mapping | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def algebra(self, level: int) -> DigraphAlgebra:
        self.check_level(level)
        return self.levels[level - 1]

    def embedding(self, level: int) -> Embedding:
        """The embedding A_level -> A_{level+1}."""
        if not 1 <= level < self.depth:
            raise DepthError(f"no embedding out of level {level} (depth {self.depth})")
        return self.embeddings[level - 1]

    def check_level(self, level: int):
        if not 1 <= level <= self.depth:
            raise DepthError(f"level {level} outside 1..{self.depth}")

    def image(self, e, src: int, dst: int) -> frozenset:
        """Subordinates of ``e`` (a unit at level ``src``) at level ``dst``."""
        e = MatrixUnit(*e)
        if dst < src:
            raise ArgumentError("cannot map a unit to a lower level")
        self.check_level(dst)
        key = ("img", e, src, dst)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if dst == src:
            out = frozenset([e])
        else:
            prev = self.image(e, src, dst - 1)
            emb = self.embedding(dst - 1)
            out = frozenset(v for u in prev for v in emb.image(u))
        self._cache[key] = out
        return out

    def push(self, I: Ideal, src: int, dst: int) -> Ideal:
        for k in range(src, dst):
            I = push_ideal(self.embedding(k), I)
        return I

    def restrict(self, J: Ideal, src: int, dst: int) -> Ideal:
        """Restrict an ideal at level ``src`` down to level ``dst <= src``."""
        for k in range(src - 1, dst - 1, -1):
            J = restrict_ideal(self.embedding(k), J)
        return J

    def principal(self, e, src: int, dst: int) -> Ideal:
        """Id_dst(e) for a unit e of A_src."""
        e = self.algebra(src).check_unit(e)
        key = ("id", e, src, dst)
        hit = self._cache.get(key)
        if hit is None:
            hit = ideal_from_generators(self.algebra(dst), self.image(e, src, dst))
            self._cache[key] = hit
        return hit

    def embedding_signature(self, level: int) -> tuple:
        key = ("sig", level)
        if key not in self._cache:
            emb = self.embedding(level)
            self._cache[key] = (
                multiplicity_matrix(emb),
                is_locally_order_preserving(emb),
                is_subordinate_exact(emb),
                is_position_ordered(emb),
            )
        return self._cache[key]

    def all_embeddings_have(self, prop: str, start: int = 1) -> bool:
        pos = {"locally_order_preserving": 1, "subordinate_exact": 2, "position_ordered": 3}[prop]
        return all(self.embedding_signature(k)[pos] for k in range(start, self.depth))

    def to_json(self) -> dict:
        if self.builder is not None:
            out = {"builder": dict(self.builder), "depth": self.depth}
        else:
            out = {"levels": [list(a.summand_sizes) for a in self.levels],
                   "images": {str(k): {str(e): [str(u) for u in sorted(img)]
                                       for e, img in sorted(emb.images.items())}
                              for k, emb in enumerate(self.embeddings, 1)}}
        if self.stationary_period is not None:
            out["stationary_period"] = self.stationary_period
        if self.ordered and self.builder is None:
            out["ordered"] = True
        return out


@dataclass(frozen=True)
class IdealTower:
    base_level: int
    ideals: tuple[Ideal, ...]

    @property
    def top_level(self) -> int:
        return self.base_level + len(self.ideals) - 1

    def at(self, level: int) -> Ideal:
        if not self.base_level <= level <= self.top_level:
            raise DepthError(f"tower covers levels {self.base_level}..{self.top_level}")
        return self.ideals[level - self.base_level]

    def to_json(self):
        return {"base_level": self.base_level, "ideals": [I.to_json() for I in self.ideals]}


def validate_presentation(pres: Presentation) -> Report:
    fails = []
    if len(pres.embeddings) != len(pres.levels) - 1:
        fails.append(("level/embedding count mismatch", ()))
    for k, emb in enumerate(pres.embeddings, 1):
        if emb.source != pres.levels[k - 1] or emb.target != pres.levels[k]:
            fails.append(("embedding endpoints", (f"level {k}",)))
            continue
        rep = validate_embedding(emb)
        fails.extend((f"level {k}: {a}", w) for a, w in rep.failures)
    if not fails and pres.ordered:
        for k in range(1, pres.depth):
            if pres.algebra(k).num_summands != 1 or not pres.embedding_signature(k)[3]:
                fails.append(("declared order not preserved", (f"level {k}",)))
        if pres.algebra(pres.depth).num_summands != 1:
            fails.append(("declared order needs a single summand", (f"level {pres.depth}",)))
    if not fails and pres.stationary_period is not None:
        fails.extend(stationarity_failures(pres, pres.stationary_period, pres.relabeling))
    return Report(not fails, fails)


def stationarity_failures(pres: Presentation, period: int, relabeling=None) -> list:
    """Check that the embedding pattern repeats with the declared period.

    Sizes grow along a tower, so "repeats" means: the multiplicity matrix of
    embedding k+p equals that of embedding k after relabeling summands, and
    the structural properties consumed by certificates (local order
    preservation, subordinate exactness, position order) coincide.
    """
    if period < 1:
        return [("stationary period must be positive", ())]
    fails = []
    for k in range(1, pres.depth - period):
        if all(n == 1 for n in pres.algebra(k).summand_sizes):
            continue  # order flags hold vacuously out of 1x1 summands
        a = pres.embedding_signature(k)
        b = pres.embedding_signature(k + period)
        ma, mb = a[0], b[0]
        if relabeling is not None:
            perm = [r - 1 for r in relabeling]
            if len(perm) != len(ma) or len(ma) != len(ma[0]):
                return [("relabeling does not fit summands", (f"level {k}",))]
            ma = tuple(tuple(ma[perm[s]][perm[t]] for t in range(len(ma[0]))) for s in range(len(ma)))
        if ma != mb or a[1:] != b[1:]:
            fails.append(("stationarity", (f"levels {k} and {k + period}",)))
    return fails


# -- builders ---------------------------------------------------------------------

def _rule_embedding(src: DigraphAlgebra, tgt: DigraphAlgebra, position_map) -> Embedding:
    """Build an embedding from ``position_map(s, i) -> [(t, pos), ...]``.

    The a-th copy of row i is paired with the a-th copy of column j within
    each target summand, which gives a multiplicative map.
    """
    images = {}
    for e in src.units():
        rows = position_map(e.summand, e.row)
        cols = position_map(e.summand, e.col)
        images[e] = frozenset(MatrixUnit(t, r, c) for (t, r), (_, c) in zip(rows, cols))
    return Embedding(src, tgt, images)


def refinement(base: int, factor: int, depth: int) -> Presentation:
    """T_m -> T_{mf} -> ..., each unit e_ij going to e_ij (x) I_f."""
    def rule(n):
        return lambda s, i: [(1, (i - 1) * factor + a) for a in range(1, factor + 1)]
    return _single_summand_tower("refinement", base, factor, depth, rule, ordered=True)


def standard(base: int, factor: int, depth: int) -> Presentation:
    """T_m -> T_{mf} -> ..., each unit e_ij going to I_f (x) e_ij."""
    def rule(n):
        return lambda s, i: [(1, a * n + i) for a in range(factor)]
    return _single_summand_tower("standard", base, factor, depth, rule, ordered=False)


def nest(base: int, factor: int, depth: int, perms=None, seed: int | None = None) -> Presentation:
    """Full nest embeddings: copies of row i occupy block i, paired by permutations.

    ``perms[k-1][i-1]`` permutes the f copies of index i at level k; when
    omitted they are drawn from ``seed`` (identity everywhere if seed is None).
    """
    rng = random.Random(seed)
    sizes = [base * factor ** k for k in range(depth)]
    if perms is None:
        perms = []
        for n in sizes[:-1]:
            level = []
            for _ in range(n):
                p = list(range(factor))
                if seed is not None:
                    rng.shuffle(p)
                level.append(p)
            perms.append(level)
    perms = [[list(p) for p in lvl] for lvl in perms]
    if len(perms) < depth - 1:
        raise ArgumentError("not enough permutation levels for the requested depth")
    for k, n in enumerate(sizes[:-1]):
        if len(perms[k]) != n or any(sorted(p) != list(range(factor)) for p in perms[k]):
            raise ArgumentError(f"permutations at level {k + 1} must permute range({factor}) for each of {n} rows")

    def rule_for(k):
        return lambda s, i: [(1, (i - 1) * factor + perms[k][i - 1][a] + 1) for a in range(factor)]

    levels = tuple(DigraphAlgebra((n,)) for n in sizes)
    embs = tuple(_rule_embedding(levels[k], levels[k + 1], rule_for(k)) for k in range(depth - 1))
    spec = {"kind": "nest", "base": base, "factor": factor, "perms": perms[: depth - 1]}
    return Presentation(levels, embs, ordered=True, builder=spec)


def _single_summand_tower(kind, base, factor, depth, rule, ordered):
    if base < 1 or factor < 1 or depth < 1:
        raise ArgumentError("base, factor and depth must be positive")
    sizes = [base * factor ** k for k in range(depth)]
    levels = tuple(DigraphAlgebra((n,)) for n in sizes)
    embs = tuple(_rule_embedding(levels[k], levels[k + 1], rule(sizes[k])) for k in range(depth - 1))
    return Presentation(levels, embs, stationary_period=1, ordered=ordered,
                        builder={"kind": kind, "base": base, "factor": factor})


# Two-summand block pattern: a source block (summand, half) lands in block
# ``slot`` of each target summand; halves are 0 (upper-left) and 1.
_EX13_SLOTS = {
    (1, 0): (0, 1),   # A
    (1, 1): (3, 2),   # C
    (2, 0): (1, 0),   # D
    (2, 1): (2, 3),   # F
}


def example_1_3(depth: int) -> Presentation:
    """A_n = T_{2^n} + T_{2^n} with the block matrix map of the two-summand example."""
    if depth < 1:
        raise ArgumentError("depth must be positive")
    levels = tuple(DigraphAlgebra((2 ** n, 2 ** n)) for n in range(1, depth + 1))

    def rule_for(n):
        h = 2 ** (n - 1)

        def rule(s, i):
            half, r = divmod(i - 1, h)
            slots = _EX13_SLOTS[(s, half)]
            return [(t, slots[t - 1] * h + r + 1) for t in (1, 2)]
        return rule

    embs = tuple(_rule_embedding(levels[k], levels[k + 1], rule_for(k + 1)) for k in range(depth - 1))
    return Presentation(levels, embs, stationary_period=1, builder={"kind": "example_1_3"})


def custom(levels: Sequence[Sequence[int]], images: Mapping, ordered=False,
           stationary_period=None, relabeling=None) -> Presentation:
    algs = tuple(DigraphAlgebra(tuple(sz)) for sz in levels)
    embs = []
    for k in range(1, len(algs)):
        raw = images.get(str(k), images.get(k))
        if raw is None:
            raise ValidationError(f"images for level {k} missing", [("missing level", (f"images/{k}",))])
        m = {}
        for key, vals in raw.items():
            try:
                e = MatrixUnit.parse(key) if isinstance(key, str) else MatrixUnit(*key)
                m[e] = frozenset(MatrixUnit.parse(v) if isinstance(v, str) else MatrixUnit(*v)
                                 for v in vals)
            except CoordinateError as exc:
                raise ValidationError(f"bad unit in images/{k}/{key}: {exc}",
                                      [("coordinate", (f"images/{k}/{key}",))]) from None
        embs.append(Embedding(algs[k - 1], algs[k], m))
    return Presentation(algs, tuple(embs), stationary_period=stationary_period,
                        relabeling=tuple(relabeling) if relabeling else None, ordered=ordered)


BUILDERS = {"refinement", "standard", "nest", "example_1_3", "custom"}


def build_presentation(spec: Mapping) -> Presentation:
    """Expand a presentation description (see README) and validate it."""
    if "builder" in spec:
        b = dict(spec["builder"])
        kind = b.pop("kind", None)
        depth = int(spec.get("depth", b.pop("depth", 0)))
        if kind == "refinement":
            pres = refinement(int(b.get("base", 1)), int(b.get("factor", 2)), depth)
        elif kind == "standard":
            pres = standard(int(b.get("base", 1)), int(b.get("factor", 2)), depth)
        elif kind == "nest":
            pres = nest(int(b.get("base", 1)), int(b.get("factor", 2)), depth,
                        perms=b.get("perms"), seed=b.get("seed"))
        elif kind == "example_1_3":
            pres = example_1_3(depth)
        elif kind == "custom":
            return build_presentation({k: v for k, v in b.items()})
        else:
            raise ValidationError(f"unknown builder kind {kind!r}", [("builder", ("/builder/kind",))])
        if "stationary_period" in spec:
            pres = _with(pres, stationary_period=int(spec["stationary_period"]))
    elif "levels" in spec:
        pres = custom(spec["levels"], spec.get("images", {}), ordered=bool(spec.get("ordered", False)),
                      stationary_period=spec.get("stationary_period"), relabeling=spec.get("relabeling"))
    else:
        raise ValidationError("presentation needs 'builder' or 'levels'", [("schema", ("/",))])
    rep = validate_presentation(pres)
    if not rep.ok:
        axiom, witness = rep.failures[0]
        raise ValidationError(f"invalid presentation: {axiom} {[str(w) for w in witness]}", rep.failures)
    return pres


def _with(pres: Presentation, **changes) -> Presentation:
    data = dict(levels=pres.levels, embeddings=pres.embeddings, stationary_period=pres.stationary_period,
                relabeling=pres.relabeling, ordered=pres.ordered, builder=pres.builder)
    data.update(changes)
    return Presentation(**data)


def contract(pres: Presentation, indices: Sequence[int]) -> Presentation:
    """Keep only the listed levels, composing the embeddings in between."""
    idx = list(indices)
    if not idx:
        raise ArgumentError("contraction needs at least one level")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ArgumentError(f"contraction indices must increase: {idx}")
    for k in idx:
        pres.check_level(k)
    if idx == list(range(1, pres.depth + 1)):
        return pres
    embs = []
    for a, b in zip(idx, idx[1:]):
        emb = pres.embedding(a)
        for k in range(a + 1, b):
            emb = compose(emb, pres.embedding(k))
        embs.append(emb)
    out = Presentation(tuple(pres.algebra(k) for k in idx), tuple(embs), ordered=pres.ordered,
                       builder=None)
    out._cache["contraction_of"] = tuple(idx)
    for k, emb in enumerate(embs, 1):
        rep = validate_embedding(emb)
        if not rep.ok:
            raise ValidationError(f"composed embedding {k} invalid", rep.failures)
    return out


def coherent_tower(pres: Presentation, level: int, I: Ideal, depth: int) -> IdealTower:
    """Depth-K approximation of the limit ideal generated by I at ``level``."""
    pres.check_level(level)
    if depth < level:
        raise DepthError("depth must be at least the starting level")
    if depth > pres.depth:
        raise DepthError(f"depth {depth} exceeds the {pres.depth} available levels")
    if I.algebra != pres.algebra(level):
        raise ShapeError("ideal does not live at the given level")
    top = pres.push(I, level, depth)
    out = [top]
    for k in range(depth - 1, level - 1, -1):
        out.append(restrict_ideal(pres.embedding(k), out[-1]))
    return IdealTower(level, tuple(reversed(out)))


def zero_tower(pres: Presentation, level: int, depth: int) -> IdealTower:
    return IdealTower(level, tuple(zero_ideal(pres.algebra(k)) for k in range(level, depth + 1)))
