import random

import pytest

from taflab.fdcore import (
    DigraphAlgebra, MatrixUnit, ShapeError, enumerate_ideals, ideal_from_generators, leq, principal_ideal, zero_ideal,
)
from taflab.tower import (
    ArgumentError, DepthError, Embedding, ValidationError, build_presentation, coherent_tower,
    compose, contract, custom, example_1_3, is_locally_order_preserving, is_order_preserving,
    nest, push_ideal, refinement, restrict_ideal, standard, validate_embedding,
    validate_presentation,
)
from oracles import bimodule_closure

U = MatrixUnit
BUILDERS = {
    "refinement": lambda K: refinement(2, 2, K),
    "standard": lambda K: standard(2, 2, K),
    "example_1_3": example_1_3,
    "nest": lambda K: nest(2, 2, K, seed=7),
}


def imgset(emb, e):
    return {tuple(u) for u in emb.image(e)}


class TestBuilders:
    def test_example_1_3_first_map(self):
        p = example_1_3(3)
        assert imgset(p.embedding(1), (1, 1, 2)) == {(1, 1, 4), (2, 2, 3)}
        assert p.algebra(2).summand_sizes == (4, 4)

    def test_refinement_splits_identity(self):
        assert imgset(refinement(1, 2, 3).embedding(1), (1, 1, 1)) == {(1, 1, 1), (1, 2, 2)}

    def test_standard_copies(self):
        assert imgset(standard(2, 2, 2).embedding(1), (1, 1, 2)) == {(1, 1, 2), (1, 3, 4)}

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_every_level_validates(self, name):
        p = BUILDERS[name](4)
        for k in range(1, p.depth):
            assert validate_embedding(p.embedding(k)).ok
        assert validate_presentation(p).ok

    def test_nest_identity_is_refinement(self):
        a, b = nest(2, 3, 3), refinement(2, 3, 3)
        for k in (1, 2):
            assert a.embedding(k).images == b.embedding(k).images

    def test_bad_nest_perms(self):
        with pytest.raises(ArgumentError):
            nest(1, 2, 2, perms=[[[0, 0]]])

    def test_json_round_trip(self):
        for spec in ({"builder": {"kind": "refinement", "base": 1, "factor": 2}, "depth": 3},
                     {"builder": {"kind": "example_1_3"}, "depth": 3, "stationary_period": 1}):
            p = build_presentation(spec)
            assert build_presentation(p.to_json()).embeddings == p.embeddings

    def test_custom_round_trip(self):
        p = standard(1, 2, 3)
        q = build_presentation({"levels": [list(a.summand_sizes) for a in p.levels],
                                "images": {
                                    str(k): {str(e): [str(u) for u in img] for e, img in emb.images.items()}
                                    for k, emb in enumerate(p.embeddings, 1)}})
        assert q.embeddings == p.embeddings

    def test_unknown_builder(self):
        with pytest.raises(ValidationError):
            build_presentation({"builder": {"kind": "spiral"}, "depth": 2})


def _t2_to_t4(images):
    src, tgt = DigraphAlgebra((2,)), DigraphAlgebra((4,))
    return Embedding(src, tgt, {U.parse(k): frozenset(U.parse(v) for v in vs) for k, vs in images.items()})


class TestValidation:
    GOOD = {"1:1:1": ["1:1:1", "1:3:3"], "1:2:2": ["1:2:2", "1:4:4"], "1:1:2": ["1:1:2", "1:3:4"]}

    def test_good(self):
        assert validate_embedding(_t2_to_t4(self.GOOD)).ok

    def test_overlapping_diagonal(self):
        bad = dict(self.GOOD, **{"1:2:2": ["1:2:2", "1:3:3"]})
        axioms = [a for a, _ in validate_embedding(_t2_to_t4(bad)).failures]
        assert "diagonal images overlap" in axioms

    def test_multiplicativity_witness(self):
        bad = dict(self.GOOD, **{"1:1:2": ["1:1:2", "1:3:3"]})
        rep = validate_embedding(_t2_to_t4(bad))
        assert ("multiplicativity", ((1, 1, 2), (1, 2, 2))) in rep.failures

    def test_not_partition(self):
        bad = dict(self.GOOD, **{"1:2:2": ["1:2:2"], "1:1:2": ["1:1:2"], "1:1:1": ["1:1:1"]})
        axioms = [a for a, _ in validate_embedding(_t2_to_t4(bad)).failures]
        assert "diagonal images do not partition target diagonal" in axioms

    def test_build_reports_first_failure(self):
        bad = dict(self.GOOD, **{"1:2:2": ["1:2:2", "1:3:3"]})
        with pytest.raises(ValidationError, match="diagonal images overlap"):
            build_presentation({"levels": [[2], [4]], "images": {"1": bad}})


class TestPushRestrict:
    def test_example_1_3_push(self):
        p = example_1_3(2)
        J = push_ideal(p.embedding(1), principal_ideal(p.algebra(1), (1, 1, 2)))
        assert (2, 2, 3) in J

    def test_push_matches_closure(self):
        p = standard(2, 2, 3)
        I = principal_ideal(p.algebra(1), (1, 1, 2))
        got = {tuple(u) for u in push_ideal(p.embedding(1), I).support()}
        assert got == bimodule_closure((4,), [(1, 1, 2), (1, 3, 4)])

    def test_restrict_zero(self):
        p = refinement(2, 2, 3)
        assert restrict_ideal(p.embedding(1), zero_ideal(p.algebra(2))).is_zero

    def test_shape_errors(self):
        p = refinement(2, 2, 3)
        with pytest.raises(ShapeError):
            push_ideal(p.embedding(1), zero_ideal(p.algebra(2)))
        with pytest.raises(ShapeError):
            restrict_ideal(p.embedding(1), zero_ideal(p.algebra(1)))

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_galois_pair(self, name):
        p = BUILDERS[name](3)
        rng = random.Random(11)
        for k in (1, 2):
            emb = p.embedding(k)
            low = list(enumerate_ideals(p.algebra(k)))
            high_units = p.algebra(k + 1).units()
            for I in low:
                assert leq(I, restrict_ideal(emb, push_ideal(emb, I)))
            for _ in range(500):
                J = ideal_from_generators(p.algebra(k + 1), rng.sample(high_units, rng.randint(0, 4)))
                assert leq(push_ideal(emb, restrict_ideal(emb, J)), J)


class TestCoherentTower:
    def test_refinement_example_is_stable(self):
        p = refinement(2, 2, 4)
        I = principal_ideal(p.algebra(1), (1, 1, 2))
        assert coherent_tower(p, 1, I, 4).at(1) == I

    def test_zero(self):
        p = example_1_3(3)
        assert all(I.is_zero for I in coherent_tower(p, 1, zero_ideal(p.algebra(1)), 3).ideals)

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_coherent_and_monotone(self, name):
        p = BUILDERS[name](4)
        for I in enumerate_ideals(p.algebra(1)):
            prev = None
            for K in range(1, 5):
                tw = coherent_tower(p, 1, I, K)
                for k in range(1, K):
                    assert restrict_ideal(p.embedding(k), tw.at(k + 1)) == tw.at(k)
                if prev is not None:
                    for k in range(1, K):
                        assert leq(prev.at(k), tw.at(k))
                prev = tw

    def test_depth_errors(self):
        p = refinement(1, 2, 3)
        with pytest.raises(DepthError):
            coherent_tower(p, 1, zero_ideal(p.algebra(1)), 4)


class TestContract:
    def test_identity(self):
        p = refinement(1, 2, 4)
        assert contract(p, [1, 2, 3, 4]) is p

    def test_refinement_skip(self):
        got = contract(refinement(1, 2, 6), [1, 3, 5])
        want = refinement(1, 4, 3)
        assert [a.summand_sizes for a in got.levels] == [a.summand_sizes for a in want.levels]
        for k in (1, 2):
            assert got.embedding(k).images == want.embedding(k).images

    def test_non_increasing(self):
        with pytest.raises(ArgumentError):
            contract(refinement(1, 2, 4), [1, 3, 3])

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_associative_and_valid(self, name):
        p = BUILDERS[name](5)
        u = [1, 2, 4, 5]
        w = [1, 3, 4]
        direct = contract(p, [u[i - 1] for i in w])
        twice = contract(contract(p, u), w)
        assert [e.images for e in direct.embeddings] == [e.images for e in twice.embeddings]
        for e in direct.embeddings:
            assert validate_embedding(e).ok

    def test_compose_shape(self):
        p = refinement(1, 2, 3)
        with pytest.raises(ShapeError):
            compose(p.embedding(2), p.embedding(1))


class TestOrder:
    def test_single_unit(self):
        assert is_order_preserving(DigraphAlgebra((3,)), [(1, 1, 3)])

    def test_forbidden_nesting(self):
        assert not is_order_preserving(DigraphAlgebra((4,)), [(1, 1, 4), (1, 2, 3)])
        assert is_order_preserving(DigraphAlgebra((4,)), [(1, 1, 2), (1, 3, 4)])

    def test_not_partial_isometry(self):
        with pytest.raises(ArgumentError):
            is_order_preserving(DigraphAlgebra((4,)), [(1, 1, 2), (1, 1, 3)])

    @pytest.mark.parametrize("build", [lambda: refinement(1, 2, 4), lambda: standard(2, 2, 4)])
    def test_builders_locally_order_preserving(self, build):
        p = build()
        assert all(is_locally_order_preserving(p.embedding(k)) for k in range(1, p.depth))

    def test_composition_can_break_order(self):
        p = example_1_3(3)
        assert is_locally_order_preserving(p.embedding(1)) and is_locally_order_preserving(p.embedding(2))
        assert not is_locally_order_preserving(compose(p.embedding(1), p.embedding(2)))


class TestStationarity:
    def test_builders_declare_period_one(self):
        assert refinement(1, 2, 4).stationary_period == 1
        assert validate_presentation(example_1_3(4)).ok

    def test_bad_declaration_rejected(self):
        p = nest(1, 2, 5, seed=0)
        spec = {"levels": [list(a.summand_sizes) for a in p.levels],
                "images": {str(k): {str(e): [str(u) for u in img] for e, img in emb.images.items()}
                           for k, emb in enumerate(p.embeddings, 1)},
                "stationary_period": 1}
        assert len({p.embedding_signature(k) for k in range(2, 5)}) > 1
        with pytest.raises(ValidationError, match="stationarity"):
            build_presentation(spec)

    def test_trivial_first_level_skipped(self):
        # out of T_1 every embedding is position ordered; later standard ones are not
        p = standard(1, 2, 5)
        assert p.embedding_signature(1) != p.embedding_signature(2)
        assert validate_presentation(p).ok

    def test_custom_declared_ok(self):
        p = refinement(1, 2, 4)
        q = custom([list(a.summand_sizes) for a in p.levels],
                   {str(k): {str(e): [str(u) for u in img] for e, img in emb.images.items()}
                    for k, emb in enumerate(p.embeddings, 1)}, stationary_period=1)
        assert validate_presentation(q).ok
