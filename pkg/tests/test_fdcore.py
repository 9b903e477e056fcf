import itertools

import pytest
from hypothesis import given, settings, strategies as st

from taflab.fdcore import (
    CapacityError, CoordinateError, DigraphAlgebra, DomainError, Ideal, MatrixUnit,
    ShapeError, covers, enumerate_ideals, ideal_from_generators, ideal_from_support,
    is_meet_irreducible, join, largest_ideal_excluding, lattice_ops, leq, meet,
    minimal_excluded_generators, principal_ideal, top_ideal, zero_ideal,
)
from oracles import a_units, bimodule_closure, brute_ideals, brute_meet_irreducible

T = lambda *sizes: DigraphAlgebra(sizes)  # noqa: E731
U = MatrixUnit


def supp(I):
    return {(e.summand, e.row, e.col) for e in I.support()}


def test_rejects_empty_algebra():
    with pytest.raises(ShapeError):
        DigraphAlgebra(())
    with pytest.raises(ShapeError):
        DigraphAlgebra((2, 0))


def test_unit_text_form_round_trips():
    e = MatrixUnit.parse("2:1:3")
    assert e == (2, 1, 3) and str(e) == "2:1:3"
    with pytest.raises(CoordinateError):
        MatrixUnit.parse("1:2")


class TestGenerators:
    def test_empty_generating_set_is_zero(self):
        assert ideal_from_generators(T(2), []) == zero_ideal(T(2))
        assert zero_ideal(T(2)).thresholds == ((3, 3),)

    @pytest.mark.parametrize("n,gen", [(4, (1, 2, 3)), (3, (1, 1, 1)), (5, (1, 3, 4))])
    def test_matches_bimodule_closure(self, n, gen):
        assert supp(ideal_from_generators(T(n), [gen])) == bimodule_closure((n,), [gen])

    def test_frozen_examples(self):
        assert supp(principal_ideal(T(4), (1, 2, 3))) == {(1, 1, 3), (1, 1, 4), (1, 2, 3), (1, 2, 4)}
        assert supp(principal_ideal(T(3), (1, 1, 1))) == {(1, 1, 1), (1, 1, 2), (1, 1, 3)}

    def test_invalid_coordinates(self):
        with pytest.raises(CoordinateError):
            ideal_from_generators(T(2), [(1, 2, 1)])
        with pytest.raises(CoordinateError):
            ideal_from_generators(T(2), [(2, 1, 1)])

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_closure_idempotent(self, n):
        for I in enumerate_ideals(T(n)):
            assert ideal_from_generators(T(n), I.support()) == I
            assert ideal_from_generators(T(n), I.generators()) == I

    def test_support_round_trip_rejects_non_ideal(self):
        with pytest.raises(DomainError):
            ideal_from_support(T(2), [(1, 1, 1)])


class TestLargestExcluding:
    def test_frozen_examples(self):
        assert supp(largest_ideal_excluding(T(2), (1, 1, 2))) == set()
        assert supp(largest_ideal_excluding(T(2), (1, 1, 1))) == {(1, 1, 2), (1, 2, 2)}
        assert supp(largest_ideal_excluding(T(3), (1, 2, 2))) == {
            (1, 1, 1), (1, 1, 2), (1, 1, 3), (1, 2, 3), (1, 3, 3)}

    @pytest.mark.parametrize("sizes", [(3,), (4,), (2, 1)])
    def test_is_the_maximal_ideal_missing_e(self, sizes):
        everything = brute_ideals(sizes)
        for e in a_units(sizes):
            missing = [I for I in everything if e not in I]
            biggest = max(missing, key=len)
            assert all(I <= biggest for I in missing)
            assert supp(largest_ideal_excluding(T(*sizes), e)) == biggest

    def test_other_summands_are_full(self):
        I = largest_ideal_excluding(T(2, 2), (2, 1, 1))
        assert {(1, 1, 1), (1, 1, 2), (1, 2, 2)} <= supp(I)


class TestLattice:
    def test_meet_example(self):
        I = ideal_from_support(T(2), [(1, 1, 1), (1, 1, 2)])
        J = ideal_from_support(T(2), [(1, 1, 2), (1, 2, 2)])
        ops = lattice_ops(T(2), I, J)
        assert supp(ops.meet) == {(1, 1, 2)}
        assert supp(ops.join) == {(1, 1, 1), (1, 1, 2), (1, 2, 2)}
        assert not ops.leq
        assert ops.contains_e((1, 1, 2)) == (True, True)

    def test_identities(self):
        I = principal_ideal(T(3), (1, 2, 2))
        assert join(I, zero_ideal(T(3))) == I
        assert leq(zero_ideal(T(3)), I)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            meet(zero_ideal(T(2)), zero_ideal(T(3)))

    def test_meet_join_agree_with_set_operations(self):
        ideals = list(enumerate_ideals(T(3)))
        for I, J in itertools.product(ideals, repeat=2):
            assert supp(meet(I, J)) == supp(I) & supp(J)
            assert supp(join(I, J)) == supp(I) | supp(J)
            assert leq(I, J) == (supp(I) <= supp(J))

    def test_distributive(self):
        ideals = list(enumerate_ideals(T(3)))
        for a, b, c in itertools.product(ideals, repeat=3):
            assert meet(a, join(b, c)) == join(meet(a, b), meet(a, c))
            assert join(a, meet(b, c)) == meet(join(a, b), join(a, c))


class TestCovers:
    def test_frozen_examples(self):
        assert [supp(J) for J in covers(T(2), zero_ideal(T(2)))] == [{(1, 1, 2)}]
        got = {frozenset(supp(J)) for J in covers(T(2), principal_ideal(T(2), (1, 1, 2)))}
        assert got == {frozenset({(1, 1, 1), (1, 1, 2)}), frozenset({(1, 1, 2), (1, 2, 2)})}
        assert covers(T(2), top_ideal(T(2))) == []

    @pytest.mark.parametrize("sizes", [(3,), (2, 2), (4,)])
    def test_match_brute_force(self, sizes):
        everything = brute_ideals(sizes)
        alg = T(*sizes)
        for I in enumerate_ideals(alg):
            s = frozenset(supp(I))
            bigger = [J for J in everything if s < J]
            minimal = {J for J in bigger if not any(K < J for K in bigger)}
            assert {frozenset(supp(J)) for J in covers(alg, I)} == minimal
            assert all(len(J) == len(s) + 1 for J in minimal)

    def test_minimal_excluded_generators(self):
        assert minimal_excluded_generators(T(2), zero_ideal(T(2))) == [(1, 1, 2)]
        assert minimal_excluded_generators(T(2), principal_ideal(T(2), (1, 1, 2))) == [(1, 1, 1), (1, 2, 2)]
        assert minimal_excluded_generators(T(3), zero_ideal(T(3))) == [(1, 1, 3)]
        with pytest.raises(DomainError):
            minimal_excluded_generators(T(2), top_ideal(T(2)))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_cover_count_matches_generators(self, n):
        for I in enumerate_ideals(T(n)):
            if not I.is_top:
                assert len(covers(T(n), I)) == len(minimal_excluded_generators(T(n), I))


class TestMeetIrreducible:
    def test_frozen_examples(self):
        assert is_meet_irreducible(T(2), ideal_from_support(T(2), [(1, 1, 2), (1, 2, 2)]))
        assert not is_meet_irreducible(T(2), principal_ideal(T(2), (1, 1, 2)))
        assert is_meet_irreducible(T(2), zero_ideal(T(2)))

    @pytest.mark.parametrize("sizes", [(2,), (3,), (4,), (2, 1)])
    def test_agrees_with_pairwise_brute_force(self, sizes):
        everything = brute_ideals(sizes)
        alg = T(*sizes)
        for I in enumerate_ideals(alg):
            assert is_meet_irreducible(alg, I) == brute_meet_irreducible(everything, frozenset(supp(I)))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_census(self, n):
        alg = T(n)
        mi = {I for I in enumerate_ideals(alg) if not I.is_top and is_meet_irreducible(alg, I)}
        excl = [largest_ideal_excluding(alg, e) for e in alg.units()]
        assert mi == set(excl)
        # distinct for every unit at these sizes
        assert len(set(excl)) == len(excl)


class TestEnumeration:
    @pytest.mark.parametrize("sizes,count", [((1,), 2), ((2,), 5), ((3,), 14), ((4,), 42), ((2, 1), 10)])
    def test_counts(self, sizes, count):
        got = list(enumerate_ideals(T(*sizes)))
        assert len(got) == count
        assert len(set(got)) == count

    def test_matches_brute_force(self):
        assert {frozenset(supp(I)) for I in enumerate_ideals(T(2, 2))} == set(brute_ideals((2, 2)))

    def test_lexicographic_order(self):
        got = [I.thresholds for I in enumerate_ideals(T(3))]
        assert got == sorted(got)

    def test_capacity(self, monkeypatch):
        with pytest.raises(CapacityError):
            list(enumerate_ideals(T(6), bound=100))
        monkeypatch.setenv("TAFLAB_MAX_IDEALS", "10")
        with pytest.raises(CapacityError):
            next(enumerate_ideals(T(3)))


def test_fact_2_2():
    # Id(e_ii) & Id(e_kk) <= Id(e_jj) whenever i < j < k
    for n in range(1, 7):
        alg = T(n)
        for i, j, k in itertools.combinations(range(1, n + 1), 3):
            m = meet(principal_ideal(alg, (1, i, i)), principal_ideal(alg, (1, k, k)))
            assert leq(m, principal_ideal(alg, (1, j, j)))


def test_json_round_trip():
    alg = T(3, 2)
    I = principal_ideal(alg, (1, 2, 3))
    assert Ideal.from_json(alg, I.to_json()) == I


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)), max_size=6))
def test_generated_ideal_is_bimodule_closure(pairs):
    gens = [(1, min(a, b), max(a, b)) for a, b in pairs]
    assert supp(ideal_from_generators(T(5), gens)) == bimodule_closure((5,), gens)
