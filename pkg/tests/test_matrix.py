"""
Тесты матричной арифметики UT(n, F) и T(n, F)
"""

import random

import pytest

from ut_pcmaps.core.errors import DimensionError, FieldError
from ut_pcmaps.core.matrix import (
    InverseView,
    TriangularInvertible,
    UTElement,
    all_elements,
    center_congruent,
    commutator,
    embed,
    higher_center_member,
    in_derived,
    in_second_derived_shape,
    in_UP_k,
    inverse,
    inverse_by_substitution,
    multiply,
    random_element,
    second_center_congruent,
    transvection,
)


class TestElements:
    """Построение и доступ к элементам"""

    def test_entry_order_for_n3(self, f3):
        a = UTElement.from_entries(3, f3, [1, 2, 0])
        assert a.entry(1, 2) == 1
        assert a.entry(1, 3) == 2
        assert a.entry(2, 3) == 0
        assert a.entry(2, 2) == 1
        assert a.entry(3, 1) == 0

    def test_wrong_length(self, f3):
        with pytest.raises(DimensionError):
            UTElement(3, f3, (0, 0))

    def test_dimension_at_least_two(self, f3):
        with pytest.raises(DimensionError):
            UTElement(1, f3, ())
        with pytest.raises(DimensionError):
            UTElement.identity(0, f3)
        assert UTElement.identity(2, f3).is_identity()

    def test_position_outside(self, f3):
        with pytest.raises(DimensionError):
            UTElement.from_mapping(3, f3, {(2, 1): 1})

    def test_dense_round_trip(self, f5):
        a = UTElement.from_mapping(4, f5, {(1, 2): 3, (2, 4): 4})
        assert UTElement.from_dense(f5, a.to_dense()) == a

    def test_dense_not_unitriangular(self, f5):
        with pytest.raises(DimensionError):
            UTElement.from_dense(f5, [[1, 0], [1, 1]])

    def test_support(self, f3):
        assert UTElement.identity(5, f3).support() == 0
        assert transvection(5, 2, 4, 1, f3).support() == 4


class TestGroupOperations:
    """Умножение, обратные, коммутаторы"""

    def test_inverse_of_two_transvections(self, f2):
        a = multiply(transvection(3, 1, 2, 1, f2), transvection(3, 2, 3, 1, f2))
        view = InverseView(a)
        assert view.strict(1, 2) == 1
        assert view.strict(2, 3) == 1
        # a^(-1) = e - e12 - e23 над F_2
        assert view.strict(1, 3) == 0
        assert view.strict(2, 2) == 0

    def test_inverse_methods_agree(self, f5):
        rng = random.Random(7)
        for _ in range(50):
            a = random_element(5, f5, rng)
            assert inverse(a) == inverse_by_substitution(a)
            assert multiply(a, inverse(a)).is_identity()

    def test_transvection_commutator(self, f5):
        c = commutator(transvection(4, 1, 2, 2, f5), transvection(4, 2, 3, 4, f5))
        assert c == transvection(4, 1, 3, f5.mul(2, 4), f5)

    def test_disjoint_transvections_commute(self, f3):
        c = commutator(transvection(4, 1, 2, 1, f3), transvection(4, 3, 4, 2, f3))
        assert c.is_identity()

    def test_associativity(self, f3):
        rng = random.Random(1)
        for _ in range(30):
            a, b, c = (random_element(4, f3, rng) for _ in range(3))
            assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))

    def test_mismatched_groups(self, f3, f5):
        with pytest.raises(DimensionError):
            multiply(UTElement.identity(3, f3), UTElement.identity(4, f3))
        with pytest.raises(FieldError):
            multiply(UTElement.identity(3, f3), UTElement.identity(3, f5))

    def test_transvection_needs_field(self):
        with pytest.raises(FieldError):
            transvection(3, 1, 2, 1)

    def test_transvection_bad_position(self, f3):
        with pytest.raises(DimensionError):
            transvection(3, 2, 2, 1, f3)

    def test_all_elements(self, f2):
        elements = list(all_elements(3, f2))
        assert len(elements) == 8
        assert elements[0].is_identity()


class TestSubgroupPredicates:
    """Коммутант, центры, блочные подгруппы"""

    def test_derived(self, f3):
        assert in_derived(transvection(4, 1, 3, 1, f3))
        assert not in_derived(transvection(4, 2, 3, 1, f3))

    def test_second_derived_shape(self, f2):
        assert in_second_derived_shape(transvection(5, 1, 4, 1, f2))
        assert not in_second_derived_shape(transvection(5, 1, 3, 1, f2))

    def test_center_congruence(self, f3):
        a = UTElement.from_mapping(4, f3, {(1, 2): 1, (1, 4): 2})
        b = UTElement.from_mapping(4, f3, {(1, 2): 1})
        assert center_congruent(a, b)
        c = UTElement.from_mapping(4, f3, {(1, 2): 1, (2, 4): 2})
        assert not center_congruent(c, b)
        assert second_center_congruent(c, b)

    def test_higher_center(self, f3):
        assert higher_center_member(transvection(4, 1, 4, 1, f3), 1)
        assert not higher_center_member(transvection(4, 1, 3, 1, f3), 1)
        assert higher_center_member(transvection(4, 1, 3, 1, f3), 2)
        with pytest.raises(DimensionError):
            higher_center_member(transvection(4, 1, 3, 1, f3), 0)

    def test_up_k(self, f3):
        a = UTElement.from_mapping(5, f3, {(1, 3): 1, (2, 5): 2})
        assert in_UP_k(a, 2)
        assert not in_UP_k(a, 1)
        with pytest.raises(DimensionError):
            in_UP_k(a, 5)

    def test_embed(self, f3):
        a = transvection(3, 1, 3, 2, f3)
        big = embed(a, 5)
        assert big.n == 5
        assert big.entry(1, 3) == 2
        assert big.entry(1, 5) == 0
        with pytest.raises(DimensionError):
            embed(big, 4)


class TestTriangularInvertible:
    """Сопряжение обратимыми верхнетреугольными матрицами"""

    def test_diagonal_scaling(self, f5):
        t = TriangularInvertible.diagonal(f5, (1, 2, 3))
        a = UTElement.from_entries(3, f5, [1, 1, 1])
        # a_ij -> d_i a_ij d_j^(-1)
        assert t.conjugate(a).entries == (f5.inv(2), f5.inv(3), f5.div(2, 3))

    def test_zero_diagonal(self, f5):
        with pytest.raises(FieldError):
            TriangularInvertible.diagonal(f5, (1, 0, 1))

    def test_compose(self, f5):
        rng = random.Random(3)
        for _ in range(10):
            t1 = TriangularInvertible((1, 2, 4, 3), random_element(4, f5, rng))
            t2 = TriangularInvertible((3, 1, 2, 2), random_element(4, f5, rng))
            a = random_element(4, f5, rng)
            assert t1.compose(t2).conjugate(a) == t1.conjugate(t2.conjugate(a))

    def test_inverse(self, f5):
        rng = random.Random(4)
        t = TriangularInvertible((2, 3, 4), random_element(3, f5, rng))
        a = random_element(3, f5, rng)
        assert t.inverse().conjugate(t.conjugate(a)) == a

    def test_canonical_conjugates_the_same_way(self, f3):
        rng = random.Random(5)
        u = random_element(4, f3, rng)
        t = TriangularInvertible((2, 1, 2, 1), u)
        canon = t.canonical()
        assert canon.diag[0] == 1
        assert canon.unipotent.entry(1, 4) == 0
        for _ in range(20):
            a = random_element(4, f3, rng)
            assert canon.conjugate(a) == t.conjugate(a)
