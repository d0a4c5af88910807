"""
Тесты стандартного множества и разложения PC-отображений
"""

import itertools
import random

import numpy as np
import pytest

from ut_pcmaps.core.decomposition import (
    FamilyTables,
    check_aut_times_subcentral,
    check_central_subgroup,
    check_subcentral_normality,
    compose_tables,
    decompose_pc_map,
    find_non_normality_witness,
    generate_standard_set,
    invert_table,
    random_central_values,
    random_decomposition,
)
from ut_pcmaps.core.enumeration import enumerate_automorphisms, enumerate_pc_maps
from ut_pcmaps.core.errors import BoundExceededError, PreconditionError
from ut_pcmaps.core.field import make_field
from ut_pcmaps.core.group_table import build_group_table
from ut_pcmaps.core.matrix import TriangularInvertible, UTElement
from ut_pcmaps.core.pcmap import (
    CentralFunction,
    central_map,
    field_aut,
    graph_aut,
    permutable,
    quasi_inner,
    standard_subcentral,
    table_is_central,
    table_is_pc,
)


@pytest.fixture(scope="module")
def ut3_f4():
    return build_group_table(3, make_field(2, 2))


class TestFamilyTables:
    """Векторизованные таблицы совпадают с формулами семейств"""

    def test_subcentral(self, ut4_f3, f3):
        tables = FamilyTables(ut4_f3)
        expected = standard_subcentral(4, f3, 1, 2).tabulate(ut4_f3)
        assert np.array_equal(tables.subcentral(1, 2), expected)

    def test_graph(self, ut4_f3, f3):
        expected = graph_aut(4, f3).tabulate(ut4_f3)
        assert np.array_equal(FamilyTables(ut4_f3).graph(), expected)

    def test_quasi_inner(self, ut4_f3, f3):
        u = UTElement.from_mapping(4, f3, {(1, 2): 1, (2, 4): 2, (3, 4): 1})
        expected = quasi_inner(TriangularInvertible((1, 2, 1, 2), u)).tabulate(ut4_f3)
        actual = FamilyTables(ut4_f3).quasi_inner((1, 2, 1, 2), ut4_f3.index(u))
        assert np.array_equal(actual, expected)

    def test_permutable(self, ut3_f3, f3):
        expected = permutable(f3, 0, 1, 1, 0).tabulate(ut3_f3)
        assert np.array_equal(FamilyTables(ut3_f3).permutable(0, 1, 1, 0), expected)

    def test_frobenius(self, ut3_f4):
        f4 = ut3_f4.field
        expected = field_aut(3, f4, 1).tabulate(ut3_f4)
        assert np.array_equal(FamilyTables(ut3_f4).frobenius(1), expected)

    def test_central(self, ut3_f3):
        values = random_central_values(ut3_f3, random.Random(1))
        f = CentralFunction(3, ut3_f3.field, table=ut3_f3, values=values)
        expected = central_map(f).tabulate(ut3_f3)
        assert np.array_equal(FamilyTables(ut3_f3).central(values), expected)

    def test_permutable_needs_ut3(self, ut4_f3):
        with pytest.raises(PreconditionError):
            FamilyTables(ut4_f3).permutable(1, 0, 0, 1)

    def test_compose_and_invert(self, ut4_f3):
        tables = FamilyTables(ut4_f3)
        g, s = tables.graph(), tables.subcentral(2, 1)
        both = compose_tables(g, s)
        assert np.array_equal(both, g[s])
        assert np.array_equal(compose_tables(invert_table(both), both), tables.identity())


class TestDecomposition:
    """decompose_pc_map восстанавливает исходную таблицу"""

    def test_identity(self, ut4_f3):
        found = decompose_pc_map(ut4_f3, np.arange(ut4_f3.order))
        assert not found.graph
        assert found.field_power == 0
        assert found.subcentral == (0, 0)
        assert found.quasi_inner.unipotent.is_identity()
        assert not found.central.any()

    def test_random_round_trip_ut4(self, ut4_f3):
        tables = FamilyTables(ut4_f3)
        rng = random.Random(11)
        for _ in range(5):
            phi = random_decomposition(ut4_f3, rng).recompose(tables)
            assert table_is_pc(ut4_f3, phi)
            found = decompose_pc_map(ut4_f3, phi, tables=tables)
            assert np.array_equal(found.recompose(tables), phi)

    def test_random_round_trip_ut3_over_f4(self, ut3_f4):
        tables = FamilyTables(ut3_f4)
        rng = random.Random(12)
        for _ in range(5):
            phi = random_decomposition(ut3_f4, rng).recompose(tables)
            found = decompose_pc_map(ut3_f4, phi, tables=tables)
            assert found.permutable is not None
            assert np.array_equal(found.recompose(tables), phi)

    def test_to_map_matches_recompose(self, ut4_f3):
        tables = FamilyTables(ut4_f3)
        decomposition = random_decomposition(ut4_f3, random.Random(13))
        phi = decomposition.to_map(ut4_f3)
        assert np.array_equal(phi.tabulate(ut4_f3), decomposition.recompose(tables))

    def test_not_a_pc_map(self, ut3_f3):
        perm = np.arange(ut3_f3.order)
        perm[[1, 9]] = [9, 1]
        with pytest.raises(PreconditionError):
            decompose_pc_map(ut3_f3, perm)

    def test_parameter_budget(self, ut4_f3):
        with pytest.raises(BoundExceededError):
            decompose_pc_map(ut4_f3, np.arange(ut4_f3.order), param_budget=10)

    def test_random_central_values_are_admissible(self, ut4_f3):
        values = random_central_values(ut4_f3, random.Random(3))
        perm = FamilyTables(ut4_f3).central(values)
        assert table_is_central(ut4_f3, perm)
        assert table_is_pc(ut4_f3, perm)


class TestStandardSet:
    """Стандартное множество и полный перебор"""

    def test_ut3_f2_contains_identity(self, ut3_f2):
        standard = generate_standard_set(ut3_f2)
        assert np.arange(ut3_f2.order) in standard

    def test_ut3_f2_matches_enumeration(self, ut3_f2):
        standard = generate_standard_set(ut3_f2)
        enumeration = enumerate_pc_maps(ut3_f2)
        assert standard.count <= enumeration.count
        for rep in standard.representatives:
            assert rep in enumeration

    def test_ut4_f2_contains_almost_identity_maps(self, ut4_f2):
        standard = generate_standard_set(ut4_f2)
        almost_identity = enumerate_pc_maps(ut4_f2, "almost_identity")
        assert almost_identity.representatives
        for rep in almost_identity.representatives:
            assert table_is_central(ut4_f2, rep)
            assert rep in standard
        for perm in itertools.islice(almost_identity, 50):
            assert perm in standard

    @pytest.mark.slow
    def test_ut3_f3_matches_enumeration(self, ut3_f3):
        standard = generate_standard_set(ut3_f3)
        enumeration = enumerate_pc_maps(ut3_f3)
        assert {r.tobytes() for r in standard.representatives} == {
            r.tobytes() for r in enumeration.representatives
        }

    def test_parameter_budget(self, ut4_f3):
        with pytest.raises(BoundExceededError):
            generate_standard_set(ut4_f3, param_budget=100)


@pytest.fixture(scope="module")
def pc_enumerations():
    """Полные перечисления PC-отображений, общие для проверок следствий"""
    cache = {}

    def get(table):
        key = (table.n, table.field.q)
        if key not in cache:
            cache[key] = enumerate_pc_maps(table)
        return cache[key]

    return get


class TestCorollaries:
    """Групповые следствия на малых группах"""

    @pytest.mark.parametrize("name", ["ut3_f2", "ut3_f3"])
    def test_central_subgroup(self, pc_enumerations, name, request):
        check = check_central_subgroup(pc_enumerations(request.getfixturevalue(name)))
        assert check.holds
        assert check.checked > 0

    @pytest.mark.parametrize("name", ["ut3_f2", "ut3_f3"])
    def test_subcentral_normality(self, pc_enumerations, name, request):
        assert check_subcentral_normality(pc_enumerations(request.getfixturevalue(name))).holds

    @pytest.mark.parametrize("name", ["ut3_f2", "ut3_f3"])
    def test_aut_times_subcentral(self, pc_enumerations, name, request):
        table = request.getfixturevalue(name)
        enumeration = pc_enumerations(table)
        check = check_aut_times_subcentral(enumeration, enumerate_automorphisms(table))
        assert check.holds
        assert check.checked == len(enumeration.representatives)

    def test_non_normality_witness(self, ut4_f3):
        witness = find_non_normality_witness(ut4_f3)
        assert witness is not None
        tables = FamilyTables(ut4_f3)
        conj = witness["conjugate"]
        for alpha in range(3):
            for beta in range(3):
                assert not np.array_equal(conj, tables.subcentral(alpha, beta))

    def test_non_normality_needs_n4(self, ut3_f3):
        with pytest.raises(PreconditionError):
            find_non_normality_witness(ut3_f3)
