"""
Тесты полного перебора PC-отображений
"""

import numpy as np
import pytest

from ut_pcmaps.core.enumeration import (
    count_central_functions,
    enumerate_automorphisms,
    enumerate_pc_maps,
    naive_pc_maps,
    pinned_elements,
    twin_classes,
)
from ut_pcmaps.core.errors import BoundExceededError, PreconditionError, SearchBudgetExceeded
from ut_pcmaps.core.pcmap import table_is_central, table_is_homomorphism, table_is_pc


def as_keys(perms):
    return {np.asarray(p, dtype=np.int64).tobytes() for p in perms}


class TestTwinClasses:
    """Классы некоммутаторов с одинаковыми строками comm"""

    def test_ut3_f2(self, ut3_f2):
        classes = twin_classes(ut3_f2)
        assert [len(c) for c in classes] == [2, 2, 2]
        members = np.concatenate(classes)
        assert not ut3_f2.commutator_mask[members].any()

    def test_classes_are_center_cosets(self, ut4_f3):
        keys = ut4_f3.center_coset_keys()
        for members in twin_classes(ut4_f3):
            assert len(set(keys[members].tolist())) == 1

    def test_pins(self, ut3_f3):
        assert len(pinned_elements(ut3_f3, "none")) == 1
        assert len(pinned_elements(ut3_f3, "almost_identity")) == 7
        with pytest.raises(PreconditionError):
            pinned_elements(ut3_f3, "automorphism")


class TestEnumeration:
    """Перебор с возвратом против наивного фильтра"""

    def test_matches_naive_on_ut3_f2(self, ut3_f2):
        enumeration = enumerate_pc_maps(ut3_f2)
        naive = naive_pc_maps(ut3_f2)
        assert enumeration.count == len(naive)
        assert as_keys(enumeration.tables(10 ** 5)) == as_keys(naive)

    def test_almost_identity_matches_naive(self, ut3_f2):
        enumeration = enumerate_pc_maps(ut3_f2, "almost_identity")
        naive = naive_pc_maps(ut3_f2, "almost_identity")
        assert as_keys(enumeration.tables(10 ** 5)) == as_keys(naive)

    def test_representatives_are_pc_maps(self, ut3_f3):
        enumeration = enumerate_pc_maps(ut3_f3, "almost_identity")
        assert enumeration.representatives
        for rep in enumeration.representatives:
            assert table_is_pc(ut3_f3, rep)

    @pytest.mark.parametrize("fixture", ["ut3_f3", "ut4_f2"])
    def test_almost_identity_maps_are_central(self, fixture, request):
        table = request.getfixturevalue(fixture)
        enumeration = enumerate_pc_maps(table, "almost_identity")
        for rep in enumeration.representatives:
            assert table_is_central(table, rep)
        pins = pinned_elements(table, "almost_identity")
        assert enumeration.count == count_central_functions(table, pins)

    def test_membership(self, ut3_f2):
        enumeration = enumerate_pc_maps(ut3_f2)
        for perm in naive_pc_maps(ut3_f2):
            assert perm in enumeration
        swapped = np.arange(ut3_f2.order)
        center = ut3_f2.transvection(1, 3, 1)
        generator = ut3_f2.transvection(1, 2, 1)
        swapped[[center, generator]] = [generator, center]
        assert not table_is_pc(ut3_f2, swapped)
        assert swapped not in enumeration
        assert not enumeration.contains(np.arange(3))

    def test_lazy_iteration_has_no_duplicates(self, ut3_f2):
        enumeration = enumerate_pc_maps(ut3_f2)
        tables = list(enumeration)
        assert len(tables) == enumeration.count
        assert len(as_keys(tables)) == enumeration.count

    def test_expansion_limit(self, ut3_f2):
        enumeration = enumerate_pc_maps(ut3_f2)
        with pytest.raises(BoundExceededError):
            enumeration.tables(enumeration.count - 1)

    def test_node_budget(self, ut3_f3):
        with pytest.raises(SearchBudgetExceeded) as info:
            enumerate_pc_maps(ut3_f3, node_budget=1)
        assert info.value.partial is not None
        assert info.value.partial.table is ut3_f3
        assert info.value.nodes > 1

    def test_workers_agree(self, ut3_f2):
        single = enumerate_pc_maps(ut3_f2)
        parallel = enumerate_pc_maps(ut3_f2, workers=2)
        assert as_keys(single.representatives) == as_keys(parallel.representatives)
        assert single.count == parallel.count

    def test_naive_limit(self, ut3_f3):
        with pytest.raises(BoundExceededError):
            naive_pc_maps(ut3_f3)


class TestCounting:
    """Число центральных функций"""

    def test_unconstrained(self, ut3_f2):
        assert count_central_functions(ut3_f2) == 8

    def test_pinned_identity_only(self, ut3_f3):
        # 8 смежных классов по 3 элемента вне коммутанта
        assert count_central_functions(ut3_f3, [ut3_f3.identity]) == 6 ** 8


class TestAutomorphisms:
    """Перебор автоморфизмов по образам порождающих"""

    def test_dihedral_group(self, ut3_f2):
        automorphisms = enumerate_automorphisms(ut3_f2)
        assert len(automorphisms) == 8
        for perm in automorphisms:
            assert table_is_homomorphism(ut3_f2, perm)

    def test_heisenberg_group(self, ut3_f3):
        # |Aut| = |F_3^2| * |GL(2, 3)|
        assert len(enumerate_automorphisms(ut3_f3)) == 9 * 48

    def test_parameter_budget(self, ut3_f3):
        with pytest.raises(BoundExceededError):
            enumerate_automorphisms(ut3_f3, param_budget=10)
