"""
Тесты таблицы Кэли UT(n, F_q)
"""

import numpy as np
import pytest

from ut_pcmaps.core.errors import BoundExceededError, DimensionError
from ut_pcmaps.core.group_table import build_group_table
from ut_pcmaps.core.matrix import UTElement, commutator, higher_center_member, inverse, multiply, transvection


def test_order_and_identity(ut3_f3):
    assert ut3_f3.order == 27
    assert len(ut3_f3) == 27
    assert ut3_f3.element(ut3_f3.identity).is_identity()


def test_index_layout(ut3_f3, f3):
    # индекс = a12 * 9 + a13 * 3 + a23
    a = UTElement.from_entries(3, f3, [1, 2, 0])
    assert ut3_f3.index(a) == 15
    assert ut3_f3.element(15) == a


def test_tables_match_element_arithmetic(ut3_f3):
    for x in range(0, ut3_f3.order, 4):
        for y in range(0, ut3_f3.order, 3):
            a, b = ut3_f3.element(x), ut3_f3.element(y)
            assert ut3_f3.element(ut3_f3.mul[x, y]) == multiply(a, b)
            assert ut3_f3.element(ut3_f3.comm[x, y]) == commutator(a, b)
        assert ut3_f3.element(ut3_f3.inv[x]) == inverse(ut3_f3.element(x))


def test_associativity(ut4_f2):
    assert ut4_f2.check_associativity(samples=500)


def test_bound(f3):
    with pytest.raises(BoundExceededError):
        build_group_table(5, f3)


def test_foreign_element(ut3_f3, f2):
    with pytest.raises(DimensionError):
        ut3_f3.index(UTElement.identity(3, f2))


def test_transvection_lookup(ut4_f3, f3):
    idx = ut4_f3.transvection(2, 4, 2)
    assert ut4_f3.element(idx) == transvection(4, 2, 4, 2, f3)
    assert ut4_f3.transvection(1, 2, 0) == ut4_f3.identity


def test_commutator_set_is_derived_subgroup(ut4_f3):
    assert np.array_equal(ut4_f3.commutator_mask, ut4_f3.derived_mask)
    assert ut4_f3.derived_mask.sum() == 27


def test_derived_of_ut3(ut3_f3):
    assert ut3_f3.derived_mask.sum() == 3


def test_second_derived(ut5_f2):
    assert ut5_f2.second_derived_mask.sum() == 8


def test_center_series(ut4_f2):
    series = ut4_f2.center_series()
    # C_1 = центр {t_14}, C_2 - элементы с нулевой первой наддиагональю, C_3 - вся группа
    assert [int(s.sum()) for s in series] == [2, 8, 64]
    r = ut4_f2.position(1, 4)
    center = np.flatnonzero(series[0])
    assert set(ut4_f2.entries[center, r].tolist()) == {0, 1}


@pytest.mark.parametrize("name", ["ut3_f3", "ut4_f2", "ut5_f2"])
def test_center_series_matches_closed_form(name, request):
    table = request.getfixturevalue(name)
    for m, members in enumerate(table.center_series(), start=1):
        closed = [higher_center_member(table.element(x), m) for x in range(table.order)]
        assert members.tolist() == closed


def test_center_coset_keys(ut3_f2):
    keys = ut3_f2.center_coset_keys()
    assert len(np.unique(keys)) == 4
    assert keys[ut3_f2.transvection(1, 3, 1)] == ut3_f2.identity


def test_pickle_round_trip(ut3_f2):
    import pickle

    copy = pickle.loads(pickle.dumps(ut3_f2))
    assert np.array_equal(copy.mul, ut3_f2.mul)
