"""
Тесты матричных тождеств и прогонов проверок
"""

import random

import pytest

from ut_pcmaps.core.errors import DimensionError, PreconditionError
from ut_pcmaps.core.field import make_field
from ut_pcmaps.core.identities import (
    IDENTITY_CHECKS,
    block_tail,
    check_1row_double_commutator,
    check_block_commutator,
    check_extraction_first_col,
    check_extraction_last_row,
    check_subcentral_inner_note,
    check_ut3_extraction,
    check_Y_identity,
    check_YZ_identity,
    check_YZ_substitution,
    check_ZX_identity,
    run_identity_sweep,
    shift_block_element,
    verify_identities,
)
from ut_pcmaps.core.matrix import UTElement, commutator, multiply, random_element, transvection


class TestExtraction:
    """Извлечение элементов обратной матрицы и самой матрицы коммутаторами"""

    def test_first_column_random(self, f5):
        rng = random.Random(0)
        for _ in range(20):
            a = random_element(6, f5, rng)
            for i in range(2, 6):
                for j in range(2, 6):
                    assert check_extraction_first_col(a, i, j)

    def test_last_row_random(self, f3):
        rng = random.Random(1)
        for _ in range(20):
            a = random_element(5, f3, rng)
            for i in range(2, 5):
                for j in range(2, 5):
                    assert check_extraction_last_row(a, i, j)

    def test_first_column_extracts_inverse_entry(self, f2):
        # a = t_12(1) t_23(1): a'_23 = 1, поэтому [[t_12(-1), a], t_34(1)] = t_14(1)
        a = multiply(transvection(4, 1, 2, 1, f2), transvection(4, 2, 3, 1, f2))
        first = commutator(transvection(4, 1, 2, 1, f2), a)
        assert commutator(first, transvection(4, 3, 4, 1, f2)) == transvection(4, 1, 4, 1, f2)
        assert check_extraction_first_col(a, 2, 3)

    def test_index_range(self, f3):
        a = UTElement.identity(4, f3)
        with pytest.raises(DimensionError):
            check_extraction_first_col(a, 1, 2)
        with pytest.raises(DimensionError):
            check_extraction_last_row(a, 2, 4)

    def test_ut3(self, ut3_f3):
        for a in ut3_f3.elements():
            assert check_ut3_extraction(a)

    def test_ut3_only(self, f3):
        with pytest.raises(DimensionError):
            check_ut3_extraction(UTElement.identity(4, f3))


class TestLadder:
    """Тождества Y, YZ и ZX"""

    @pytest.mark.parametrize("j", [2, 3, 4])
    def test_y_identity(self, f5, j):
        assert check_Y_identity(5, f5, 1, 3, [], j)

    def test_y_identity_with_alphas(self, f3):
        for j in range(4, 7):
            assert check_Y_identity(7, f3, 3, 2, [1, 2], j)

    def test_y_identity_range(self, f3):
        with pytest.raises(DimensionError):
            check_Y_identity(5, f3, 3, 1, [1, 1], 4)

    def test_yz_identity(self, f5):
        assert check_YZ_identity(6, f5, 2, 4, [3])
        assert check_YZ_identity(7, f5, 3, 2, [1, 4])

    def test_yz_substitution(self, f5):
        assert check_YZ_substitution(5, f5, [1, 2])
        assert check_YZ_substitution(7, f5, [3, 0, 4])

    def test_yz_substitution_needs_unit(self, f5):
        with pytest.raises(PreconditionError):
            check_YZ_substitution(5, f5, [1, 0])

    def test_zx_identity(self, f3):
        rng = random.Random(2)
        for _ in range(20):
            a = random_element(7, f3, rng)
            for k in range(1, 5):
                assert check_ZX_identity(a, k)

    def test_zx_range(self, f3):
        with pytest.raises(DimensionError):
            check_ZX_identity(UTElement.identity(5, f3), 3)


class TestBlocks:
    """Коммутаторы элементов первой строки"""

    def test_shift_element_shape(self, f3):
        b = shift_block_element(5, f3)
        for i in range(1, 6):
            for j in range(i + 1, 6):
                assert b.entry(i, j) == (0 if i == 1 else 1)

    def test_commutator_with_shift(self, f5):
        n = 6
        u = [1, 2, 3, 4, 1]
        b = shift_block_element(n, f5)
        a = UTElement.from_mapping(n, f5, {(1, j + 2): x for j, x in enumerate(u)})
        shifted = UTElement.from_mapping(n, f5, {(1, j + 2): x for j, x in enumerate([0] + u[:-1])})
        assert commutator(a, b) == shifted
        assert check_block_commutator(u, b)

    def test_block_commutator_random(self, f3):
        rng = random.Random(3)
        for _ in range(20):
            b = random_element(5, f3, rng)
            u = [rng.randrange(3) for _ in range(4)]
            assert check_block_commutator(u, b)

    def test_block_tail(self, f3):
        b = UTElement.from_mapping(4, f3, {(1, 2): 1, (2, 3): 2, (3, 4): 1})
        assert block_tail(b) == UTElement.from_mapping(3, f3, {(1, 2): 2, (2, 3): 1})

    def test_row_double_commutator(self, f5):
        assert check_1row_double_commutator(6, f5, [0, 0, 1, 2, 3])

    def test_row_double_commutator_precondition(self, f5):
        with pytest.raises(PreconditionError):
            check_1row_double_commutator(5, f5, [1, 0, 0, 0])

    def test_subcentral_inner_note(self, ut4_f3, f3):
        for alpha in range(3):
            for beta in range(3):
                assert check_subcentral_inner_note(4, f3, alpha, beta, ut4_f3.elements())

    def test_subcentral_inner_note_sampled(self, f5):
        assert check_subcentral_inner_note(6, f5, 2, 3)


class TestSweeps:
    """Полные и случайные прогоны"""

    @pytest.mark.parametrize("n,p", [(3, 2), (4, 2), (3, 3)])
    def test_exhaustive_small_groups(self, n, p):
        results = verify_identities(n, make_field(p), exhaustive=True)
        assert results
        assert all(r.passed for r in results)
        assert all(r.mode == "exhaustive" for r in results)

    def test_random_sweep(self):
        results = verify_identities(7, make_field(3, 2), count=30)
        names = {r.name for r in results}
        assert "ut3_extraction" not in names
        assert {"YZ", "ZX", "block_commutator"} <= names
        assert all(r.passed for r in results)

    def test_exhaustive_limit(self, f3):
        with pytest.raises(DimensionError):
            verify_identities(5, f3, exhaustive=True)

    def test_selected_names(self, f5):
        results = verify_identities(6, f5, count=10, names=["ZX"])
        assert [r.name for r in results] == ["ZX"]
        assert results[0].instances > 0

    def test_embedding(self, f2):
        result = run_identity_sweep(IDENTITY_CHECKS["ZX"], 4, f2, count=20, embed_up_to=8)
        assert result.passed
        assert result.embedded_instances > 0
        assert result.embedding_failures == 0

    def test_last_row_embedding(self, f3):
        result = run_identity_sweep(IDENTITY_CHECKS["extraction_last_row"], 4, f3, count=30, embed_up_to=7)
        assert result.embedded_instances > 0
        assert result.embedding_failures == 0
        assert result.passed

    def test_last_row_embedding_moves_last_column(self, f3):
        a = UTElement.from_mapping(3, f3, {(1, 2): 1, (1, 3): 2, (2, 3): 1})
        moved, i, j = IDENTITY_CHECKS["extraction_last_row"].embed((a, 2, 2), 5)
        assert moved == UTElement.from_mapping(5, f3, {(1, 2): 1, (1, 5): 2, (2, 5): 1})
        assert (i, j) == (2, 2)
        assert check_extraction_last_row(moved, i, j)

    def test_not_applicable(self, f3):
        result = run_identity_sweep(IDENTITY_CHECKS["YZ"], 4, f3, count=10)
        assert result.instances == 0
        assert result.passed

    def test_reproducible(self, f5):
        first = verify_identities(6, f5, count=15, seed=7)
        second = verify_identities(6, f5, count=15, seed=7)
        assert [(r.name, r.instances) for r in first] == [(r.name, r.instances) for r in second]
