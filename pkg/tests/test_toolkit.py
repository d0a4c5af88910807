"""
Тесты оркестратора PCMapToolkit
"""

import os
import tempfile
from unittest.mock import patch

import numpy as np
import pytest

from ut_pcmaps.core.enumeration import enumerate_pc_maps
from ut_pcmaps.core.errors import BoundExceededError, SearchBudgetExceeded, ToolkitError
from ut_pcmaps.core.field import make_field
from ut_pcmaps.core.matrix import UTElement
from ut_pcmaps.core.toolkit import PCMapToolkit
from ut_pcmaps.models.schemas import ToolkitSettings


@pytest.fixture
def temp_db():
    with tempfile.NamedTemporaryFile(suffix=".db", delete=False) as f:
        db_path = f.name
    yield db_path
    os.unlink(db_path)


def test_group_table_is_cached():
    toolkit = PCMapToolkit()
    field = make_field(3)
    assert toolkit.group_table(3, field) is toolkit.group_table(3, field)


def test_group_bound_from_settings():
    toolkit = PCMapToolkit(ToolkitSettings(group_bound=100))
    with pytest.raises(BoundExceededError):
        toolkit.group_table(4, make_field(2))


@pytest.mark.asyncio
async def test_enumeration_uses_cache(temp_db):
    field = make_field(2)
    with patch("ut_pcmaps.core.toolkit.enumerate_pc_maps", wraps=enumerate_pc_maps) as search:
        async with PCMapToolkit(cache_path=temp_db) as toolkit:
            first = await toolkit.enumerate_maps(3, field)
            again = await toolkit.enumerate_maps(3, field)
        assert again is first
        assert search.call_count == 1

        async with PCMapToolkit(cache_path=temp_db) as toolkit:
            cached = await toolkit.enumerate_maps(3, field)
        assert search.call_count == 1

    assert cached.count == first.count


@pytest.mark.asyncio
async def test_decompose_table(temp_db):
    field = make_field(2)
    async with PCMapToolkit(cache_path=temp_db) as toolkit:
        record = await toolkit.decompose_table(3, field, list(range(8)))
        assert record.group == (3, 2, 1)
        assert record.permutable == (1, 0, 0, 1)
        assert record.central == [0] * 8
        assert [f.family for f in record.families] == ["permutable", "field", "central"]
        assert record.families[0].params == {"coeffs": [1, 0, 0, 1]}

        with patch("ut_pcmaps.core.toolkit.decompose_pc_map") as decompose:
            cached = await toolkit.decompose_table(3, field, list(range(8)))
        decompose.assert_not_called()
    assert cached.permutable == record.permutable
    assert cached.families == record.families


@pytest.mark.asyncio
async def test_verify_identities():
    toolkit = PCMapToolkit(ToolkitSettings(sample_count=20, seed=3))
    reports = await toolkit.verify_identities(5, make_field(3), names=["ZX", "Y"])
    assert {r.name for r in reports} == {"ZX", "Y"}
    assert all(r.passed and r.witness is None for r in reports)


@pytest.mark.asyncio
async def test_acceptance_single_commutators():
    report = await PCMapToolkit().run_acceptance([2])
    assert report.passed
    assert [c.number for c in report.criteria] == [2]
    assert report.criteria[0].details["UT(4, F_3)"]["factored"] == 27


@pytest.mark.asyncio
async def test_acceptance_records_failure():
    def broken(a, beta=None, seed=0):
        e = UTElement.identity(a.n, a.field)
        return e, e

    with patch("ut_pcmaps.core.toolkit.factor_commutator", side_effect=broken):
        report = await PCMapToolkit().run_acceptance([2])
    assert not report.passed
    assert report.criteria[0].witness is not None
    assert "error" in report.criteria[0].details


@pytest.mark.asyncio
async def test_acceptance_decomposition_round_trip():
    with patch("ut_pcmaps.core.toolkit.DECOMPOSITION_ROUNDS", 3):
        report = await PCMapToolkit().run_acceptance([6])
    assert report.passed
    assert report.criteria[0].details == {"rounds": 3}


@pytest.mark.asyncio
async def test_acceptance_almost_identity():
    report = await PCMapToolkit().run_acceptance([4])
    assert report.passed
    details = report.criteria[0].details
    assert details["UT(4, F_2)"]["count"] == details["UT(4, F_2)"]["expected"]


@pytest.mark.asyncio
async def test_unknown_criterion():
    with pytest.raises(ToolkitError):
        await PCMapToolkit().run_acceptance([42])


@pytest.mark.slow
@pytest.mark.asyncio
async def test_full_acceptance():
    report = await PCMapToolkit(ToolkitSettings(sample_count=200)).run_acceptance()
    assert report.passed, [c.details for c in report.criteria if not c.passed]
    assert len(report.criteria) == 8


@pytest.mark.asyncio
async def test_acceptance_records_exhausted_budget():
    exhausted = SearchBudgetExceeded("node budget 5 exceeded", nodes=5)
    with patch("ut_pcmaps.core.toolkit.enumerate_pc_maps", side_effect=exhausted):
        report = await PCMapToolkit().run_acceptance([4])
    assert not report.passed
    assert report.criteria[0].number == 4
    assert "node budget" in report.criteria[0].details["error"]


@pytest.mark.asyncio
async def test_acceptance_records_bound_exceeded():
    with patch("ut_pcmaps.core.toolkit.DECOMPOSITION_ROUNDS", 1), \
            patch("ut_pcmaps.core.toolkit.decompose_pc_map", side_effect=BoundExceededError("too many parameters")):
        report = await PCMapToolkit().run_acceptance([6])
    assert not report.passed
    assert report.criteria[0].details == {"error": "too many parameters"}
