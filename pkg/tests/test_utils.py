"""
Тесты вспомогательных функций и схем
"""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from ut_pcmaps.core.errors import DimensionError, FieldError
from ut_pcmaps.core.matrix import UTElement
from ut_pcmaps.models.schemas import ElementRecord, MapTableRecord, ToolkitSettings
from ut_pcmaps.utils.helpers import (
    field_record,
    format_matrix,
    format_table,
    parse_element,
    parse_order,
    seeded_rng,
    table_from_record,
    table_record,
    to_json,
)


@pytest.mark.parametrize("text,expected", [("9", (3, 2)), ("3^2", (3, 2)), ("2**3", (2, 3)), ("7", (7, 1))])
def test_parse_order(text, expected):
    assert parse_order(text) == expected


@pytest.mark.parametrize("text", ["6", "1", "x", "2^"])
def test_parse_order_errors(text):
    with pytest.raises(FieldError):
        parse_order(text)


def test_parse_element_list(f3):
    a = parse_element("[1, 2, 0]", 3, f3)
    assert a == UTElement.from_entries(3, f3, [1, 2, 0])


def test_parse_element_record():
    a = parse_element(json.dumps({"n": 3, "p": 3, "k": 2, "entries": [8, 0, 1]}))
    assert a.field.q == 9
    assert a.entry(1, 2) == 8


def test_parse_element_errors(f3):
    with pytest.raises(DimensionError):
        parse_element("[1, 2]", 3, f3)
    with pytest.raises(DimensionError):
        parse_element("[1, 2, 0]")
    with pytest.raises(DimensionError):
        parse_element(json.dumps({"n": 3, "p": 3, "entries": [0, 0, 0]}), 4, f3)
    with pytest.raises(FieldError):
        parse_element("[1, 5, 0]", 3, f3)


def test_element_record_validation():
    with pytest.raises(ValidationError):
        ElementRecord(n=3, p=3, entries=[0, -1, 0])


def test_settings_validation():
    assert ToolkitSettings().workers == 1
    with pytest.raises(ValidationError):
        ToolkitSettings(workers=0)


def test_table_record(ut3_f2):
    perm = np.arange(8)[::-1]
    record = table_record(ut3_f2, perm)
    assert record.group == (3, 2, 1)
    assert np.array_equal(table_from_record(record, ut3_f2), perm)
    with pytest.raises(DimensionError):
        table_from_record(MapTableRecord(group=(3, 3, 1), perm=list(range(8))), ut3_f2)
    with pytest.raises(DimensionError):
        table_from_record(MapTableRecord(group=(3, 2, 1), perm=[0, 1]), ut3_f2)


def test_to_json_is_deterministic(f3):
    value = {"b": np.int64(2), "a": np.arange(3), "field": f3, "e": UTElement.identity(2, f3)}
    text = to_json(value)
    assert text == to_json(dict(reversed(list(value.items()))))
    assert json.loads(text)["a"] == [0, 1, 2]
    assert json.loads(text)["field"] == {"p": 3, "k": 1}


def test_field_record(f4):
    record = field_record(f4)
    assert record.modulus == [1, 1, 1]
    assert record.q == 4


def test_seeded_rng_is_reproducible():
    assert seeded_rng(1, "x", 3).random() == seeded_rng(1, "x", 3).random()
    assert seeded_rng(1, "x", 3).random() != seeded_rng(2, "x", 3).random()


def test_format_matrix(f5):
    text = format_matrix(UTElement.from_entries(3, f5, [1, 2, 3]))
    assert text.splitlines() == ["1 1 2", "0 1 3", "0 0 1"]


def test_format_table():
    text = format_table([("ZX", 10), ("Y", 3)], ["name", "count"])
    assert text.splitlines()[0] == "name  count"
    assert text.splitlines()[2] == "ZX    10"
