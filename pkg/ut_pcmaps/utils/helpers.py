"""
Вспомогательные функции для ut-pcmaps
"""

import json
import random
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ut_pcmaps.core.errors import DimensionError, FieldError
from ut_pcmaps.core.field import Field, make_field
from ut_pcmaps.core.group_table import GroupTable
from ut_pcmaps.core.matrix import UTElement, entry_count
from ut_pcmaps.models.schemas import ElementRecord, FieldRecord, MapTableRecord


def parse_order(text: str) -> Tuple[int, int]:
    """Разобрать порядок поля: "9", "3^2" или "3**2" -> (p, k)"""
    text = text.strip().replace("**", "^")
    try:
        if "^" in text:
            base, exp = text.split("^", 1)
            p, k = int(base), int(exp)
        else:
            q = int(text)
            p, k = _prime_power(q)
    except ValueError as e:
        raise FieldError(f"cannot parse field order {text!r}") from e
    return p, k


def _prime_power(q: int) -> Tuple[int, int]:
    if q < 2:
        raise FieldError(f"field order must be >= 2, got {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, rest = 0, q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, k


def field_from_order(text: str) -> Field:
    return make_field(*parse_order(text))


def seeded_rng(seed: int, *parts: Any) -> random.Random:
    """Генератор с зерном, выведенным из seed и параметров прогона"""
    return random.Random(":".join(str(x) for x in (seed,) + parts))


def field_record(field: Field) -> FieldRecord:
    return FieldRecord(
        p=field.p,
        k=field.k,
        q=field.q,
        modulus=list(field.modulus) if field.k > 1 else None,
        primitive=field.generator,
    )


def element_record(a: UTElement) -> ElementRecord:
    return ElementRecord(n=a.n, p=a.field.p, k=a.field.k, entries=list(a.entries))


def element_from_record(record: ElementRecord) -> UTElement:
    field = make_field(record.p, record.k)
    if len(record.entries) != entry_count(record.n):
        raise DimensionError(f"UT({record.n}) needs {entry_count(record.n)} entries, got {len(record.entries)}")
    return UTElement.from_entries(record.n, field, record.entries)


def parse_element(text: str, n: Optional[int] = None, field: Optional[Field] = None) -> UTElement:
    """
    Элемент из JSON: полная запись ElementRecord или список элементов

    Для списка размерность и поле берутся из аргументов командной строки.
    """
    data = json.loads(text)
    if isinstance(data, dict):
        a = element_from_record(ElementRecord.model_validate(data))
        if n is not None and a.n != n:
            raise DimensionError(f"element of UT({a.n}) given for n={n}")
        return a
    if n is None or field is None:
        raise DimensionError("a bare entry list needs --n and --q")
    if len(data) != entry_count(n):
        raise DimensionError(f"UT({n}) needs {entry_count(n)} entries, got {len(data)}")
    return UTElement.from_entries(n, field, data)


def table_record(table: GroupTable, perm: np.ndarray) -> MapTableRecord:
    return MapTableRecord(group=(table.n, table.field.p, table.field.k), perm=[int(x) for x in perm])


def table_from_record(record: MapTableRecord, table: GroupTable) -> np.ndarray:
    n, p, k = record.group
    if (n, p, k) != (table.n, table.field.p, table.field.k):
        raise DimensionError(f"map table for UT({n}, F_{p}^{k}) used on {table!r}")
    perm = np.asarray(record.perm, dtype=np.int64)
    if perm.shape != (table.order,):
        raise DimensionError(f"map table of length {len(perm)} for a group of order {table.order}")
    return perm


def to_json(value: Any) -> str:
    """Детерминированный JSON: сортированные ключи, без пробелов"""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), default=_default)


def _default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, UTElement):
        return element_record(value).model_dump()
    if isinstance(value, Field):
        return {"p": value.p, "k": value.k}
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def format_matrix(a: UTElement) -> str:
    """Матрица построчно, элементы поля индексами"""
    width = max(len(str(x)) for x in a.entries + (1,))
    return "\n".join(" ".join(str(x).rjust(width) for x in a.row(i)) for i in range(1, a.n + 1))


def format_table(rows: Iterable[Sequence[Any]], headers: Sequence[str]) -> str:
    """Простая текстовая таблица с выравниванием по столбцам"""
    body: List[List[str]] = [[str(x) for x in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in body:
        widths = [max(w, len(x)) for w, x in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [line(list(headers)), line(["-" * w for w in widths])]
    out.extend(line(row) for row in body)
    return "\n".join(out)


def jsonable(value: Any) -> Any:
    """Значение, пригодное для pydantic-записи и JSON (элементы, поля, массивы numpy)"""
    return json.loads(to_json(value))
