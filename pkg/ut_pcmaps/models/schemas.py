"""
Схемы данных для ut-pcmaps
"""

from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


class ToolkitSettings(BaseModel):
    """Параметры запуска: границы перебора, зерно, параллелизм"""
    group_bound: int = Field(4096, gt=0)
    node_budget: int = Field(10 ** 8, gt=0)
    param_budget: int = Field(10 ** 6, gt=0)
    sample_count: int = Field(1000, gt=0)
    seed: int = 0
    workers: int = Field(1, ge=1)
    expand_limit: int = Field(10000, gt=0)
    progress: bool = False


class FieldRecord(BaseModel):
    """Описание поля F_q, q = p^k"""
    p: int
    k: int
    q: int
    modulus: Optional[List[int]] = None
    primitive: Optional[int] = None


class ElementRecord(BaseModel):
    """Элемент UT(n, F_q): строго верхние элементы построчно, индексы поля"""
    n: int
    p: int
    k: int = 1
    entries: List[int]

    @field_validator("entries")
    @classmethod
    def _non_negative(cls, v: List[int]) -> List[int]:
        if any(x < 0 for x in v):
            raise ValueError("field indices are non-negative")
        return v


class MapTableRecord(BaseModel):
    """Таблица отображения: перестановка индексов элементов GroupTable"""
    group: Tuple[int, int, int]
    perm: List[int]


class FamilyRecord(BaseModel):
    """Происхождение отображения из стандартного семейства"""
    family: str
    params: Dict[str, Any] = {}


class FactorizationRecord(BaseModel):
    """Разложение в коммутатор [b, c] или двойной коммутатор [x, [y, z]]"""
    target: ElementRecord
    kind: str
    factors: List[ElementRecord]


class EnumerationHeader(BaseModel):
    """Заголовок потока перебора PC-отображений"""
    group: Tuple[int, int, int]
    order: int
    constraint: str
    count: int
    representatives: int
    twin_classes: List[int]
    nodes: int = 0
    expanded: bool = False


class DecompositionRecord(BaseModel):
    """Разложение PC-отображения на стандартные семейства"""
    group: Tuple[int, int, int]
    families: List[FamilyRecord] = []
    central: List[int]
    field_power: int = 0
    graph: bool = False
    subcentral: Tuple[int, int] = (0, 0)
    quasi_inner_diag: Optional[List[int]] = None
    quasi_inner_unipotent: Optional[List[int]] = None
    permutable: Optional[Tuple[int, int, int, int]] = None
    created_at: Optional[datetime] = None


class IdentityReport(BaseModel):
    """Итог прогона одного тождества на одной (n, q)"""
    name: str
    n: int
    q: int
    mode: str
    instances: int
    failures: int
    embedded_instances: int = 0
    embedding_failures: int = 0
    passed: bool
    witness: Optional[Any] = None


class CriterionResult(BaseModel):
    """Результат одного критерия приёмки"""
    number: int
    title: str
    passed: bool
    details: Dict[str, Any] = {}
    elapsed: float = 0.0
    witness: Optional[Any] = None


class AcceptanceReport(BaseModel):
    """Сводка по критериям приёмки"""
    seed: int
    criteria: List[CriterionResult]
    passed: bool
    elapsed: float = 0.0
