"""
Модели данных для ut-pcmaps
"""

from ut_pcmaps.models.schemas import (
    AcceptanceReport,
    CriterionResult,
    DecompositionRecord,
    ElementRecord,
    EnumerationHeader,
    FactorizationRecord,
    FamilyRecord,
    FieldRecord,
    IdentityReport,
    MapTableRecord,
    ToolkitSettings,
)

__all__ = [
    "AcceptanceReport",
    "CriterionResult",
    "DecompositionRecord",
    "ElementRecord",
    "EnumerationHeader",
    "FactorizationRecord",
    "FamilyRecord",
    "FieldRecord",
    "IdentityReport",
    "MapTableRecord",
    "ToolkitSettings",
]
