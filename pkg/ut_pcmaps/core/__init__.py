"""
Основные компоненты ut-pcmaps
"""

from ut_pcmaps.core.database import DatabaseManager
from ut_pcmaps.core.field import Field, make_field
from ut_pcmaps.core.group_table import GroupTable, build_group_table
from ut_pcmaps.core.matrix import UTElement, transvection
from ut_pcmaps.core.toolkit import PCMapToolkit

__all__ = [
    "DatabaseManager",
    "Field",
    "GroupTable",
    "PCMapToolkit",
    "UTElement",
    "build_group_table",
    "make_field",
    "transvection",
]
