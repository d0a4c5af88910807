"""
Исключения ut-pcmaps
"""

from typing import Any, Optional


class ToolkitError(Exception):
    """Базовое исключение пакета"""


class FieldError(ToolkitError, ValueError):
    """Некорректные параметры поля или операнды из разных полей"""


class DimensionError(ToolkitError, ValueError):
    """Несогласованные размерности или индексы вне диапазона"""


class PreconditionError(ToolkitError, ValueError):
    """Нарушено предусловие операции"""


class BoundExceededError(ToolkitError):
    """Группа или пространство параметров больше допустимой границы"""


class SearchBudgetExceeded(ToolkitError):
    """Перебор превысил бюджет узлов; частичный результат сохраняется"""

    def __init__(self, message: str, partial: Any = None, nodes: int = 0):
        super().__init__(message)
        self.partial = partial
        self.nodes = nodes


class DecompositionError(ToolkitError):
    """Разложение не найдено в пределах перебора параметров"""


class CheckFailure(ToolkitError):
    """Проверка теоремы или тождества не прошла"""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness
