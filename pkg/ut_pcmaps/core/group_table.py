"""
Таблица Кэли конечной группы UT(n, F_q)

Элементы нумеруются лексикографически по вектору строго верхних элементов:
индекс = sum entries[r] * q^(m-1-r). Единица имеет индекс 0.
"""

import logging
import random
from typing import Dict, List, Optional, Tuple

import numpy as np

from ut_pcmaps.core.errors import BoundExceededError, DimensionError
from ut_pcmaps.core.field import Field
from ut_pcmaps.core.matrix import UTElement, entry_count, position_index, positions

logger = logging.getLogger(__name__)

DEFAULT_GROUP_BOUND = 4096


class GroupTable:
    """Индексированная группа UT(n, F_q) с таблицами умножения, обратных и коммутаторов"""

    def __init__(self, n: int, field: Field, bound: int = DEFAULT_GROUP_BOUND):
        m = entry_count(n)
        order = field.q ** m
        if order > bound:
            raise BoundExceededError(
                f"|UT({n}, F_{field.q})| = {order} exceeds the group bound {bound}"
            )
        self.n = n
        self.field = field
        self.order = order
        self.width = m
        q = field.q
        self.weights = np.array([q ** (m - 1 - r) for r in range(m)], dtype=np.int64)

        codes = np.arange(order, dtype=np.int64)
        # entries[x, r] - r-й строго верхний элемент x-го элемента группы
        self.entries = (codes[:, None] // self.weights[None, :]) % q

        self.mul = self._build_mul()
        self.identity = 0
        self.inv = np.argmax(self.mul == self.identity, axis=1).astype(np.int64)
        # [x, y] = ((x y) x^(-1)) y^(-1)
        self.comm = self.mul[self.mul[self.mul, self.inv[:, None]], self.inv[None, :]]

        self.transvection_indices = self._transvections()
        logger.info("Built group table UT(%d, F_%d) of order %d", n, q, order)

    def _build_mul(self) -> np.ndarray:
        """Векторизованное умножение: c_ij = a_ij + b_ij + sum_k a_ik b_kj"""
        f = self.field
        add, mul = f.add_table, f.mul_table
        index = position_index(self.n)
        e = self.entries
        table = np.zeros((self.order, self.order), dtype=np.int64)
        for (i, j), r in index.items():
            acc = add[e[:, r][:, None], e[:, r][None, :]]
            for k in range(i + 1, j):
                left = e[:, index[(i, k)]][:, None]
                right = e[:, index[(k, j)]][None, :]
                acc = add[acc, mul[left, right]]
            table += acc * self.weights[r]
        return table

    def _transvections(self) -> Dict[Tuple[int, int, int], int]:
        result = {}
        for (i, j) in positions(self.n):
            for alpha in range(1, self.field.q):
                result[(i, j, alpha)] = self.index(
                    UTElement.from_mapping(self.n, self.field, {(i, j): alpha})
                )
        return result

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"GroupTable(UT({self.n}, F_{self.field.q}), order={self.order})"

    def __reduce__(self):
        return (build_group_table, (self.n, self.field, self.order))

    # --- индексы и элементы ---

    def encode(self, entries: np.ndarray) -> np.ndarray:
        """Матрица элементов (строки - векторы записей) -> индексы"""
        return np.asarray(entries, dtype=np.int64) @ self.weights

    def index(self, element: UTElement) -> int:
        if element.n != self.n or element.field != self.field:
            raise DimensionError(f"{element!r} is not an element of {self!r}")
        return int(np.dot(np.array(element.entries, dtype=np.int64), self.weights)) if self.width else 0

    def element(self, idx: int) -> UTElement:
        return UTElement(self.n, self.field, tuple(int(x) for x in self.entries[idx]))

    def elements(self) -> List[UTElement]:
        return [self.element(i) for i in range(self.order)]

    def transvection(self, i: int, j: int, alpha: int) -> int:
        if alpha == 0:
            return self.identity
        return self.transvection_indices[(i, j, alpha)]

    def position(self, i: int, j: int) -> int:
        return position_index(self.n)[(i, j)]

    def column(self, i: int, j: int) -> np.ndarray:
        """Элемент (i, j) всех элементов группы"""
        return self.entries[:, self.position(i, j)]

    # --- подмножества ---

    @property
    def derived_mask(self) -> np.ndarray:
        mask = np.ones(self.order, dtype=bool)
        for i in range(1, self.n):
            mask &= self.column(i, i + 1) == 0
        return mask

    @property
    def second_derived_mask(self) -> np.ndarray:
        """Нулевые первая и вторая наддиагонали"""
        mask = self.derived_mask
        for i in range(1, self.n - 1):
            mask &= self.column(i, i + 2) == 0
        return mask

    @property
    def commutator_mask(self) -> np.ndarray:
        mask = np.zeros(self.order, dtype=bool)
        mask[np.unique(self.comm)] = True
        return mask

    def center_coset_keys(self) -> np.ndarray:
        """Ключ смежного класса по центру: индекс с обнулённым элементом (1, n)"""
        if self.n < 2:
            return np.zeros(self.order, dtype=np.int64)
        r = self.position(1, self.n)
        return np.arange(self.order, dtype=np.int64) - self.entries[:, r] * self.weights[r]

    def center_series(self) -> List[np.ndarray]:
        """C_1, ..., C_{n-1} по рекурсивному определению (прообраз центра)"""
        series = []
        previous = np.zeros(self.order, dtype=bool)
        previous[self.identity] = True
        for _ in range(max(self.n - 1, 1)):
            current = previous[self.comm].all(axis=1)
            series.append(current)
            previous = current
        return series

    def check_associativity(self, samples: int = 1000, seed: int = 0) -> bool:
        rng = random.Random(seed)
        mul = self.mul
        for _ in range(samples):
            x, y, z = (rng.randrange(self.order) for _ in range(3))
            if mul[mul[x, y], z] != mul[x, mul[y, z]]:
                return False
        return True


def build_group_table(n: int, field: Field, bound: int = DEFAULT_GROUP_BOUND) -> GroupTable:
    """Полная таблица Кэли UT(n, F_q) при q^(n(n-1)/2) <= bound"""
    return GroupTable(n, field, bound)
