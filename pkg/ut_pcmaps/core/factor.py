"""
Конструктивное разложение в коммутаторы и переборные оракулы

Элемент коммутанта UT(n, F) (нулевая первая наддиагональ) - один коммутатор [b, c];
элемент с нулевыми первой и второй наддиагоналями - двойной коммутатор [x, [y, z]].
"""

import logging
import random
from typing import Optional, Sequence, Tuple

import numpy as np

from ut_pcmaps.core.errors import CheckFailure, PreconditionError
from ut_pcmaps.core.group_table import GroupTable
from ut_pcmaps.core.matrix import (
    UTElement,
    commutator,
    dense_mul,
    in_derived,
    in_second_derived_shape,
    positions,
    product,
    transvection,
)

logger = logging.getLogger(__name__)

FALLBACK_ATTEMPTS = 64


def _superdiagonal_element(n: int, field, beta: Sequence[int]) -> UTElement:
    """b = e + sum beta_i e_{i,i+1}"""
    return UTElement.from_mapping(n, field, {(i, i + 1): beta[i - 1] for i in range(1, n)})


def _solve_for_c(a: UTElement, beta: Sequence[int]) -> UTElement:
    """
    Решение b c = a c b относительно c = e + X по диагоналям

    Диагональ d элемента c входит в диагональ d + 1 невязки b c - a c b
    только через beta_i X_{i+1,j} - beta_{j-1} X_{i,j-1}; остальные слагаемые
    зависят от более коротких диагоналей. X_{1,1+d} и X_{1n} выбираются нулевыми.
    """
    n, f = a.n, a.field
    b = _superdiagonal_element(n, f, beta)
    b_dense, a_dense = b.to_dense(), a.to_dense()
    x = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    for d in range(1, n - 1):
        left = dense_mul(f, b_dense, x)
        right = dense_mul(f, dense_mul(f, a_dense, x), b_dense)
        # невязка на диагонали d + 1 при нулевой диагонали d
        residual = {
            i: f.sub(left[i - 1][i + d], right[i - 1][i + d])
            for i in range(1, n - d)
        }
        x[0][d] = 0
        for i in range(1, n - d):
            j = i + d + 1
            rhs = f.sub(f.mul(beta[j - 2], x[i - 1][j - 2]), residual[i])
            x[i][j - 1] = f.div(rhs, beta[i - 1])

    return UTElement(n, f, tuple(x[i - 1][j - 1] for i, j in positions(n)))


def factor_commutator(
    a: UTElement,
    beta: Optional[Sequence[int]] = None,
    seed: int = 0,
) -> Tuple[UTElement, UTElement]:
    """Найти (b, c) с [b, c] = a для a из коммутанта"""
    if not in_derived(a):
        raise PreconditionError(f"{a!r} has a nonzero superdiagonal and is not a commutator")
    n, f = a.n, a.field
    if n < 3 or a.is_identity():
        e = UTElement.identity(n, f)
        return e, e

    beta = list(beta) if beta is not None else [1] * (n - 1)
    if any(x == 0 for x in beta):
        raise PreconditionError("superdiagonal of b must be nonzero")

    rng = random.Random(seed)
    for attempt in range(FALLBACK_ATTEMPTS):
        b = _superdiagonal_element(n, f, beta)
        c = _solve_for_c(a, beta)
        if commutator(b, c) == a:
            if attempt:
                logger.warning("Factorisation of %r needed %d fallback superdiagonals", a, attempt)
            return b, c
        logger.debug("Superdiagonal %s failed for %r", beta, a)
        beta = [rng.randrange(1, f.q) for _ in range(n - 1)]

    raise CheckFailure(f"no commutator factorisation found for {a!r}", witness=a)


def factor_double_commutator(a: UTElement, seed: int = 0) -> Tuple[UTElement, UTElement, UTElement]:
    """Найти (x, y, z) с [x, [y, z]] = a для a с нулевыми первой и второй наддиагоналями"""
    if not in_second_derived_shape(a):
        raise PreconditionError(f"{a!r} is not of double-commutator shape")
    n, f = a.n, a.field
    e = UTElement.identity(n, f)
    if n < 4 or a.is_identity():
        return e, e, e

    if _supported_in_first_row(a):
        x = transvection(n, 1, 2, 1, f)
        y = transvection(n, 2, 3, 1, f)
        z = product([transvection(n, 3, j, a.entry(1, j), f) for j in range(4, n + 1)], n, f)
        if commutator(x, commutator(y, z)) == a:
            return x, y, z

    # при нулевой второй наддиагонали a решение c уравнения [x, c] = a лежит в коммутанте
    x, c = factor_commutator(a, seed=seed)
    if not in_derived(c):
        raise CheckFailure(f"inner factor of {a!r} left the derived subgroup", witness=a)
    y, z = factor_commutator(c, seed=seed)
    return x, y, z


def _supported_in_first_row(a: UTElement) -> bool:
    return all(x == 0 for (i, j), x in zip(positions(a.n), a.entries) if i != 1)


# --- переборные оракулы ---

def commutator_mask(table: GroupTable) -> np.ndarray:
    """Маска одиночных коммутаторов полным перебором пар"""
    return table.commutator_mask


def double_commutator_mask(table: GroupTable) -> np.ndarray:
    """Маска двойных коммутаторов [x, c], c пробегает множество коммутаторов"""
    inner = np.flatnonzero(table.commutator_mask)
    mask = np.zeros(table.order, dtype=bool)
    mask[np.unique(table.comm[:, inner])] = True
    return mask


def brute_force_factor(table: GroupTable, a: UTElement) -> Optional[Tuple[UTElement, UTElement]]:
    """Первая по порядку пара (b, c) с [b, c] = a или None"""
    hits = np.argwhere(table.comm == table.index(a))
    if not len(hits):
        return None
    b, c = hits[0]
    return table.element(int(b)), table.element(int(c))


def brute_force_double_factor(
    table: GroupTable, a: UTElement
) -> Optional[Tuple[UTElement, UTElement, UTElement]]:
    """Перебор x и коммутатора c = [y, z] с [x, c] = a"""
    target = table.index(a)
    inner = np.flatnonzero(table.commutator_mask)
    hits = np.argwhere(table.comm[:, inner] == target)
    if not len(hits):
        return None
    x, col = hits[0]
    c = int(inner[col])
    y, z = np.argwhere(table.comm == c)[0]
    return table.element(int(x)), table.element(int(y)), table.element(int(z))
