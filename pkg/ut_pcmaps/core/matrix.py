"""
Группа UT(n, F_q) и объемлющая группа T(n, F_q)

Элемент UT(n, F) хранит только строго верхние элементы (построчно),
диагональ неявно единичная. Все индексы в интерфейсах 1-базные.
"""

import functools
import itertools
import random
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ut_pcmaps.core.errors import DimensionError, FieldError
from ut_pcmaps.core.field import Field, FieldElem

Scalar = Union[int, FieldElem]
Dense = List[List[int]]


@functools.lru_cache(maxsize=None)
def positions(n: int) -> Tuple[Tuple[int, int], ...]:
    """Позиции (i, j), i < j, в построчном порядке хранения"""
    return tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1))


@functools.lru_cache(maxsize=None)
def position_index(n: int) -> Dict[Tuple[int, int], int]:
    return {pos: r for r, pos in enumerate(positions(n))}


def entry_count(n: int) -> int:
    return n * (n - 1) // 2


def _scalar(field: Field, alpha: Scalar) -> int:
    if isinstance(alpha, FieldElem):
        if alpha.field != field:
            raise FieldError(f"mixed fields: {alpha.field} and {field}")
        return alpha.value
    return field.check_index(int(alpha))


@dataclass(frozen=True)
class UTElement:
    """Унитреугольная матрица: n, поле и строго верхние элементы a_ij (построчно)"""

    n: int
    field: Field
    entries: Tuple[int, ...]
    _index: Dict[Tuple[int, int], int] = dataclass_field(
        default=None, init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        if self.n < 2:
            raise DimensionError(f"dimension must be >= 2, got {self.n}")
        if len(self.entries) != entry_count(self.n):
            raise DimensionError(
                f"UT({self.n}) needs {entry_count(self.n)} entries, got {len(self.entries)}"
            )
        object.__setattr__(self, "_index", position_index(self.n))

    # --- конструкторы ---

    @classmethod
    def identity(cls, n: int, field: Field) -> "UTElement":
        return cls(n, field, (0,) * entry_count(n))

    @classmethod
    def from_entries(cls, n: int, field: Field, entries: Sequence[Scalar]) -> "UTElement":
        return cls(n, field, tuple(_scalar(field, x) for x in entries))

    @classmethod
    def from_mapping(cls, n: int, field: Field, values: Dict[Tuple[int, int], Scalar]) -> "UTElement":
        index = position_index(n)
        entries = [0] * entry_count(n)
        for (i, j), alpha in values.items():
            if (i, j) not in index:
                raise DimensionError(f"({i},{j}) is not a strictly upper position of UT({n})")
            entries[index[(i, j)]] = _scalar(field, alpha)
        return cls(n, field, tuple(entries))

    @classmethod
    def from_dense(cls, field: Field, rows: Dense) -> "UTElement":
        n = len(rows)
        for i in range(n):
            for j in range(n):
                expected = 1 if i == j else 0
                if j <= i and rows[i][j] != expected:
                    raise DimensionError("matrix is not upper unitriangular")
        return cls(n, field, tuple(rows[i - 1][j - 1] for i, j in positions(n)))

    # --- доступ к элементам ---

    def entry(self, i: int, j: int) -> int:
        """Индекс элемента a_ij, включая диагональ и нижний треугольник"""
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise DimensionError(f"({i},{j}) outside {self.n}x{self.n}")
        if i == j:
            return 1
        if i > j:
            return 0
        return self.entries[self._index[(i, j)]]

    def __getitem__(self, ij: Tuple[int, int]) -> FieldElem:
        return FieldElem(self.entry(*ij), self.field)

    def row(self, i: int) -> Tuple[int, ...]:
        """a_{i*}"""
        return tuple(self.entry(i, j) for j in range(1, self.n + 1))

    def col(self, j: int) -> Tuple[int, ...]:
        """a_{*j}"""
        return tuple(self.entry(i, j) for i in range(1, self.n + 1))

    def to_dense(self) -> Dense:
        return [list(self.row(i)) for i in range(1, self.n + 1)]

    def is_identity(self) -> bool:
        return not any(self.entries)

    def support(self) -> int:
        """Наибольший индекс, затронутый ненулевым элементом (0 для e)"""
        top = 0
        for (i, j), x in zip(positions(self.n), self.entries):
            if x:
                top = max(top, j)
        return top

    def _same_group(self, other: "UTElement") -> None:
        if self.n != other.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")
        if self.field != other.field:
            raise FieldError(f"field mismatch: {self.field} vs {other.field}")

    # --- групповые операции ---

    def __mul__(self, other: "UTElement") -> "UTElement":
        return multiply(self, other)

    def inverse(self) -> "UTElement":
        return inverse(self)

    def __repr__(self) -> str:
        nonzero = {
            f"{i}{j}" if self.n < 10 else f"{i},{j}": x
            for (i, j), x in zip(positions(self.n), self.entries) if x
        }
        return f"UT{self.n}/F{self.field.q}{nonzero or '{e}'}"


def transvection(n: int, i: int, j: int, alpha: Scalar, field: Optional[Field] = None) -> UTElement:
    """t_ij(alpha) = e + alpha e_ij"""
    if field is None:
        if not isinstance(alpha, FieldElem):
            raise FieldError("field is required when alpha is a plain index")
        field = alpha.field
    if not (1 <= i < j <= n):
        raise DimensionError(f"transvection needs 1 <= i < j <= n, got ({i},{j}) with n={n}")
    return UTElement.from_mapping(n, field, {(i, j): alpha})


def multiply(a: UTElement, b: UTElement) -> UTElement:
    """Произведение a*b в UT(n, F)"""
    a._same_group(b)
    n = a.n
    f = a.field
    add, mul = f._add, f._mul
    index = a._index
    ae, be = a.entries, b.entries
    out = []
    for i, j in positions(n):
        r = index[(i, j)]
        s = add[ae[r]][be[r]]
        for k in range(i + 1, j):
            x = ae[index[(i, k)]]
            if x:
                y = be[index[(k, j)]]
                if y:
                    s = add[s][mul[x][y]]
        out.append(s)
    return UTElement(n, f, tuple(out))


def dense_mul(field: Field, a: Dense, b: Dense) -> Dense:
    """Произведение квадратных матриц над полем (индексы элементов)"""
    n = len(a)
    add, mul = field._add, field._mul
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k in range(n):
            x = ai[k]
            if not x:
                continue
            bk = b[k]
            for j in range(n):
                y = bk[j]
                if y:
                    oi[j] = add[oi[j]][mul[x][y]]
    return out


def dense_add(field: Field, a: Dense, b: Dense) -> Dense:
    return [[field.add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def dense_identity(n: int) -> Dense:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def outer(field: Field, column: Sequence[int], row: Sequence[int]) -> Dense:
    """Произведение столбца на строку"""
    return [[field.mul(x, y) for y in row] for x in column]


def inverse(a: UTElement) -> UTElement:
    """a^(-1) = sum_{k<n} (e - a)^k; e - a нильпотентна"""
    n, f = a.n, a.field
    nil = [[0] * n for _ in range(n)]
    for (i, j), x in zip(positions(n), a.entries):
        nil[i - 1][j - 1] = f.neg(x)
    total = dense_identity(n)
    power = dense_identity(n)
    for _ in range(n - 1):
        power = dense_mul(f, power, nil)
        total = dense_add(f, total, power)
    return UTElement(n, f, tuple(total[i - 1][j - 1] for i, j in positions(n)))


def inverse_by_substitution(a: UTElement) -> UTElement:
    """Обратная матрица обратной подстановкой из a*x = e"""
    n, f = a.n, a.field
    x = dense_identity(n)
    for j in range(n, 0, -1):
        for i in range(j - 1, 0, -1):
            s = 0
            for k in range(i + 1, j + 1):
                s = f.add(s, f.mul(a.entry(i, k), x[k - 1][j - 1]))
            x[i - 1][j - 1] = f.neg(s)
    return UTElement.from_dense(f, x)


def commutator(a: UTElement, b: UTElement) -> UTElement:
    """[a, b] = a b a^(-1) b^(-1)"""
    a._same_group(b)
    return multiply(multiply(multiply(a, b), inverse(a)), inverse(b))


def product(elements: Sequence[UTElement], n: int, field: Field) -> UTElement:
    result = UTElement.identity(n, field)
    for x in elements:
        result = multiply(result, x)
    return result


# --- предикаты подгрупп ---

def in_derived(a: UTElement) -> bool:
    """a_{i,i+1} = 0 для всех i"""
    return all(a.entry(i, i + 1) == 0 for i in range(1, a.n))


def in_second_derived_shape(a: UTElement) -> bool:
    """Первая и вторая наддиагонали нулевые"""
    return in_derived(a) and all(a.entry(i, i + 2) == 0 for i in range(1, a.n - 1))


def _congruent_off(a: UTElement, b: UTElement, allowed) -> bool:
    a._same_group(b)
    return all(
        x == y or pos in allowed
        for pos, x, y in zip(positions(a.n), a.entries, b.entries)
    )


def center_congruent(a: UTElement, b: UTElement) -> bool:
    """a = b mod C: совпадают вне (1, n)"""
    return _congruent_off(a, b, {(1, a.n)})


def second_center_congruent(a: UTElement, b: UTElement) -> bool:
    """a = b mod C_2: совпадают вне (1, n-1), (1, n), (2, n)"""
    n = a.n
    return _congruent_off(a, b, {(1, n - 1), (1, n), (2, n)})


def higher_center_member(a: UTElement, m: int) -> bool:
    """a лежит в C_m: a_ij = 0 при j - i <= n - 1 - m"""
    if m < 1:
        raise DimensionError(f"center level must be >= 1, got {m}")
    limit = a.n - 1 - m
    return all(x == 0 for (i, j), x in zip(positions(a.n), a.entries) if j - i <= limit)


def in_UP_k(a: UTElement, k: int) -> bool:
    """Блочный вид (e_k *; 0 e): ненулевые элементы только при i <= k < j"""
    if not 1 <= k < a.n:
        raise DimensionError(f"UP_k needs 1 <= k < n, got k={k}, n={a.n}")
    return all(x == 0 for (i, j), x in zip(positions(a.n), a.entries) if not (i <= k < j))


def in_UT_last_col_trivial(a: UTElement) -> bool:
    """Последний столбец совпадает со столбцом единичной матрицы"""
    return all(a.entry(i, a.n) == 0 for i in range(1, a.n))


def embed(a: UTElement, n_new: int) -> UTElement:
    """Вложение UT(n) -> UT(n'), дополнение единичными строками и столбцами"""
    if n_new < a.n:
        raise DimensionError(f"cannot embed UT({a.n}) into UT({n_new})")
    values = {pos: x for pos, x in zip(positions(a.n), a.entries) if x}
    return UTElement.from_mapping(n_new, a.field, values)


def all_elements(n: int, field: Field) -> Iterator[UTElement]:
    """Все элементы UT(n, F) в лексикографическом порядке элементов"""
    for entries in itertools.product(range(field.q), repeat=entry_count(n)):
        yield UTElement(n, field, entries)


def random_element(n: int, field: Field, rng: random.Random) -> UTElement:
    return UTElement(n, field, tuple(rng.randrange(field.q) for _ in range(entry_count(n))))


# --- T(n, F) ---

@dataclass(frozen=True)
class TriangularInvertible:
    """Обратимая верхнетреугольная матрица d*u: d диагональная, u из UT(n, F)"""

    diag: Tuple[int, ...]
    unipotent: UTElement

    def __post_init__(self):
        if len(self.diag) != self.unipotent.n:
            raise DimensionError(f"diagonal of length {len(self.diag)} for n={self.unipotent.n}")
        if any(d == 0 for d in self.diag):
            raise FieldError("diagonal entries must be nonzero")

    @property
    def n(self) -> int:
        return self.unipotent.n

    @property
    def field(self) -> Field:
        return self.unipotent.field

    @classmethod
    def identity(cls, n: int, field: Field) -> "TriangularInvertible":
        return cls((1,) * n, UTElement.identity(n, field))

    @classmethod
    def diagonal(cls, field: Field, diag: Sequence[Scalar]) -> "TriangularInvertible":
        values = tuple(_scalar(field, d) for d in diag)
        return cls(values, UTElement.identity(len(values), field))

    @classmethod
    def from_unipotent(cls, u: UTElement) -> "TriangularInvertible":
        return cls((1,) * u.n, u)

    def scale(self, a: UTElement) -> UTElement:
        """d a d^(-1): a_ij -> d_i a_ij d_j^(-1)"""
        f = a.field
        d = self.diag
        return UTElement(a.n, f, tuple(
            f.mul(f.mul(d[i - 1], x), f.inv(d[j - 1])) if x else 0
            for (i, j), x in zip(positions(a.n), a.entries)
        ))

    def conjugate(self, a: UTElement) -> UTElement:
        """t a t^(-1)"""
        u = self.unipotent
        inner = multiply(multiply(u, a), inverse(u))
        return self.scale(inner)

    def inverse(self) -> "TriangularInvertible":
        f = self.field
        inv_diag = tuple(f.inv(d) for d in self.diag)
        # (d u)^(-1) = d^(-1) * (d u^(-1) d^(-1))
        return TriangularInvertible(inv_diag, self.scale(inverse(self.unipotent)))

    def compose(self, other: "TriangularInvertible") -> "TriangularInvertible":
        """(d1 u1)(d2 u2) = d1 d2 * (d2^(-1) u1 d2) u2"""
        f = self.field
        diag = tuple(f.mul(x, y) for x, y in zip(self.diag, other.diag))
        shifted = other.inverse_diagonal().scale(self.unipotent)
        return TriangularInvertible(diag, multiply(shifted, other.unipotent))

    def inverse_diagonal(self) -> "TriangularInvertible":
        f = self.field
        return TriangularInvertible.diagonal(f, [f.inv(d) for d in self.diag])

    def canonical(self) -> "TriangularInvertible":
        """Представитель по модулю централизатора UT(n, F): d_1 = 1, u_1n = 0"""
        f = self.field
        s = f.inv(self.diag[0])
        diag = tuple(f.mul(s, d) for d in self.diag)
        u = self.unipotent
        corner = u.entry(1, u.n) if u.n > 1 else 0
        if corner:
            u = multiply(u, transvection(u.n, 1, u.n, f.neg(corner), f))
        return TriangularInvertible(diag, u)


@dataclass(frozen=True)
class InverseView:
    """Элементы a'_ij обратной матрицы"""

    source: UTElement
    inverse: UTElement = dataclass_field(default=None)

    def __post_init__(self):
        inv = self.inverse if self.inverse is not None else inverse(self.source)
        if not multiply(self.source, inv).is_identity():
            raise FieldError("inverse verification failed")
        object.__setattr__(self, "inverse", inv)

    @property
    def entries(self) -> Tuple[int, ...]:
        return self.inverse.entries

    def __getitem__(self, ij: Tuple[int, int]) -> FieldElem:
        return self.inverse[ij]

    def entry(self, i: int, j: int) -> int:
        return self.inverse.entry(i, j)

    def strict(self, i: int, j: int) -> int:
        """a'_ij для i < j и 0 на диагонали и ниже"""
        return self.inverse.entry(i, j) if i < j else 0

    def row(self, i: int) -> Tuple[int, ...]:
        """a'_{i*}"""
        return self.inverse.row(i)

    def col(self, j: int) -> Tuple[int, ...]:
        """a'_{*j}"""
        return self.inverse.col(j)
