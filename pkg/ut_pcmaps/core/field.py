"""
Точная арифметика малых конечных полей F_q, q = p^k <= 256

Элемент поля хранится как целый индекс в [0, q): коэффициенты многочлена
по основанию p, свободный член - младший разряд. Таблицы операций строятся
один раз при создании поля с помощью galois.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import galois
import numpy as np

from ut_pcmaps.core.errors import FieldError

logger = logging.getLogger(__name__)

MAX_ORDER = 256

# Фиксированные модули (коэффициенты по убыванию степени).
# Для остальных (p, k) берётся лексикографически первый неприводимый многочлен.
FIXED_MODULI: Dict[Tuple[int, int], Tuple[int, ...]] = {
    (2, 2): (1, 1, 1),      # x^2 + x + 1
    (2, 3): (1, 0, 1, 1),   # x^3 + x + 1
    (3, 2): (1, 0, 1),      # x^2 + 1
}


def _to_ints(array) -> np.ndarray:
    """FieldArray -> обычный массив индексов"""
    return np.asarray(array.view(np.ndarray), dtype=np.int64)


def _is_irreducible(modulus: "galois.Poly", prime_field) -> bool:
    """Неприводимость пробным делением на унитарные многочлены степени <= k/2"""
    degree = modulus.degree
    p = prime_field.order
    for d in range(1, degree // 2 + 1):
        for code in range(p ** d, 2 * p ** d):
            divisor = galois.Poly.Int(code, field=prime_field)
            if int(modulus % divisor) == 0:
                return False
    return True


class Field:
    """Конечное поле F_{p^k} с таблицами сложения, умножения и Фробениуса"""

    def __init__(self, p: int, k: int = 1):
        if k < 1:
            raise FieldError(f"extension degree must be >= 1, got {k}")
        if p < 2 or not galois.is_prime(p):
            raise FieldError(f"characteristic must be prime, got {p}")
        if p ** k > MAX_ORDER:
            raise FieldError(f"field order {p}^{k} exceeds {MAX_ORDER}")

        self.p = p
        self.k = k
        self.q = p ** k

        prime_field = galois.GF(p)
        if k == 1:
            self.modulus: Tuple[int, ...] = (1, 0)
            gf = prime_field
        else:
            if (p, k) in FIXED_MODULI:
                poly = galois.Poly(list(FIXED_MODULI[(p, k)]), field=prime_field)
            else:
                poly = galois.irreducible_poly(p, k, method="min")
            if not _is_irreducible(poly, prime_field):
                raise FieldError(f"modulus {poly} is reducible over F_{p}")
            self.modulus = tuple(int(c) for c in poly.coeffs)
            gf = galois.GF(p ** k, irreducible_poly=poly)

        elements = gf.elements
        self.add_table = _to_ints(elements[:, None] + elements[None, :])
        self.mul_table = _to_ints(elements[:, None] * elements[None, :])
        self.neg_array = _to_ints(-elements)
        inverses = np.zeros(self.q, dtype=np.int64)
        inverses[1:] = _to_ints(gf(1) / elements[1:])
        self.inv_array = inverses

        # степени Фробениуса x -> x^(p^i), i = 0..k-1
        self.frobenius_tables = np.stack(
            [_to_ints(elements ** (p ** i)) for i in range(k)]
        )

        # exp/log относительно порождающего мультипликативной группы
        self.generator = int(gf.primitive_element)
        powers = _to_ints(gf.primitive_element ** np.arange(self.q - 1))
        if len(set(powers.tolist())) != self.q - 1:
            raise FieldError(f"no generator of the multiplicative group of F_{self.q}")
        self.exp_table = powers
        self.log_table = np.full(self.q, -1, dtype=np.int64)
        self.log_table[powers] = np.arange(self.q - 1)

        # списки для быстрой скалярной арифметики
        self._add: List[List[int]] = self.add_table.tolist()
        self._mul: List[List[int]] = self.mul_table.tolist()
        self._neg: List[int] = self.neg_array.tolist()
        self._inv: List[int] = self.inv_array.tolist()
        self._frob: List[List[int]] = self.frobenius_tables.tolist()

        logger.debug("Built F_%d (p=%d, k=%d, modulus=%s)", self.q, p, k, self.modulus)

    def __repr__(self) -> str:
        return f"Field(p={self.p}, k={self.k})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Field):
            return NotImplemented
        return self.p == other.p and self.k == other.k

    def __hash__(self) -> int:
        return hash((self.p, self.k))

    def __reduce__(self):
        return (make_field, (self.p, self.k))

    @property
    def descriptor(self) -> Tuple[int, int]:
        return (self.p, self.k)

    # --- скалярные операции над индексами ---

    def add(self, x: int, y: int) -> int:
        return self._add[x][y]

    def sub(self, x: int, y: int) -> int:
        return self._add[x][self._neg[y]]

    def neg(self, x: int) -> int:
        return self._neg[x]

    def mul(self, x: int, y: int) -> int:
        return self._mul[x][y]

    def inv(self, x: int) -> int:
        if x == 0:
            raise FieldError("inverse of zero")
        return self._inv[x]

    def div(self, x: int, y: int) -> int:
        return self._mul[x][self.inv(y)]

    def power(self, x: int, e: int) -> int:
        if x == 0:
            return 0 if e > 0 else 1
        return int(self.exp_table[(int(self.log_table[x]) * e) % (self.q - 1)])

    def frobenius(self, x: int, i: int) -> int:
        return self._frob[i % self.k][x]

    # --- представления ---

    def coefficients(self, x: int) -> Tuple[int, ...]:
        """Вектор коэффициентов длины k, свободный член первым"""
        digits = []
        for _ in range(self.k):
            digits.append(x % self.p)
            x //= self.p
        return tuple(digits)

    def from_coefficients(self, coefficients) -> int:
        value = 0
        for c in reversed(tuple(coefficients)):
            if not 0 <= c < self.p:
                raise FieldError(f"coefficient {c} not reduced mod {self.p}")
            value = value * self.p + c
        return value

    def check_index(self, x: int) -> int:
        if not 0 <= x < self.q:
            raise FieldError(f"{x} is not an element index of F_{self.q}")
        return x

    def elem(self, x: int) -> "FieldElem":
        return FieldElem(self.check_index(int(x)), self)

    def __call__(self, x: int) -> "FieldElem":
        return self.elem(x)

    def elements(self) -> Iterator["FieldElem"]:
        for x in range(self.q):
            yield FieldElem(x, self)

    def nonzero(self) -> range:
        return range(1, self.q)

    def additive_basis(self) -> List[int]:
        """Базис F_q над F_p: 1, x, ..., x^(k-1)"""
        return [self.p ** i for i in range(self.k)]


@functools.lru_cache(maxsize=None)
def make_field(p: int, k: int = 1) -> Field:
    """Поле F_{p^k}; экземпляры кешируются"""
    return Field(p, k)


@dataclass(frozen=True)
class FieldElem:
    """Элемент поля: канонический индекс и ссылка на поле"""

    value: int
    field: Field

    def _other(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise FieldError(f"mixed fields: {self.field} and {other.field}")
            return other.value
        if isinstance(other, int):
            # целые константы вкладываются через простое подполе
            return self.field.from_coefficients([other % self.field.p] + [0] * (self.field.k - 1))
        return NotImplemented

    def __add__(self, other):
        y = self._other(other)
        return FieldElem(self.field.add(self.value, y), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        y = self._other(other)
        return FieldElem(self.field.sub(self.value, y), self.field)

    def __rsub__(self, other):
        y = self._other(other)
        return FieldElem(self.field.sub(y, self.value), self.field)

    def __mul__(self, other):
        y = self._other(other)
        return FieldElem(self.field.mul(self.value, y), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        y = self._other(other)
        return FieldElem(self.field.div(self.value, y), self.field)

    def __neg__(self):
        return FieldElem(self.field.neg(self.value), self.field)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElem(self.field.power(self.value, e), self.field)

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"F{self.field.q}({self.value})"

    def inverse(self) -> "FieldElem":
        return FieldElem(self.field.inv(self.value), self.field)

    def frobenius(self, i: int) -> "FieldElem":
        return frobenius(self, i)

    @property
    def coefficients(self) -> Tuple[int, ...]:
        return self.field.coefficients(self.value)


def field_arithmetic(op: str, x: FieldElem, y: Optional[FieldElem] = None) -> FieldElem:
    """Единая точка входа для add, sub, mul, div, inv, neg"""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    if op == "inv":
        return x.inverse()
    if op == "neg":
        return -x
    raise FieldError(f"unknown field operation {op!r}")


def frobenius(x: FieldElem, i: int) -> FieldElem:
    """x -> x^(p^i); степень берётся по модулю k"""
    return FieldElem(x.field.frobenius(x.value, i), x.field)
