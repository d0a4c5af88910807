"""
Стандартные PC-отображения UT(n, F) и предикаты над ними

PC-отображение хранится либо как семейство с параметрами (замкнутая формула),
либо как таблица - перестановка индексов GroupTable.
"""

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ut_pcmaps.core.errors import (
    BoundExceededError,
    DimensionError,
    FieldError,
    PreconditionError,
)
from ut_pcmaps.core.field import Field, FieldElem
from ut_pcmaps.core.group_table import DEFAULT_GROUP_BOUND, GroupTable, build_group_table
from ut_pcmaps.core.matrix import (
    TriangularInvertible,
    UTElement,
    center_congruent,
    commutator,
    embed,
    in_derived,
    inverse,
    multiply,
    positions,
    random_element,
    second_center_congruent,
    transvection,
)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_COUNT = 1000
DEFAULT_SEED = 0

Provenance = Tuple[Tuple[str, Tuple[int, ...]], ...]


def _value(field: Field, x) -> int:
    if isinstance(x, FieldElem):
        if x.field != field:
            raise FieldError(f"mixed fields: {x.field} and {field}")
        return x.value
    return field.check_index(int(x))


class PCMap:
    """Тотальное отображение UT(n, F) -> UT(n, F); n=None - бесконечномерная эмуляция"""

    def __init__(
        self,
        n: Optional[int],
        field: Field,
        func: Optional[Callable[[UTElement], UTElement]] = None,
        *,
        family: str = "table",
        params: Sequence[int] = (),
        provenance: Optional[Provenance] = None,
        inverse_factory: Optional[Callable[[], "PCMap"]] = None,
        table: Optional[GroupTable] = None,
        perm: Optional[np.ndarray] = None,
    ):
        if func is None and perm is None:
            raise PreconditionError("a PCMap needs either a formula or a table")
        self.n = n
        self.field = field
        self.family = family
        self.params = tuple(int(x) for x in params)
        self.provenance: Provenance = provenance or ((family, self.params),)
        self._func = func
        self._inverse_factory = inverse_factory
        self.table = table
        self.perm = None if perm is None else np.asarray(perm, dtype=np.int64)
        self._tabulated: Dict[int, np.ndarray] = {}

    @classmethod
    def from_table(cls, table: GroupTable, perm: np.ndarray, provenance: Optional[Provenance] = None) -> "PCMap":
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (table.order,) or len(np.unique(perm)) != table.order:
            raise PreconditionError("table-backed map must be a permutation of the group indices")
        return cls(table.n, table.field, family="table", table=table, perm=perm, provenance=provenance)

    def __repr__(self) -> str:
        chain = " o ".join(name for name, _ in self.provenance)
        return f"PCMap(n={self.n}, F_{self.field.q}, {chain})"

    @property
    def is_table_backed(self) -> bool:
        return self.perm is not None

    def __call__(self, a: UTElement) -> UTElement:
        if a.field != self.field:
            raise FieldError(f"{a!r} is not over {self.field}")
        if self.n is not None and a.n != self.n:
            raise DimensionError(f"map on UT({self.n}) applied to UT({a.n})")
        if self.perm is not None:
            return self.table.element(int(self.perm[self.table.index(a)]))
        return self._func(a)

    def tabulate(self, table: GroupTable) -> np.ndarray:
        """Перестановка индексов таблицы, задаваемая отображением"""
        if self.perm is not None and self.table is table:
            return self.perm
        key = id(table)
        if key not in self._tabulated:
            images = [table.index(self(table.element(x))) for x in range(table.order)]
            self._tabulated[key] = np.array(images, dtype=np.int64)
        return self._tabulated[key]

    def on_table(self, table: GroupTable) -> "PCMap":
        return PCMap.from_table(table, self.tabulate(table), self.provenance)

    def inverse(self) -> "PCMap":
        return invert(self)


class PCCheck(NamedTuple):
    """Результат проверки: выполнено ли условие и контрпример"""

    holds: bool
    witness: Optional[Tuple[UTElement, UTElement]] = None
    reason: str = ""


# --- семейства ---

def identity_map(n: Optional[int], field: Field) -> PCMap:
    return PCMap(n, field, lambda a: a, family="identity",
                 inverse_factory=lambda: identity_map(n, field))


def quasi_inner(t: TriangularInvertible, dimension_free: bool = False) -> PCMap:
    """a -> t a t^(-1); при dimension_free t продолжается единицами на любое n >= t.n"""
    field = t.field
    params = tuple(t.diag) + tuple(t.unipotent.entries)

    if not dimension_free:
        def conjugate(a: UTElement) -> UTElement:
            if a.n != t.n:
                raise DimensionError(f"conjugator in T({t.n}) applied to UT({a.n})")
            return t.conjugate(a)
        n = t.n
    else:
        def conjugate(a: UTElement) -> UTElement:
            size = max(a.n, t.n)
            big = TriangularInvertible(
                tuple(t.diag) + (1,) * (size - t.n), embed(t.unipotent, size)
            )
            return big.conjugate(embed(a, size))
        n = None

    return PCMap(n, field, conjugate, family="quasi_inner", params=params,
                 inverse_factory=lambda: quasi_inner(t.inverse(), dimension_free))


def field_aut(n: Optional[int], field: Field, i: int) -> PCMap:
    """Поэлементное применение степени Фробениуса"""
    power = i % field.k

    def apply(a: UTElement) -> UTElement:
        return UTElement(a.n, field, tuple(field.frobenius(x, power) for x in a.entries))

    return PCMap(n, field, apply, family="field", params=(power,),
                 inverse_factory=lambda: field_aut(n, field, (field.k - power) % field.k))


def graph_aut(n: Optional[int], field: Field) -> PCMap:
    """a -> w (a^(-1))^T w, w - антидиагональная перестановочная матрица"""
    if n is None:
        raise DimensionError("the graph automorphism is undefined on the dimension-free emulation")

    def apply(a: UTElement) -> UTElement:
        inv = inverse(a)
        return UTElement(n, field, tuple(inv.entry(n + 1 - j, n + 1 - i) for i, j in positions(n)))

    return PCMap(n, field, apply, family="graph", inverse_factory=lambda: graph_aut(n, field))


def standard_subcentral(n: Optional[int], field: Field, alpha, beta) -> PCMap:
    """a -> t_{2n}(alpha a_12) a t_{1,n-1}(beta a_{n-1,n})"""
    if n is None:
        raise DimensionError("standard subcentral maps need a finite dimension")
    if n < 4:
        raise PreconditionError(f"standard subcentral maps need n >= 4, got {n} (use permutable for n = 3)")
    al, be = _value(field, alpha), _value(field, beta)

    def apply(a: UTElement) -> UTElement:
        left = transvection(n, 2, n, field.mul(al, a.entry(1, 2)), field)
        right = transvection(n, 1, n - 1, field.mul(be, a.entry(n - 1, n)), field)
        return multiply(multiply(left, a), right)

    return PCMap(n, field, apply, family="standard_subcentral", params=(al, be),
                 inverse_factory=lambda: standard_subcentral(n, field, field.neg(al), field.neg(be)))


def permutable(field: Field, alpha, beta, gamma, delta) -> PCMap:
    """Отображение UT(3, F): (a12, a23) -> (al a12 + be a23, ga a12 + de a23), a13 -> det a13"""
    al, be, ga, de = (_value(field, x) for x in (alpha, beta, gamma, delta))
    det = field.sub(field.mul(al, de), field.mul(be, ga))
    if det == 0:
        raise PreconditionError("permutable parameters must have nonzero determinant")

    def apply(a: UTElement) -> UTElement:
        if a.n != 3:
            raise DimensionError(f"permutable maps act on UT(3), got UT({a.n})")
        x, z, y = a.entries  # a12, a13, a23
        return UTElement(3, field, (
            field.add(field.mul(al, x), field.mul(be, y)),
            field.mul(det, z),
            field.add(field.mul(ga, x), field.mul(de, y)),
        ))

    def inverse_factory() -> PCMap:
        s = field.inv(det)
        return permutable(field, field.mul(s, de), field.neg(field.mul(s, be)),
                          field.neg(field.mul(s, ga)), field.mul(s, al))

    return PCMap(3, field, apply, family="permutable", params=(al, be, ga, de),
                 inverse_factory=inverse_factory)


def inverse_negation_map(n: Optional[int], field: Field) -> PCMap:
    """a -> e - sum (a^(-1))_ij e_ij; не является PC-отображением"""

    def apply(a: UTElement) -> UTElement:
        inv = inverse(a)
        return UTElement(a.n, field, tuple(field.neg(x) for x in inv.entries))

    def inverse_factory() -> PCMap:
        def back(b: UTElement) -> UTElement:
            return inverse(UTElement(b.n, field, tuple(field.neg(x) for x in b.entries)))
        return PCMap(n, field, back, family="inverse_negation_inverse")

    return PCMap(n, field, apply, family="inverse_negation", inverse_factory=inverse_factory)


# --- центральные отображения ---

class CentralFunction:
    """f: UT(n, F) -> F, f = 0 на коммутанте, сдвиг на t_1n(f(a)) биективен на смежных классах по центру"""

    def __init__(
        self,
        n: int,
        field: Field,
        func: Optional[Callable[[UTElement], int]] = None,
        *,
        table: Optional[GroupTable] = None,
        values: Optional[np.ndarray] = None,
        bound: int = DEFAULT_GROUP_BOUND,
        sample_cosets: int = 200,
        seed: int = DEFAULT_SEED,
    ):
        if func is None and values is None:
            raise PreconditionError("a central function needs a formula or a value table")
        if values is not None and table is None:
            raise PreconditionError("a value table needs its GroupTable")
        self.n = n
        self.field = field
        self._func = func
        self.table = table
        if table is None and func is not None:
            try:
                table = build_group_table(n, field, bound)
                self.table = table
            except BoundExceededError:
                table = None
        if table is not None:
            if values is None:
                values = np.array(
                    [_value(field, func(table.element(x))) for x in range(table.order)],
                    dtype=np.int64,
                )
            self.values = np.asarray(values, dtype=np.int64)
            self._validate_exhaustive()
        else:
            self.values = None
            self._validate_sampled(sample_cosets, seed)

    def __call__(self, a: UTElement) -> int:
        if self.values is not None:
            return int(self.values[self.table.index(a)])
        return _value(self.field, self._func(a))

    def _validate_exhaustive(self) -> None:
        table, f = self.table, self.field
        if np.any(self.values[table.derived_mask] != 0):
            bad = int(np.flatnonzero(table.derived_mask & (self.values != 0))[0])
            raise PreconditionError(
                f"central function is nonzero on the derived element {table.element(bad)!r}"
            )
        r = table.position(1, self.n)
        shifted = f.add_table[table.entries[:, r], self.values]
        keys = table.center_coset_keys() * f.q + shifted
        if len(np.unique(keys)) != table.order:
            raise PreconditionError("central shift is not bijective on some center coset")

    def _validate_sampled(self, count: int, seed: int) -> None:
        rng = random.Random(seed)
        f = self.field
        logger.warning("Validating central function on %d sampled cosets only (UT(%d, F_%d) too large)",
                       count, self.n, f.q)
        for _ in range(count):
            a = random_element(self.n, f, rng)
            base = dict(zip(positions(self.n), a.entries))
            seen = set()
            for gamma in range(f.q):
                base[(1, self.n)] = gamma
                b = UTElement.from_mapping(self.n, f, base)
                value = _value(f, self._func(b))
                if in_derived(b) and value != 0:
                    raise PreconditionError(f"central function is nonzero on the derived element {b!r}")
                seen.add(f.add(gamma, value))
            if len(seen) != f.q:
                raise PreconditionError("central shift is not bijective on some center coset")


def central_map(f: CentralFunction) -> PCMap:
    """a -> a t_1n(f(a))"""
    n, field = f.n, f.field

    def apply(a: UTElement) -> UTElement:
        return multiply(a, transvection(n, 1, n, f(a), field))

    def inverse_factory() -> PCMap:
        def back(b: UTElement) -> UTElement:
            base = dict(zip(positions(n), b.entries))
            target = b.entry(1, n)
            for gamma in range(field.q):
                base[(1, n)] = gamma
                a = UTElement.from_mapping(n, field, base)
                if field.add(gamma, f(a)) == target:
                    return a
            raise PreconditionError(f"{b!r} has no preimage under the central map")
        return PCMap(n, field, back, family="central_inverse")

    params = tuple(int(x) for x in f.values) if f.values is not None else ()
    return PCMap(n, field, apply, family="central", params=params, inverse_factory=inverse_factory)


# --- композиция ---

def compose(phi: PCMap, psi: PCMap) -> PCMap:
    """(phi o psi)(a) = phi(psi(a))"""
    if phi.field != psi.field or phi.n != psi.n:
        raise DimensionError(f"domain mismatch: {phi!r} vs {psi!r}")
    provenance = phi.provenance + psi.provenance
    if phi.perm is not None and psi.perm is not None and phi.table is psi.table:
        return PCMap.from_table(phi.table, phi.perm[psi.perm], provenance)

    def inverse_factory() -> PCMap:
        return compose(invert(psi), invert(phi))

    return PCMap(phi.n, phi.field, lambda a: phi(psi(a)), family="composition",
                 provenance=provenance, inverse_factory=inverse_factory)


def invert(phi: PCMap) -> PCMap:
    if phi.perm is not None:
        inv = np.empty_like(phi.perm)
        inv[phi.perm] = np.arange(len(phi.perm))
        return PCMap.from_table(phi.table, inv, (("inverse", ()),) + phi.provenance)
    if phi._inverse_factory is None:
        raise PreconditionError(f"{phi!r} has no known inverse")
    return phi._inverse_factory()


# --- предикаты на таблицах ---

def table_is_bijection(perm: np.ndarray) -> bool:
    return len(np.unique(perm)) == len(perm)


def _pc_mismatch(comm: np.ndarray, perm: np.ndarray, rows: np.ndarray) -> Optional[Tuple[int, int]]:
    lhs = perm[comm[rows]]
    rhs = comm[perm[rows][:, None], perm[None, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        return int(rows[bad[0][0]]), int(bad[0][1])
    return None


def _pc_mismatch_chunk(args) -> Optional[Tuple[int, int]]:
    comm, perm, rows = args
    return _pc_mismatch(comm, perm, rows)


def table_pc_witness(table: GroupTable, perm: np.ndarray, workers: int = 1) -> Optional[Tuple[int, int]]:
    """Первая пара (x, y) с phi([x, y]) != [phi(x), phi(y)] или None"""
    rows = np.arange(table.order)
    if workers <= 1:
        return _pc_mismatch(table.comm, perm, rows)
    chunks = [(table.comm, perm, chunk) for chunk in np.array_split(rows, workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_pc_mismatch_chunk, chunks))
    found = [r for r in results if r is not None]
    return found[0] if found else None


def table_is_pc(table: GroupTable, perm: np.ndarray) -> bool:
    return table_is_bijection(perm) and _pc_mismatch(table.comm, perm, np.arange(table.order)) is None


def table_is_central(table: GroupTable, perm: np.ndarray) -> bool:
    """phi(a) = a mod C для всех a"""
    keys = table.center_coset_keys()
    return bool(np.array_equal(keys[perm], keys))


def table_is_subcentral(table: GroupTable, perm: np.ndarray) -> bool:
    """phi(a) = a mod C_2 для всех a"""
    n = table.n
    allowed = {(1, n - 1), (1, n), (2, n)}
    cols = [r for r, pos in enumerate(positions(n)) if pos not in allowed]
    if not cols:
        return True
    return bool(np.array_equal(table.entries[perm][:, cols], table.entries[:, cols]))


def table_fixes_derived(table: GroupTable, perm: np.ndarray) -> bool:
    idx = np.flatnonzero(table.derived_mask)
    return bool(np.array_equal(perm[idx], idx))


def table_is_almost_identity(table: GroupTable, perm: np.ndarray) -> bool:
    idx = np.array(sorted(table.transvection_indices.values()), dtype=np.int64)
    return bool(np.array_equal(perm[idx], idx))


def table_is_homomorphism(table: GroupTable, perm: np.ndarray) -> bool:
    return bool(np.array_equal(perm[table.mul], table.mul[perm[:, None], perm[None, :]]))


def central_values(table: GroupTable, perm: np.ndarray) -> np.ndarray:
    """f(a) = phi(a)_1n - a_1n для центрального табличного отображения"""
    r = table.position(1, table.n)
    f = table.field
    return f.add_table[table.entries[perm, r], f.neg_array[table.entries[:, r]]]


# --- предикаты на отображениях ---

def _sampled_pair(phi: PCMap, rng: random.Random) -> Tuple[UTElement, UTElement]:
    if phi.n is not None:
        return random_element(phi.n, phi.field, rng), random_element(phi.n, phi.field, rng)
    # бесконечномерная эмуляция: общая размерность носителей плюс 2
    x = random_element(rng.randint(2, 6), phi.field, rng)
    y = random_element(rng.randint(2, 6), phi.field, rng)
    size = max(x.support(), y.support(), 2) + 2

    def place(a: UTElement) -> UTElement:
        values = {pos: v for pos, v in zip(positions(a.n), a.entries) if v}
        return UTElement.from_mapping(size, phi.field, values)

    return place(x), place(y)


def is_pc_map(
    phi: PCMap,
    mode: str = "exhaustive",
    count: int = DEFAULT_SAMPLE_COUNT,
    seed: int = DEFAULT_SEED,
    table: Optional[GroupTable] = None,
    bound: int = DEFAULT_GROUP_BOUND,
    workers: int = 1,
) -> PCCheck:
    """phi биективно и phi([x, y]) = [phi(x), phi(y)] на всех (или выборочных) парах"""
    if mode == "exhaustive":
        if phi.n is None:
            raise DimensionError("exhaustive mode needs a finite dimension")
        if table is None:
            table = phi.table if phi.table is not None else build_group_table(phi.n, phi.field, bound)
        perm = phi.tabulate(table)
        if not table_is_bijection(perm):
            first = {}
            for x, y in enumerate(perm.tolist()):
                if y in first:
                    return PCCheck(False, (table.element(first[y]), table.element(x)), "not injective")
                first[y] = x
        bad = table_pc_witness(table, perm, workers)
        if bad is not None:
            return PCCheck(False, (table.element(bad[0]), table.element(bad[1])), "commutator mismatch")
        return PCCheck(True)

    if mode != "sampled":
        raise PreconditionError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    images: Dict[UTElement, UTElement] = {}
    for _ in range(count):
        x, y = _sampled_pair(phi, rng)
        fx, fy = phi(x), phi(y)
        for a, fa in ((x, fx), (y, fy)):
            other = images.setdefault(fa, a)
            if other != a and phi.n is not None:
                return PCCheck(False, (other, a), "not injective")
        if phi(commutator(x, y)) != commutator(fx, fy):
            return PCCheck(False, (x, y), "commutator mismatch")
    return PCCheck(True)


def _domain(phi: PCMap, table: Optional[GroupTable], count: int, seed: int, bound: int) -> Iterable[UTElement]:
    if phi.n is None:
        raise DimensionError("predicate needs a finite dimension")
    if table is None:
        try:
            table = phi.table if phi.table is not None else build_group_table(phi.n, phi.field, bound)
        except BoundExceededError:
            rng = random.Random(seed)
            return [random_element(phi.n, phi.field, rng) for _ in range(count)]
    return table.elements()


def transvections(n: int, field: Field) -> List[UTElement]:
    return [transvection(n, i, j, alpha, field) for i, j in positions(n) for alpha in field.nonzero()]


def is_almost_identity(phi: PCMap, dimension: Optional[int] = None) -> bool:
    """phi фиксирует все трансвекции t_ij(alpha)"""
    n = phi.n if phi.n is not None else (dimension or 6)
    return all(phi(t) == t for t in transvections(n, phi.field))


def is_central_map(phi: PCMap, table: Optional[GroupTable] = None,
                   count: int = DEFAULT_SAMPLE_COUNT, seed: int = DEFAULT_SEED,
                   bound: int = DEFAULT_GROUP_BOUND) -> bool:
    if phi.perm is not None and (table is None or table is phi.table):
        return table_is_central(phi.table, phi.perm)
    return all(center_congruent(phi(a), a) for a in _domain(phi, table, count, seed, bound))


def is_subcentral_map(phi: PCMap, table: Optional[GroupTable] = None,
                      count: int = DEFAULT_SAMPLE_COUNT, seed: int = DEFAULT_SEED,
                      bound: int = DEFAULT_GROUP_BOUND) -> bool:
    if phi.perm is not None and (table is None or table is phi.table):
        return table_is_subcentral(phi.table, phi.perm)
    return all(second_center_congruent(phi(a), a) for a in _domain(phi, table, count, seed, bound))
