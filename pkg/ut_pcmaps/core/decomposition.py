"""
Стандартное множество PC-отображений и разложение на стандартные семейства

Порядок композиции (справа налево, центральное отображение действует первым):
    n = 3:  permutable o field o central
    n >= 4: graph o standard_subcentral o quasi_inner o field o central
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ut_pcmaps.core.enumeration import PCMapEnumeration, free_members, twin_classes
from ut_pcmaps.core.errors import BoundExceededError, DecompositionError, PreconditionError
from ut_pcmaps.core.field import Field
from ut_pcmaps.core.group_table import GroupTable
from ut_pcmaps.core.matrix import TriangularInvertible, positions
from ut_pcmaps.core.pcmap import (
    CentralFunction,
    PCMap,
    central_map,
    central_values,
    compose,
    field_aut,
    graph_aut,
    permutable,
    quasi_inner,
    standard_subcentral,
    table_fixes_derived,
    table_is_central,
    table_is_pc,
    table_is_subcentral,
)

logger = logging.getLogger(__name__)

DEFAULT_PARAM_BUDGET = 10 ** 6


def compose_tables(*perms: np.ndarray) -> np.ndarray:
    """Таблица композиции p_1 o p_2 o ... (последняя действует первой)"""
    result = perms[-1]
    for perm in reversed(perms[:-1]):
        result = perm[result]
    return result


def invert_table(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm), dtype=perm.dtype)
    return inv


class FamilyTables:
    """Таблицы стандартных семейств на одной GroupTable (векторизованно, с кешем)"""

    def __init__(self, table: GroupTable):
        self.table = table
        self.field = table.field
        self._graph: Optional[np.ndarray] = None
        self._frobenius: Dict[int, np.ndarray] = {}
        self._subcentral: Dict[Tuple[int, int], np.ndarray] = {}

    def identity(self) -> np.ndarray:
        return np.arange(self.table.order, dtype=np.int64)

    def frobenius(self, power: int) -> np.ndarray:
        power %= self.field.k
        if power not in self._frobenius:
            images = self.field.frobenius_tables[power][self.table.entries]
            self._frobenius[power] = self.table.encode(images)
        return self._frobenius[power]

    def graph(self) -> np.ndarray:
        if self._graph is None:
            self._graph = graph_aut(self.table.n, self.field).tabulate(self.table)
        return self._graph

    def diagonal(self, diag: Sequence[int]) -> np.ndarray:
        """a -> d a d^(-1)"""
        f, t = self.field, self.table
        scaled = t.entries.copy()
        for r, (i, j) in enumerate(positions(t.n)):
            factor = f.mul(diag[i - 1], f.inv(diag[j - 1]))
            scaled[:, r] = f.mul_table[factor, t.entries[:, r]]
        return t.encode(scaled)

    def inner(self, u: int) -> np.ndarray:
        """a -> u a u^(-1)"""
        t = self.table
        return t.mul[t.mul[u, :], t.inv[u]]

    def quasi_inner(self, diag: Sequence[int], u: int) -> np.ndarray:
        return self.diagonal(diag)[self.inner(u)]

    def subcentral(self, alpha: int, beta: int) -> np.ndarray:
        """a -> t_2n(alpha a_12) a t_{1,n-1}(beta a_{n-1,n})"""
        key = (alpha, beta)
        if key not in self._subcentral:
            f, t = self.field, self.table
            n = t.n
            left = t.weights[t.position(2, n)] * f.mul_table[alpha, t.column(1, 2)]
            right = t.weights[t.position(1, n - 1)] * f.mul_table[beta, t.column(n - 1, n)]
            self._subcentral[key] = t.mul[t.mul[left, np.arange(t.order)], right]
        return self._subcentral[key]

    def permutable(self, alpha: int, beta: int, gamma: int, delta: int) -> np.ndarray:
        """(a12, a23) -> линейная замена, a13 -> det a13"""
        f, t = self.field, self.table
        if t.n != 3:
            raise PreconditionError(f"permutable maps act on UT(3), got UT({t.n})")
        add, mul = f.add_table, f.mul_table
        det = f.sub(f.mul(alpha, delta), f.mul(beta, gamma))
        x, z, y = t.column(1, 2), t.column(1, 3), t.column(2, 3)
        images = np.stack([
            add[mul[alpha, x], mul[beta, y]],
            mul[det, z],
            add[mul[gamma, x], mul[delta, y]],
        ], axis=1)
        return t.encode(images)

    def central(self, values: np.ndarray) -> np.ndarray:
        """a -> a t_1n(f(a))"""
        t, f = self.table, self.field
        r = t.position(1, t.n)
        old = t.entries[:, r]
        new = f.add_table[old, np.asarray(values, dtype=np.int64)]
        return np.arange(t.order, dtype=np.int64) + (new - old) * t.weights[r]


# --- параметры ---

def general_linear_params(field: Field) -> Iterator[Tuple[int, int, int, int]]:
    """(alpha, beta, gamma, delta) с ненулевым определителем, тождественные первыми"""
    yield (1, 0, 0, 1)
    for params in itertools.product(range(field.q), repeat=4):
        al, be, ga, de = params
        if params != (1, 0, 0, 1) and field.sub(field.mul(al, de), field.mul(be, ga)) != 0:
            yield params


def diagonals_mod_scalars(n: int, field: Field) -> Iterator[Tuple[int, ...]]:
    """d_1 = 1, d_2..d_n в F*"""
    for rest in itertools.product(range(1, field.q), repeat=n - 1):
        yield (1,) + rest


def unipotent_mod_center(table: GroupTable) -> np.ndarray:
    """Индексы u с u_1n = 0 (по возрастанию, единица первая)"""
    return np.flatnonzero(table.column(1, table.n) == 0)


def standard_parameter_count(table: GroupTable) -> int:
    q, k, n = table.field.q, table.field.k, table.n
    if n == 3:
        gl2 = (q ** 2 - 1) * (q ** 2 - q)
        return gl2 * k
    return 2 * q ** 2 * (q - 1) ** (n - 1) * len(unipotent_mod_center(table)) * k


def random_central_values(table: GroupTable, rng: random.Random) -> np.ndarray:
    """Случайная допустимая центральная функция: перестановки смежных классов по центру вне коммутанта"""
    perm = np.arange(table.order, dtype=np.int64)
    keys = table.center_coset_keys()
    outside = np.flatnonzero(~table.derived_mask)
    for key in np.unique(keys[outside]).tolist():
        members = outside[keys[outside] == key].tolist()
        shuffled = members[:]
        rng.shuffle(shuffled)
        perm[members] = shuffled
    return central_values(table, perm)


def random_decomposition(table: GroupTable, rng: random.Random) -> "Decomposition":
    """Случайный набор параметров стандартных семейств"""
    f, n = table.field, table.n
    central = random_central_values(table, rng)
    power = rng.randrange(f.k)
    if n == 3:
        params = rng.choice(list(general_linear_params(f)))
        return Decomposition(n, f, central, field_power=power, permutable=params)
    diag = (1,) + tuple(rng.randrange(1, f.q) for _ in range(n - 1))
    u = int(rng.choice(unipotent_mod_center(table).tolist()))
    return Decomposition(
        n, f, central,
        field_power=power,
        graph=rng.random() < 0.5,
        subcentral=(rng.randrange(f.q), rng.randrange(f.q)),
        quasi_inner=TriangularInvertible(diag, table.element(u)),
    )


# --- разложение ---

@dataclass
class Decomposition:
    """Части разложения; central - значения f на элементах GroupTable"""

    n: int
    field: Field
    central: np.ndarray
    field_power: int = 0
    graph: bool = False
    subcentral: Tuple[int, int] = (0, 0)
    quasi_inner: Optional[TriangularInvertible] = None
    permutable: Optional[Tuple[int, int, int, int]] = None

    def recompose(self, tables: FamilyTables) -> np.ndarray:
        central = tables.central(self.central)
        frob = tables.frobenius(self.field_power)
        if self.n == 3:
            perm = tables.permutable(*(self.permutable or (1, 0, 0, 1)))
            return compose_tables(perm, frob, central)
        t = self.quasi_inner or TriangularInvertible.identity(self.n, self.field)
        qi = tables.quasi_inner(t.diag, tables.table.index(t.unipotent))
        sub = tables.subcentral(*self.subcentral)
        graph = tables.graph() if self.graph else tables.identity()
        return compose_tables(graph, sub, qi, frob, central)

    def to_map(self, table: GroupTable) -> PCMap:
        """Композиция семейств с историей происхождения"""
        n, f = self.n, self.field
        parts: List[PCMap] = []
        if n == 3:
            parts.append(permutable(f, *(self.permutable or (1, 0, 0, 1))))
        else:
            if self.graph:
                parts.append(graph_aut(n, f))
            parts.append(standard_subcentral(n, f, *self.subcentral))
            parts.append(quasi_inner(self.quasi_inner or TriangularInvertible.identity(n, f)))
        parts.append(field_aut(n, f, self.field_power))
        parts.append(central_map(CentralFunction(n, f, table=table, values=self.central)))
        result = parts[0]
        for part in parts[1:]:
            result = compose(result, part)
        return result


def _residual_central(tables: FamilyTables, noncentral: np.ndarray, phi: np.ndarray) -> Optional[np.ndarray]:
    """f такое, что phi = noncentral o central(f), или None"""
    table = tables.table
    keys = table.center_coset_keys()
    if not np.array_equal(keys[noncentral], keys[phi]):
        return None
    derived = table.derived_mask
    if not np.array_equal(noncentral[derived], phi[derived]):
        return None
    residual = invert_table(noncentral)[phi]
    if not (table_is_central(table, residual) and table_fixes_derived(table, residual)):
        return None
    return central_values(table, residual)


def _superdiagonal_action(table: GroupTable, perm: np.ndarray) -> np.ndarray:
    """Первая наддиагональ образов порождающих: действие по модулю коммутанта"""
    gens = [table.transvection(i, i + 1, b) for i in range(1, table.n) for b in table.field.additive_basis()]
    cols = [table.position(i, i + 1) for i in range(1, table.n)]
    return table.entries[perm[gens]][:, cols]


def decompose_pc_map(
    table: GroupTable,
    phi: np.ndarray,
    param_budget: int = DEFAULT_PARAM_BUDGET,
    tables: Optional[FamilyTables] = None,
) -> Decomposition:
    """Разложение табличного PC-отображения на стандартные семейства"""
    phi = np.asarray(phi, dtype=np.int64)
    if not table_is_pc(table, phi):
        raise PreconditionError("decomposition needs a PC-map table")
    if standard_parameter_count(table) > param_budget:
        raise BoundExceededError(
            f"{standard_parameter_count(table)} standard parameters exceed the budget {param_budget}"
        )
    tables = tables or FamilyTables(table)
    f = table.field
    n = table.n

    if n == 3:
        for params in general_linear_params(f):
            perm = tables.permutable(*params)
            for power in range(f.k):
                noncentral = compose_tables(perm, tables.frobenius(power))
                values = _residual_central(tables, noncentral, phi)
                if values is not None:
                    found = Decomposition(n, f, values, field_power=power, permutable=params)
                    return _verified(found, tables, phi)
    elif n >= 4:
        target = _superdiagonal_action(table, phi)
        units = unipotent_mod_center(table)
        for graph, power, diag in itertools.product((False, True), range(f.k), diagonals_mod_scalars(n, f)):
            graph_perm = tables.graph() if graph else tables.identity()
            frob = tables.frobenius(power)
            scale = tables.diagonal(diag)
            if not np.array_equal(_superdiagonal_action(table, compose_tables(graph_perm, scale, frob)), target):
                continue
            logger.debug("Prefilter passed: graph=%s field=%d diag=%s", graph, power, diag)
            for alpha, beta in itertools.product(range(f.q), repeat=2):
                outer = compose_tables(graph_perm, tables.subcentral(alpha, beta), scale)
                for u in units.tolist():
                    noncentral = compose_tables(outer, tables.inner(u), frob)
                    values = _residual_central(tables, noncentral, phi)
                    if values is not None:
                        found = Decomposition(
                            n, f, values, field_power=power, graph=graph, subcentral=(alpha, beta),
                            quasi_inner=TriangularInvertible(tuple(diag), table.element(u)),
                        )
                        return _verified(found, tables, phi)
    else:
        raise PreconditionError(f"decomposition needs n >= 3, got {n}")

    if f.p == 2:
        logger.warning("No standard decomposition in characteristic 2 for UT(%d, F_%d)", n, f.q)
    raise DecompositionError(f"no standard decomposition found for this PC-map of UT({n}, F_{f.q})")


def _verified(found: Decomposition, tables: FamilyTables, phi: np.ndarray) -> Decomposition:
    if not np.array_equal(found.recompose(tables), phi):
        raise DecompositionError("recomposed table differs from the input map")
    return found


# --- стандартное множество ---

def generate_standard_set(
    table: GroupTable,
    param_budget: int = DEFAULT_PARAM_BUDGET,
    progress: bool = False,
) -> PCMapEnumeration:
    """
    Все композиции стандартных семейств с центральными отображениями

    Центральные отображения совпадают с перестановками внутри классов близнецов,
    поэтому множество хранится каноническими формами нецентральных частей.
    """
    count = standard_parameter_count(table)
    if count > param_budget:
        raise BoundExceededError(f"{count} standard parameters exceed the budget {param_budget}")
    classes = twin_classes(table)
    free = free_members(classes, np.array([table.identity], dtype=np.int64))
    structure = PCMapEnumeration(table, "none", [], classes, free)
    tables = FamilyTables(table)
    f, n = table.field, table.n
    seen: Dict[bytes, np.ndarray] = {}

    def add(perm: np.ndarray) -> None:
        canonical = structure.canonical_form(perm)
        seen.setdefault(canonical.tobytes(), canonical)

    with tqdm(total=count, desc="standard set", disable=not progress) as bar:
        if n == 3:
            for params in general_linear_params(f):
                perm = tables.permutable(*params)
                for power in range(f.k):
                    add(compose_tables(perm, tables.frobenius(power)))
                    bar.update(1)
        elif n >= 4:
            units = unipotent_mod_center(table).tolist()
            for graph, power, diag in itertools.product((False, True), range(f.k), diagonals_mod_scalars(n, f)):
                graph_perm = tables.graph() if graph else tables.identity()
                scale = tables.diagonal(diag)
                frob = tables.frobenius(power)
                for alpha, beta in itertools.product(range(f.q), repeat=2):
                    outer = compose_tables(graph_perm, tables.subcentral(alpha, beta), scale)
                    for u in units:
                        add(compose_tables(outer, tables.inner(u), frob))
                    bar.update(len(units))
        else:
            add(tables.identity())

    logger.info("Standard set of UT(%d, F_%d): %d classes of tables from %d parameters",
                n, f.q, len(seen), count)
    return PCMapEnumeration(table, "none", list(seen.values()), classes, free)


# --- групповые следствия ---

class CorollaryCheck(NamedTuple):
    holds: bool
    checked: int = 0
    witness: Optional[Dict[str, Any]] = None


def twin_transpositions(enumeration: PCMapEnumeration) -> List[np.ndarray]:
    """Соседние транспозиции свободных элементов классов: порождают центральные отображения"""
    order = enumeration.table.order
    result = []
    for members in enumeration.free:
        for x, y in zip(members.tolist(), members.tolist()[1:]):
            perm = np.arange(order, dtype=np.int64)
            perm[x], perm[y] = y, x
            result.append(perm)
    return result


def pc_generators(enumeration: PCMapEnumeration) -> List[np.ndarray]:
    return list(enumeration.representatives) + twin_transpositions(enumeration)


def _conjugate(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    return g[h[invert_table(g)]]


def check_central_subgroup(enumeration: PCMapEnumeration) -> CorollaryCheck:
    """Центральные PC-отображения: замкнутость и нормальность (на порождающих)"""
    table = enumeration.table
    central = [r for r in enumeration.representatives if table_is_central(table, r)]
    central += twin_transpositions(enumeration)
    checked = 0
    for h in central:
        checked += 1
        if not table_is_central(table, invert_table(h)):
            return CorollaryCheck(False, checked, {"reason": "inverse", "map": h.tolist()})
        for h2 in central:
            checked += 1
            if not table_is_central(table, h[h2]):
                return CorollaryCheck(False, checked, {"reason": "composition", "maps": [h.tolist(), h2.tolist()]})
    for g in pc_generators(enumeration):
        for h in central:
            checked += 1
            if not table_is_central(table, _conjugate(g, h)):
                return CorollaryCheck(False, checked, {"reason": "conjugation", "by": g.tolist(), "map": h.tolist()})
    return CorollaryCheck(True, checked)


def check_subcentral_normality(enumeration: PCMapEnumeration) -> CorollaryCheck:
    """Подкентральные PC-отображения переходят в подкентральные при сопряжении"""
    table = enumeration.table
    subcentral = [r for r in enumeration.representatives if table_is_subcentral(table, r)]
    subcentral += twin_transpositions(enumeration)
    checked = 0
    for g in pc_generators(enumeration):
        for h in subcentral:
            checked += 1
            if not table_is_subcentral(table, _conjugate(g, h)):
                return CorollaryCheck(False, checked, {"by": g.tolist(), "map": h.tolist()})
    logger.info("Subcentral normality verified on %d generator pairs", checked)
    return CorollaryCheck(True, checked)


def _derived_coset_action(table: GroupTable, perm: np.ndarray) -> bytes:
    return _superdiagonal_action(table, perm).tobytes()


def factor_through_automorphism(
    table: GroupTable, phi: np.ndarray, automorphisms: Sequence[np.ndarray]
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """(alpha, s) с phi = alpha o s, alpha - автоморфизм, s - подкентральное отображение"""
    action = _derived_coset_action(table, phi)
    ordered = sorted(automorphisms, key=lambda a: _derived_coset_action(table, a) != action)
    for alpha in ordered:
        s = invert_table(alpha)[phi]
        if table_is_subcentral(table, s) and np.array_equal(alpha[s], phi):
            return alpha, s
    return None


def check_aut_times_subcentral(
    enumeration: PCMapEnumeration, automorphisms: Sequence[np.ndarray]
) -> CorollaryCheck:
    """Каждое PC-отображение раскладывается как автоморфизм o подкентральное"""
    table = enumeration.table
    checked = 0
    for rep in enumeration.representatives:
        checked += 1
        if factor_through_automorphism(table, rep, automorphisms) is None:
            return CorollaryCheck(False, checked, {"map": rep.tolist()})
    logger.info("Every PC-map of UT(%d, F_%d) factors through Aut(G)", table.n, table.field.q)
    return CorollaryCheck(True, checked)


def find_non_normality_witness(table: GroupTable) -> Optional[Dict[str, Any]]:
    """
    Внутренний автоморфизм i_x и s(alpha, beta), для которых i_x o s o i_x^(-1)
    не является стандартным подкентральным отображением
    """
    if table.n < 4:
        raise PreconditionError("standard subcentral maps need n >= 4")
    tables = FamilyTables(table)
    f = table.field
    standard = {
        tables.subcentral(a, b).tobytes(): (a, b)
        for a, b in itertools.product(range(f.q), repeat=2)
    }
    candidates = sorted(table.transvection_indices.values()) + list(range(table.order))
    for x in candidates:
        inner = tables.inner(x)
        for (alpha, beta) in itertools.product(range(f.q), repeat=2):
            conj = _conjugate(inner, tables.subcentral(alpha, beta))
            if conj.tobytes() not in standard:
                logger.info("Non-normality witness: x=%r, alpha=%d, beta=%d", table.element(x), alpha, beta)
                return {"x": table.element(x), "alpha": alpha, "beta": beta, "conjugate": conj}
    return None