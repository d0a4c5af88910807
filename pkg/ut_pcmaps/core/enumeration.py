"""
Полный перебор PC-отображений малых групп UT(n, F_q)

Неподвижные точки структуры:
    - множество коммутаторов K переводится в себя;
    - элементы вне K с одинаковыми строкой и столбцом таблицы коммутаторов
      ("близнецы") образуют классы, и PC-отображение переводит класс в класс.
Перестановки внутри классов близнецов сохраняют условие PC, поэтому перебор
возвращает канонических представителей (монотонных на свободных элементах
каждого класса), точное число отображений и ленивый обход всех таблиц.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np
from tqdm import tqdm

from ut_pcmaps.core.errors import BoundExceededError, PreconditionError, SearchBudgetExceeded
from ut_pcmaps.core.group_table import GroupTable
from ut_pcmaps.core.pcmap import table_is_pc

logger = logging.getLogger(__name__)

CONSTRAINTS = ("none", "almost_identity")
DEFAULT_NODE_BUDGET = 10 ** 8
NAIVE_LIMIT = 8


# --- классы близнецов ---

def twin_classes(table: GroupTable) -> List[np.ndarray]:
    """Классы некоммутаторов с одинаковыми строками и столбцами comm, по возрастанию"""
    outside = np.flatnonzero(~table.commutator_mask)
    if not len(outside):
        return []
    signature = np.concatenate([table.comm[outside], table.comm[:, outside].T], axis=1)
    _, labels = np.unique(signature, axis=0, return_inverse=True)
    labels = np.asarray(labels).reshape(-1)
    groups: Dict[int, List[int]] = {}
    for x, label in zip(outside.tolist(), labels.tolist()):
        groups.setdefault(label, []).append(x)
    classes = [np.array(sorted(members), dtype=np.int64) for members in groups.values()]
    classes.sort(key=lambda c: int(c[0]))
    return classes


def pinned_elements(table: GroupTable, constraint: str) -> np.ndarray:
    """Элементы с заранее заданным образом (образ равен самому элементу)"""
    if constraint not in CONSTRAINTS:
        raise PreconditionError(f"unknown constraint {constraint!r}, expected one of {CONSTRAINTS}")
    pins = {table.identity}
    if constraint == "almost_identity":
        pins.update(table.transvection_indices.values())
    return np.array(sorted(pins), dtype=np.int64)


@dataclass
class PCMapEnumeration:
    """Результат перебора: канонические представители и структура классов"""

    table: GroupTable
    constraint: str
    representatives: List[np.ndarray]
    classes: List[np.ndarray]
    free: List[np.ndarray]
    nodes: int = 0
    _keys: Set[bytes] = dataclass_field(default=None, init=False, repr=False)
    _by_size: Dict[int, np.ndarray] = dataclass_field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.representatives = sorted(
            (np.asarray(r, dtype=np.int64) for r in self.representatives), key=lambda r: r.tolist()
        )
        self._keys = {r.tobytes() for r in self.representatives}
        by_size: Dict[int, List[np.ndarray]] = {}
        for members in self.free:
            if len(members) > 1:
                by_size.setdefault(len(members), []).append(members)
        self._by_size = {size: np.stack(groups) for size, groups in by_size.items()}

    @property
    def orbit_size(self) -> int:
        """Число перестановок свободных элементов внутри классов"""
        return math.prod(math.factorial(len(members)) for members in self.free)

    @property
    def count(self) -> int:
        return len(self.representatives) * self.orbit_size

    def canonical_form(self, perm: np.ndarray) -> np.ndarray:
        """Образы свободных элементов каждого класса, упорядоченные по возрастанию"""
        perm = np.asarray(perm, dtype=np.int64)
        out = perm.copy()
        for members in self._by_size.values():
            out[members] = np.sort(perm[members], axis=1)
        return out

    def contains(self, perm: np.ndarray) -> bool:
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (self.table.order,):
            return False
        if self.constraint == "almost_identity":
            pins = pinned_elements(self.table, self.constraint)
            if not np.array_equal(perm[pins], pins):
                return False
        return self.canonical_form(perm).tobytes() in self._keys

    def __contains__(self, perm) -> bool:
        return self.contains(perm)

    def __iter__(self) -> Iterator[np.ndarray]:
        """Ленивый обход всех таблиц: представитель o перестановка свободных элементов"""
        movable = [members for members in self.free if len(members) > 1]
        for rep in self.representatives:
            for arrangement in itertools.product(
                *(itertools.permutations(members.tolist()) for members in movable)
            ):
                sigma = np.arange(self.table.order, dtype=np.int64)
                for members, image in zip(movable, arrangement):
                    sigma[members] = image
                yield rep[sigma]

    def tables(self, limit: int) -> List[np.ndarray]:
        if self.count > limit:
            raise BoundExceededError(
                f"{self.count} PC-maps exceed the expansion limit {limit}; use the representatives"
            )
        return sorted(self, key=lambda r: r.tolist())


def free_members(classes: Sequence[np.ndarray], pins: np.ndarray) -> List[np.ndarray]:
    pinned = set(pins.tolist())
    return [np.array([x for x in c.tolist() if x not in pinned], dtype=np.int64) for c in classes]


# --- перебор с распространением ---

class _Search:
    """Поиск с возвратом по классам близнецов с распространением через comm"""

    def __init__(
        self,
        table: GroupTable,
        constraint: str,
        node_budget: int = DEFAULT_NODE_BUDGET,
    ):
        self.table = table
        self.comm = table.comm
        self.order = table.order
        self.constraint = constraint
        self.node_budget = node_budget
        self.nodes = 0
        self.solutions: List[np.ndarray] = []

        self.classes = twin_classes(table)
        self.pins = pinned_elements(table, constraint)
        self.free = free_members(self.classes, self.pins)
        self.class_of = np.full(self.order, -1, dtype=np.int64)
        for c, members in enumerate(self.classes):
            self.class_of[members] = c
        self.reps = np.array([int(c[0]) for c in self.classes], dtype=np.int64)

        commutators = np.flatnonzero(table.commutator_mask)
        # пробные элементы: коммутаторы и по одному представителю класса
        self.anchors = np.concatenate([commutators, self.reps])

        centralizer = (self.comm[self.reps] == table.identity).sum(axis=1)
        sizes = np.array([len(c) for c in self.classes], dtype=np.int64)
        pinned_counts = np.array([len(c) - len(fr) for c, fr in zip(self.classes, self.free)], dtype=np.int64)
        self.signature = np.stack([sizes, centralizer, pinned_counts], axis=1)

        self.phi = np.full(self.order, -1, dtype=np.int64)
        self.used = np.zeros(self.order, dtype=bool)
        self.trail: List[int] = []
        self.class_target = np.full(len(self.classes), -1, dtype=np.int64)
        self.target_taken = np.zeros(len(self.classes), dtype=bool)
        self.forced_target = np.full(len(self.classes), -1, dtype=np.int64)

    # --- состояние ---

    def _assign(self, x: int, y: int, queue: List[int]) -> None:
        self.phi[x] = y
        self.used[y] = True
        self.trail.append(x)
        queue.append(x)

    def _undo(self, mark: int, class_mark: List[int]) -> None:
        while len(self.trail) > mark:
            x = self.trail.pop()
            self.used[self.phi[x]] = False
            self.phi[x] = -1
        for c in class_mark:
            self.target_taken[self.class_target[c]] = False
            self.class_target[c] = -1

    def _propagate(self, queue: List[int]) -> bool:
        """phi([x, z]) = [phi(x), phi(z)] и phi([z, x]) = [phi(z), phi(x)] для всех назначенных z"""
        comm, phi = self.comm, self.phi
        while queue:
            x = queue.pop()
            y = phi[x]
            assigned = np.flatnonzero(phi >= 0)
            images = phi[assigned]
            sources = np.concatenate([comm[x, assigned], comm[assigned, x]])
            targets = np.concatenate([comm[y, images], comm[images, y]])

            current = phi[sources]
            known = current >= 0
            if np.any(current[known] != targets[known]):
                return False

            sources, targets = sources[~known], targets[~known]
            if not len(sources):
                continue
            pairs = np.unique(np.stack([sources, targets], axis=1), axis=0)
            if len(np.unique(pairs[:, 0])) != len(pairs):
                return False
            if len(np.unique(pairs[:, 1])) != len(pairs) or np.any(self.used[pairs[:, 1]]):
                return False
            for s, t in pairs.tolist():
                self._assign(s, t, queue)
        return True

    def _assign_class(self, c: int, d: int, queue: List[int]) -> bool:
        """Монотонное назначение свободных элементов класса c на свободное место в классе d"""
        members = self.classes[c]
        pinned_images = {int(self.phi[x]) for x in members.tolist() if self.phi[x] >= 0}
        if any(self.class_of[y] != d for y in pinned_images):
            return False
        slots = [y for y in self.classes[d].tolist() if y not in pinned_images]
        if len(slots) != len(self.free[c]) or self.used[slots].any():
            return False
        self.class_target[c] = d
        self.target_taken[d] = True
        for x, y in zip(self.free[c].tolist(), slots):
            self._assign(x, y, queue)
        return True

    def _initialise(self) -> bool:
        queue: List[int] = []
        for x in self.pins.tolist():
            self._assign(x, x, queue)
        for c, (members, free) in enumerate(zip(self.classes, self.free)):
            if len(free) < len(members):
                d = int(self.class_of[self.phi[members[np.isin(members, self.pins)][0]]])
                self.forced_target[c] = d
        return self._propagate(queue)

    # --- выбор ветвления ---

    def _candidates(self) -> Tuple[Optional[int], np.ndarray]:
        """MRV: незанятый класс с наименьшим числом совместимых целей"""
        open_classes = np.flatnonzero(self.class_target < 0)
        if not len(open_classes):
            return None, np.empty(0, dtype=np.int64)
        targets = np.flatnonzero(~self.target_taken)

        anchors = self.anchors[self.phi[self.anchors] >= 0]
        xs, ys = self.reps[open_classes], self.reps[targets]
        anchor_images = self.phi[anchors]
        left = np.concatenate([self.phi[self.comm[np.ix_(xs, anchors)]],
                               self.phi[self.comm[np.ix_(anchors, xs)]].T], axis=1)
        right = np.concatenate([self.comm[np.ix_(ys, anchor_images)],
                                self.comm[np.ix_(anchor_images, ys)].T], axis=1)

        compatible = np.all(
            (self.signature[open_classes][:, None, :] == self.signature[targets][None, :, :]), axis=2
        )
        forced = self.forced_target[open_classes]
        compatible &= (forced[:, None] < 0) | (forced[:, None] == targets[None, :])
        for row in range(len(open_classes)):
            if not compatible[row].any():
                return int(open_classes[row]), np.empty(0, dtype=np.int64)
            cols = np.flatnonzero(compatible[row])
            lx = left[row]
            determined = lx >= 0
            ok = np.all(right[cols][:, determined] == lx[determined][None, :], axis=1)
            compatible[row, cols[~ok]] = False

        counts = compatible.sum(axis=1)
        best = int(np.argmin(counts))
        return int(open_classes[best]), targets[compatible[best]]

    # --- обход ---

    def _record(self) -> None:
        self.solutions.append(self.phi.copy())
        logger.debug("Found PC-map #%d after %d nodes", len(self.solutions), self.nodes)

    def _descend(self) -> None:
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise SearchBudgetExceeded(
                f"search exceeded the node budget {self.node_budget}",
                partial=list(self.solutions),
                nodes=self.nodes,
            )
        c, choices = self._candidates()
        if c is None:
            self._complete()
            return
        for d in choices.tolist():
            self._branch(c, d)

    def _complete(self) -> None:
        """Коммутаторы, не вынужденные классами, перебираются поэлементно"""
        open_elements = np.flatnonzero(self.phi < 0)
        if not len(open_elements):
            self._record()
            return
        x = int(open_elements[0])
        commutators = np.flatnonzero(self.table.commutator_mask & ~self.used)
        for y in commutators.tolist():
            mark = len(self.trail)
            queue: List[int] = []
            self._assign(x, y, queue)
            if self._propagate(queue):
                self.nodes += 1
                self._complete()
            self._undo(mark, [])

    def _branch(self, c: int, d: int) -> None:
        mark = len(self.trail)
        queue: List[int] = []
        if self._assign_class(c, d, queue) and self._propagate(queue):
            self._descend()
        self._undo(mark, [c] if self.class_target[c] == d else [])

    def first_level(self) -> Tuple[Optional[int], List[int]]:
        c, choices = self._candidates()
        return c, choices.tolist()

    def run(self, progress: bool = False) -> None:
        if not self._initialise():
            return
        c, choices = self.first_level()
        if c is None:
            self._complete()
            return
        self.nodes += 1
        for d in tqdm(choices, desc="enumerate", disable=not progress):
            self._branch(c, d)


def _run_subtree(args) -> Tuple[List[np.ndarray], int]:
    table, constraint, node_budget, c, d = args
    search = _Search(table, constraint, node_budget)
    if not search._initialise():
        return [], 0
    try:
        search._branch(c, d)
    except SearchBudgetExceeded as e:
        return list(e.partial), -search.nodes
    return search.solutions, search.nodes


def enumerate_pc_maps(
    table: GroupTable,
    constraint: str = "none",
    node_budget: int = DEFAULT_NODE_BUDGET,
    workers: int = 1,
    progress: bool = False,
) -> PCMapEnumeration:
    """
    Все PC-отображения группы (с ограничением almost_identity - фиксирующие трансвекции)

    Возвращает канонических представителей; полное множество - их композиции
    с перестановками свободных элементов внутри классов близнецов.
    """
    search = _Search(table, constraint, node_budget)
    logger.info(
        "Enumerating PC-maps of UT(%d, F_%d), constraint=%s: %d twin classes",
        table.n, table.field.q, constraint, len(search.classes),
    )

    def result(solutions: List[np.ndarray], nodes: int) -> PCMapEnumeration:
        return PCMapEnumeration(table, constraint, solutions, search.classes, search.free, nodes)

    if workers <= 1:
        try:
            search.run(progress)
        except SearchBudgetExceeded as e:
            e.partial = result(e.partial, e.nodes)
            raise
        enumeration = result(search.solutions, search.nodes)
    else:
        if not search._initialise():
            enumeration = result([], 0)
        else:
            c, choices = search.first_level()
            if c is None:
                search._complete()
                enumeration = result(search.solutions, search.nodes)
            else:
                jobs = [(table, constraint, node_budget, c, d) for d in choices]
                solutions: List[np.ndarray] = []
                nodes, exceeded = 1, False
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    for found, used in tqdm(pool.map(_run_subtree, jobs), total=len(jobs),
                                            desc="enumerate", disable=not progress):
                        solutions.extend(found)
                        nodes += abs(used)
                        exceeded |= used < 0
                if exceeded:
                    raise SearchBudgetExceeded(
                        f"search exceeded the node budget {node_budget} in some subtree",
                        partial=result(solutions, nodes), nodes=nodes,
                    )
                enumeration = result(solutions, nodes)

    logger.info(
        "Enumeration finished: %d representatives, %d maps, %d nodes",
        len(enumeration.representatives), enumeration.count, enumeration.nodes,
    )
    return enumeration


# --- оракулы ---

def naive_pc_maps(table: GroupTable, constraint: str = "none") -> List[np.ndarray]:
    """Фильтр по всем |G|! биекциям; только для |G| <= 8"""
    if table.order > NAIVE_LIMIT:
        raise BoundExceededError(f"naive enumeration needs |G| <= {NAIVE_LIMIT}, got {table.order}")
    pins = pinned_elements(table, constraint)
    found = []
    for perm in itertools.permutations(range(table.order)):
        candidate = np.array(perm, dtype=np.int64)
        if np.array_equal(candidate[pins], pins) and table_is_pc(table, candidate):
            found.append(candidate)
    return found


def count_central_functions(table: GroupTable, pinned: Optional[Sequence[int]] = None) -> int:
    """
    Число допустимых таблиц CentralFunction с f = 0 на заданных элементах

    На смежном классе по центру вне коммутанта f задаёт перестановку класса;
    закреплённые элементы остаются на месте.
    """
    keys = table.center_coset_keys()
    derived = table.derived_mask
    pinned_set = set(int(x) for x in (pinned if pinned is not None else []))
    sizes: Dict[int, int] = {}
    fixed: Dict[int, int] = {}
    for x in np.flatnonzero(~derived).tolist():
        key = int(keys[x])
        sizes[key] = sizes.get(key, 0) + 1
        if x in pinned_set:
            fixed[key] = fixed.get(key, 0) + 1
    return math.prod(math.factorial(size - fixed.get(key, 0)) for key, size in sizes.items())


# --- автоморфизмы ---

def generators(table: GroupTable) -> List[int]:
    """t_{i,i+1}(b) для базиса b поля над простым подполем"""
    basis = table.field.additive_basis()
    return [table.transvection(i, i + 1, b) for i in range(1, table.n) for b in basis]


def element_orders(table: GroupTable) -> np.ndarray:
    orders = np.ones(table.order, dtype=np.int64)
    power = np.arange(table.order, dtype=np.int64)
    step = 1
    while np.any(power != table.identity):
        power = table.mul[power, np.arange(table.order)]
        step += 1
        orders[(power == table.identity) & (orders == 1)] = step
    orders[table.identity] = 1
    return orders


def _extend_homomorphism(table: GroupTable, gens: Sequence[int], images: Sequence[int]) -> Optional[np.ndarray]:
    """Продолжение g -> image на всю группу обходом по правым умножениям; None при противоречии"""
    phi = np.full(table.order, -1, dtype=np.int64)
    used = np.zeros(table.order, dtype=bool)
    phi[table.identity] = table.identity
    used[table.identity] = True
    frontier = [table.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g, h in zip(gens, images):
                xg = int(table.mul[x, g])
                image = int(table.mul[phi[x], h])
                if phi[xg] >= 0:
                    if phi[xg] != image:
                        return None
                    continue
                if used[image]:
                    return None
                phi[xg] = image
                used[image] = True
                nxt.append(xg)
        frontier = nxt
    if np.any(phi < 0):
        return None
    return phi


def enumerate_automorphisms(table: GroupTable, param_budget: int = 10 ** 6) -> List[np.ndarray]:
    """Группа автоморфизмов: перебор образов порождающих с проверкой продолжения"""
    gens = generators(table)
    orders = element_orders(table)
    centralizer = (table.comm == table.identity).sum(axis=1)
    derived = table.derived_mask

    options = []
    for g in gens:
        ok = (orders == orders[g]) & (centralizer == centralizer[g]) & ~derived
        options.append(np.flatnonzero(ok).tolist())
    space = math.prod(len(o) for o in options)
    if space > param_budget:
        raise BoundExceededError(f"{space} generator images exceed the parameter budget {param_budget}")

    automorphisms = []
    for images in itertools.product(*options):
        if len(set(images)) != len(images):
            continue
        phi = _extend_homomorphism(table, gens, images)
        if phi is not None:
            automorphisms.append(phi)
    automorphisms.sort(key=lambda p: p.tolist())
    logger.info("Found %d automorphisms of UT(%d, F_%d)", len(automorphisms), table.n, table.field.q)
    return automorphisms
