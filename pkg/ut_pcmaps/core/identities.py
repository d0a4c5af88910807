"""
Матричные тождества из доказательств классификации

Каждая проверка - точное равенство в UT(n, F), без допусков. Реестр
IDENTITY_CHECKS описывает, как перечислить экземпляры (полностью или
выборкой с фиксированным зерном) и как вложить экземпляр в большую размерность.
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from ut_pcmaps.core.errors import DimensionError, PreconditionError
from ut_pcmaps.core.field import Field
from ut_pcmaps.core.matrix import (
    InverseView,
    UTElement,
    all_elements,
    center_congruent,
    commutator,
    dense_add,
    dense_identity,
    dense_mul,
    embed,
    in_UP_k,
    inverse,
    multiply,
    outer,
    positions,
    product,
    random_element,
    transvection,
)

logger = logging.getLogger(__name__)

MAX_EMBED_DIMENSION = 12
EXHAUSTIVE_LIMIT = 4096


def _unit(n: int, field: Field, rows: List[List[int]]) -> UTElement:
    return UTElement.from_dense(field, rows)


def _check_range(name: str, value: int, low: int, high: int) -> None:
    if not low <= value <= high:
        raise DimensionError(f"{name}={value} outside [{low}, {high}]")


def _first_row_element(n: int, field: Field, u: Sequence[int]) -> UTElement:
    """(1 u; 0 e)"""
    if len(u) != n - 1:
        raise DimensionError(f"row of length {len(u)} for n={n}")
    return UTElement.from_mapping(n, field, {(1, j + 2): x for j, x in enumerate(u)})


# --- извлечение трансвекций ---

def check_extraction_first_col(a: UTElement, i: int, j: int) -> bool:
    """
    [t_1i(-1), a] = t_1i(-1) (e + a_{*1} a'_{i*})
    [[t_1i(-1), a], t_{j,j+1}(1)] = t_{1,j+1}(a'_ij)
    """
    n, f = a.n, a.field
    _check_range("i", i, 2, n - 1)
    _check_range("j", j, 2, n - 1)
    inv = InverseView(a)
    t = transvection(n, 1, i, f.neg(1), f)
    shifted = dense_add(f, dense_identity(n), outer(f, a.col(1), inv.row(i)))
    first = commutator(t, a)
    if first != multiply(t, _unit(n, f, shifted)):
        return False
    second = commutator(first, transvection(n, j, j + 1, 1, f))
    return second == transvection(n, 1, j + 1, inv.strict(i, j), f)


def check_extraction_last_row(a: UTElement, i: int, j: int) -> bool:
    """
    [t_jn(-1), a] = t_jn(-1) (e + a_{*j} a'_{n*})
    [t_{i-1,i}(1), [t_jn(-1), a]] = t_{i-1,n}(a_ij)
    """
    n, f = a.n, a.field
    _check_range("i", i, 2, n - 1)
    _check_range("j", j, 2, n - 1)
    inv = InverseView(a)
    t = transvection(n, j, n, f.neg(1), f)
    shifted = dense_add(f, dense_identity(n), outer(f, a.col(j), inv.row(n)))
    first = commutator(t, a)
    if first != multiply(t, _unit(n, f, shifted)):
        return False
    second = commutator(transvection(n, i - 1, i, 1, f), first)
    strict = a.entry(i, j) if i < j else 0
    return second == transvection(n, i - 1, n, strict, f)


# --- лестница X/Y/Z ---

def _y_element(n: int, field: Field, k: int, beta: int, alphas: Sequence[int]) -> UTElement:
    """y = t_{k+1,k+2}(beta) prod_{i<k} t_ik(alpha_i)"""
    if len(alphas) != k - 1:
        raise DimensionError(f"need {k - 1} alphas for k={k}, got {len(alphas)}")
    factors = [transvection(n, k + 1, k + 2, beta, field)]
    factors += [transvection(n, i, k, alpha, field) for i, alpha in enumerate(alphas, start=1)]
    return product(factors, n, field)


def check_Y_identity(n: int, field: Field, k: int, beta: int, alphas: Sequence[int], j: int) -> bool:
    """[t_{j,j+1}(-1), y] = t_{k+1,k+3}(beta) при j = k+2 и e иначе"""
    _check_range("k", k, 1, n - 3)
    _check_range("j", j, k + 1, n - 1)
    y = _y_element(n, field, k, beta, alphas)
    lhs = commutator(transvection(n, j, j + 1, field.neg(1), field), y)
    if j == k + 2:
        return lhs == transvection(n, k + 1, k + 3, beta, field)
    return lhs.is_identity()


def check_YZ_identity(n: int, field: Field, k: int, beta: int, alphas: Sequence[int]) -> bool:
    """
    [y, t_{k,k+1}(-1)] = prod (t_{i,k+1}(-alpha_i) t_{i,k+2}(alpha_i beta)) t_{k,k+2}(beta)
    [[y, t_{k,k+1}(-1)], t_{k+2,k+3}(1)] = prod t_{i,k+3}(alpha_i beta) t_{k,k+3}(beta)
    """
    _check_range("k", k, 2, n - 3)
    f = field
    y = _y_element(n, f, k, beta, alphas)
    first = commutator(y, transvection(n, k, k + 1, f.neg(1), f))
    expected = []
    for i, alpha in enumerate(alphas, start=1):
        expected.append(transvection(n, i, k + 1, f.neg(alpha), f))
        expected.append(transvection(n, i, k + 2, f.mul(alpha, beta), f))
    expected.append(transvection(n, k, k + 2, beta, f))
    if first != product(expected, n, f):
        return False
    second = commutator(first, transvection(n, k + 2, k + 3, 1, f))
    tail = [transvection(n, i, k + 3, f.mul(alpha, beta), f) for i, alpha in enumerate(alphas, start=1)]
    tail.append(transvection(n, k, k + 3, beta, f))
    return second == product(tail, n, f)


def check_YZ_substitution(n: int, field: Field, gammas: Sequence[int]) -> bool:
    """beta = gamma_k, alpha_i = gamma_i / gamma_k: правая часть равна z = prod t_{i,k+3}(gamma_i)"""
    k = len(gammas)
    _check_range("k", k, 2, n - 3)
    f = field
    if gammas[-1] == 0:
        raise PreconditionError("substitution needs gamma_k != 0")
    beta = gammas[-1]
    alphas = [f.div(g, beta) for g in gammas[:-1]]
    if not check_YZ_identity(n, f, k, beta, alphas):
        return False
    y = _y_element(n, f, k, beta, alphas)
    rhs = commutator(commutator(y, transvection(n, k, k + 1, f.neg(1), f)),
                     transvection(n, k + 2, k + 3, 1, f))
    z = product([transvection(n, i, k + 3, g, f) for i, g in enumerate(gammas, start=1)], n, f)
    return rhs == z


def check_ZX_identity(a: UTElement, k: int) -> bool:
    """
    [[a, t_{k+1,k+2}(1)], t_{k+2,k+3}(1)] = prod_{i<=k} t_{i,k+3}(a_{i,k+1})
    [a, t_{k+1,k+2}(1)] = (e + a_{*,k+1} a'_{k+2,*}) t_{k+1,k+2}(-1)
                          лежит в prod_{i<=k} t_{i,k+2}(a_{i,k+1}) UP_{k+2}
    """
    n, f = a.n, a.field
    _check_range("k", k, 1, n - 3)
    inv = InverseView(a)
    first = commutator(a, transvection(n, k + 1, k + 2, 1, f))
    shifted = _unit(n, f, dense_add(f, dense_identity(n), outer(f, a.col(k + 1), inv.row(k + 2))))
    if first != multiply(shifted, transvection(n, k + 1, k + 2, f.neg(1), f)):
        return False
    head = product([transvection(n, i, k + 2, a.entry(i, k + 1), f) for i in range(1, k + 1)], n, f)
    if not in_UP_k(multiply(inverse(head), first), k + 2):
        return False
    second = commutator(first, transvection(n, k + 2, k + 3, 1, f))
    expected = product([transvection(n, i, k + 3, a.entry(i, k + 1), f) for i in range(1, k + 1)], n, f)
    return second == expected


# --- блочные коммутаторы первой строки ---

def shift_block_element(n: int, field: Field) -> UTElement:
    """diag(1, c^(-1)), c - единицы на диагонали и -1 на первой наддиагонали"""
    if n < 2:
        raise DimensionError(f"shift element needs n >= 2, got {n}")
    c = UTElement.from_mapping(n, field, {(i, i + 1): field.neg(1) for i in range(2, n)})
    return inverse(c)


def block_tail(b: UTElement) -> UTElement:
    """b~ - правый нижний блок размера n-1"""
    n = b.n
    return UTElement.from_mapping(
        n - 1, b.field, {(i - 1, j - 1): b.entry(i, j) for i in range(2, n + 1) for j in range(i + 1, n + 1)}
    )


def check_block_commutator(u: Sequence[int], b: UTElement) -> bool:
    """[a, b] = (1 u(e - b~^(-1)); 0 e) для a = (1 u; 0 e)"""
    n, f = b.n, b.field
    if n < 4:
        raise DimensionError(f"block commutator needs n >= 4, got {n}")
    a = _first_row_element(n, f, u)
    tail_inv = inverse(block_tail(b)).to_dense()
    row = []
    for col in range(n - 1):
        s = u[col]
        for r in range(n - 1):
            s = f.sub(s, f.mul(u[r], tail_inv[r][col]))
        row.append(s)
    return commutator(a, b) == _first_row_element(n, f, row)


def check_1row_double_commutator(n: int, field: Field, u: Sequence[int]) -> bool:
    """(1 u; 0 e) = [t_12(1), [t_23(1), prod_{i>=4} t_3i(u_{i-1})]] при u_1 = u_2 = 0"""
    if n < 4:
        raise DimensionError(f"row double commutator needs n >= 4, got {n}")
    if len(u) != n - 1:
        raise DimensionError(f"row of length {len(u)} for n={n}")
    if u[0] != 0 or u[1] != 0:
        raise PreconditionError("u_1 and u_2 must vanish")
    f = field
    z = product([transvection(n, 3, i, u[i - 2], f) for i in range(4, n + 1)], n, f)
    rhs = commutator(transvection(n, 1, 2, 1, f), commutator(transvection(n, 2, 3, 1, f), z))
    return rhs == _first_row_element(n, f, u)


# --- подкентральное отображение как сопряжение ---

def _subcentral_inner_holds(alpha: int, beta: int, b: UTElement) -> bool:
    """Сопряжение здесь x^(-1) b x, а не t b t^(-1) как у quasi_inner"""
    n, f = b.n, b.field
    lhs = multiply(
        multiply(b, transvection(n, 2, n, f.mul(alpha, b.entry(2, 3)), f)),
        transvection(n, 1, n - 1, f.mul(beta, b.entry(n - 2, n - 1)), f),
    )
    x = multiply(transvection(n, 3, n, alpha, f), transvection(n, 1, n - 2, f.neg(beta), f))
    rhs = multiply(multiply(inverse(x), b), x)
    return center_congruent(lhs, rhs)


def check_subcentral_inner_note(
    n: int, field: Field, alpha: int, beta: int, elements: Optional[Iterable[UTElement]] = None
) -> bool:
    """b t_2n(alpha b_23) t_{1,n-1}(beta b_{n-2,n-1}) = x^(-1) b x mod C, x = t_3n(alpha) t_{1,n-2}(-beta)"""
    if n < 4:
        raise DimensionError(f"the note needs n >= 4, got {n}")
    if elements is None:
        elements = _domain(n, field, exhaustive=field.q ** (n * (n - 1) // 2) <= EXHAUSTIVE_LIMIT,
                           count=200, rng=random.Random(0))
    return all(_subcentral_inner_holds(alpha, beta, b) for b in elements)


def check_ut3_extraction(a: UTElement) -> bool:
    """[t_12(1), a] = t_13(a_23) и [a, t_23(1)] = t_13(a_12)"""
    if a.n != 3:
        raise DimensionError(f"UT(3) extraction needs n = 3, got {a.n}")
    f = a.field
    if commutator(transvection(3, 1, 2, 1, f), a) != transvection(3, 1, 3, a.entry(2, 3), f):
        return False
    return commutator(a, transvection(3, 2, 3, 1, f)) == transvection(3, 1, 3, a.entry(1, 2), f)


# --- реестр и прогоны ---

def _domain(n: int, field: Field, exhaustive: bool, count: int, rng: random.Random) -> Iterator[UTElement]:
    if exhaustive:
        return all_elements(n, field)
    return (random_element(n, field, rng) for _ in range(count))


def _field_vectors(field: Field, length: int, exhaustive: bool, count: int,
                   rng: random.Random) -> Iterator[Tuple[int, ...]]:
    if exhaustive:
        return itertools.product(range(field.q), repeat=length)
    return (tuple(rng.randrange(field.q) for _ in range(length)) for _ in range(count))


def _pad(u: Sequence[int], length: int) -> Tuple[int, ...]:
    return tuple(u) + (0,) * (length - len(u))


@dataclass(frozen=True)
class IdentityCheck:
    """Проверка тождества: диапазон n, перечисление экземпляров и вложение"""

    name: str
    min_n: int
    max_n: Optional[int]
    run: Callable[..., bool]
    instances: Callable[[int, Field, bool, int, random.Random], Iterator[Tuple[Any, ...]]]
    embed: Optional[Callable[[Tuple[Any, ...], int], Tuple[Any, ...]]] = None

    def applies(self, n: int) -> bool:
        return n >= self.min_n and (self.max_n is None or n <= self.max_n)


def _index_pairs(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(2, n) for j in range(2, n)]


def _extraction_instances(n, field, exhaustive, count, rng):
    pairs = _index_pairs(n)
    if exhaustive:
        for a in all_elements(n, field):
            for i, j in pairs:
                yield (a, i, j)
    else:
        for _ in range(count):
            i, j = rng.choice(pairs)
            yield (random_element(n, field, rng), i, j)


def _embed_matrix_args(args, n_new):
    return (embed(args[0], n_new),) + tuple(args[1:])


def _embed_last_row_args(args, n_new):
    """Последний столбец a переносится в столбец n', остальное - как при embed"""
    a, i, j = args
    values = {(r, n_new if c == a.n else c): x for (r, c), x in zip(positions(a.n), a.entries) if x}
    return (UTElement.from_mapping(n_new, a.field, values), i, j)


def _y_instances(n, field, exhaustive, count, rng):
    params = [(k, j) for k in range(1, n - 2) for j in range(k + 1, n)]
    if exhaustive:
        for k, j in params:
            for values in itertools.product(range(field.q), repeat=k):
                yield (n, field, k, values[0], values[1:], j)
    else:
        for _ in range(count):
            k, j = rng.choice(params)
            values = [rng.randrange(field.q) for _ in range(k)]
            yield (n, field, k, values[0], values[1:], j)


def _yz_instances(n, field, exhaustive, count, rng):
    ks = list(range(2, n - 2))
    if exhaustive:
        for k in ks:
            for values in itertools.product(range(field.q), repeat=k):
                yield (n, field, k, values[0], values[1:])
    else:
        for _ in range(count):
            k = rng.choice(ks)
            values = [rng.randrange(field.q) for _ in range(k)]
            yield (n, field, k, values[0], values[1:])


def _yz_substitution_instances(n, field, exhaustive, count, rng):
    ks = list(range(2, n - 2))
    if exhaustive:
        for k in ks:
            for head in itertools.product(range(field.q), repeat=k - 1):
                for last in field.nonzero():
                    yield (n, field, head + (last,))
    else:
        for _ in range(count):
            k = rng.choice(ks)
            head = tuple(rng.randrange(field.q) for _ in range(k - 1))
            yield (n, field, head + (rng.randrange(1, field.q),))


def _embed_dimension_args(args, n_new):
    return (n_new,) + tuple(args[1:])


def _zx_instances(n, field, exhaustive, count, rng):
    ks = list(range(1, n - 2))
    if exhaustive:
        for a in all_elements(n, field):
            for k in ks:
                yield (a, k)
    else:
        for _ in range(count):
            yield (random_element(n, field, rng), rng.choice(ks))


def _block_instances(n, field, exhaustive, count, rng):
    if exhaustive:
        rows = list(itertools.product(range(field.q), repeat=n - 1))
        special = shift_block_element(n, field)
        for b in itertools.chain([special], all_elements(n, field)):
            for u in rows if b is special else _sample_rows(rows, rng):
                yield (u, b)
    else:
        for _ in range(count):
            u = tuple(rng.randrange(field.q) for _ in range(n - 1))
            yield (u, random_element(n, field, rng))


def _sample_rows(rows, rng, size: int = 4):
    """Для каждого b: нулевая строка, базисные строки и несколько случайных"""
    picked = [rows[0]] + [r for r in rows if sum(1 for x in r if x) == 1 and max(r) == 1]
    return picked + [rng.choice(rows) for _ in range(size)]


def _embed_block_args(args, n_new):
    u, b = args
    return (_pad(u, n_new - 1), embed(b, n_new))


def _one_row_instances(n, field, exhaustive, count, rng):
    for tail in _field_vectors(field, n - 3, exhaustive, count, rng):
        yield (n, field, (0, 0) + tuple(tail))


def _embed_one_row_args(args, n_new):
    _, field, u = args
    return (n_new, field, _pad(u, n_new - 1))


def _note_instances(n, field, exhaustive, count, rng):
    if exhaustive:
        for alpha, beta in itertools.product(range(field.q), repeat=2):
            for b in all_elements(n, field):
                yield (alpha, beta, b)
    else:
        for _ in range(count):
            yield (rng.randrange(field.q), rng.randrange(field.q), random_element(n, field, rng))


def _embed_note_args(args, n_new):
    alpha, beta, b = args
    return (alpha, beta, embed(b, n_new))


def _ut3_instances(n, field, exhaustive, count, rng):
    for a in _domain(3, field, exhaustive, count, rng):
        yield (a,)


IDENTITY_CHECKS: Dict[str, IdentityCheck] = {
    check.name: check
    for check in (
        IdentityCheck("extraction_first_col", 3, None, check_extraction_first_col,
                      _extraction_instances, _embed_matrix_args),
        IdentityCheck("extraction_last_row", 3, None, check_extraction_last_row,
                      _extraction_instances, _embed_last_row_args),
        IdentityCheck("Y", 4, None, check_Y_identity, _y_instances, _embed_dimension_args),
        IdentityCheck("YZ", 5, None, check_YZ_identity, _yz_instances, _embed_dimension_args),
        IdentityCheck("YZ_substitution", 5, None, check_YZ_substitution,
                      _yz_substitution_instances, _embed_dimension_args),
        IdentityCheck("ZX", 4, None, check_ZX_identity, _zx_instances, _embed_matrix_args),
        IdentityCheck("block_commutator", 4, None, check_block_commutator,
                      _block_instances, _embed_block_args),
        IdentityCheck("1row_double_commutator", 4, None, check_1row_double_commutator,
                      _one_row_instances, _embed_one_row_args),
        IdentityCheck("subcentral_inner_note", 4, None, _subcentral_inner_holds,
                      _note_instances, _embed_note_args),
        IdentityCheck("ut3_extraction", 3, 3, check_ut3_extraction, _ut3_instances, None),
    )
}


@dataclass
class SweepResult:
    """Итог прогона одной проверки на одной (n, q)"""

    name: str
    n: int
    q: int
    mode: str
    instances: int = 0
    failures: int = 0
    witness: Optional[Tuple[Any, ...]] = None
    embedded_instances: int = 0
    embedding_failures: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.embedding_failures == 0


def run_identity_sweep(
    check: IdentityCheck,
    n: int,
    field: Field,
    exhaustive: bool = False,
    count: int = 1000,
    seed: int = 0,
    embed_up_to: Optional[int] = None,
    embed_samples: int = 2,
) -> SweepResult:
    """Проверка всех (или count случайных) экземпляров; зерно выводится из (seed, n, q)"""
    rng = random.Random(f"{seed}:{check.name}:{n}:{field.q}")
    result = SweepResult(check.name, n, field.q, "exhaustive" if exhaustive else "random")
    if not check.applies(n):
        return result
    embed_rng = random.Random(f"{seed}:embed:{check.name}:{n}:{field.q}")
    for args in check.instances(n, field, exhaustive, count, rng):
        result.instances += 1
        holds = check.run(*args)
        if not holds:
            result.failures += 1
            if result.witness is None:
                result.witness = args
                logger.error("Identity %s failed on UT(%d, F_%d): %r", check.name, n, field.q, args)
        if embed_up_to and check.embed is not None and embed_up_to > n:
            for n_new in embed_rng.sample(range(n + 1, embed_up_to + 1), min(embed_samples, embed_up_to - n)):
                result.embedded_instances += 1
                if check.run(*check.embed(args, n_new)) != holds:
                    result.embedding_failures += 1
                    if result.witness is None:
                        result.witness = args
                        logger.error("Identity %s changed under embedding into UT(%d)", check.name, n_new)
    logger.debug("Identity %s on UT(%d, F_%d): %d instances, %d failures",
                 check.name, n, field.q, result.instances, result.failures)
    return result


def verify_identities(
    n: int,
    field: Field,
    exhaustive: bool = False,
    count: int = 1000,
    seed: int = 0,
    names: Optional[Sequence[str]] = None,
    embed_up_to: Optional[int] = None,
) -> List[SweepResult]:
    """Прогон всех применимых проверок на UT(n, F)"""
    if exhaustive and field.q ** (n * (n - 1) // 2) > EXHAUSTIVE_LIMIT:
        raise DimensionError(f"exhaustive sweep of UT({n}, F_{field.q}) is too large")
    selected = [IDENTITY_CHECKS[name] for name in (names or IDENTITY_CHECKS)]
    results = [
        run_identity_sweep(check, n, field, exhaustive, count, seed, embed_up_to)
        for check in selected
        if check.applies(n)
    ]
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error("Identity failures on UT(%d, F_%d): %s", n, field.q, ", ".join(failed))
    else:
        logger.info("All %d identity checks passed on UT(%d, F_%d)", len(results), n, field.q)
    return results
