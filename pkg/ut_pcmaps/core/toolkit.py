"""
Основной класс: перебор, разложение, проверка тождеств и критерии приёмки
"""

import asyncio
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ut_pcmaps.core.database import DatabaseManager
from ut_pcmaps.core.decomposition import (
    Decomposition,
    FamilyTables,
    check_aut_times_subcentral,
    check_central_subgroup,
    check_subcentral_normality,
    decompose_pc_map,
    find_non_normality_witness,
    generate_standard_set,
    random_decomposition,
)
from ut_pcmaps.core.enumeration import (
    PCMapEnumeration,
    count_central_functions,
    enumerate_automorphisms,
    enumerate_pc_maps,
    naive_pc_maps,
    pinned_elements,
)
from ut_pcmaps.core.errors import CheckFailure, ToolkitError
from ut_pcmaps.core.factor import double_commutator_mask, factor_commutator, factor_double_commutator
from ut_pcmaps.core.field import Field, make_field
from ut_pcmaps.core.group_table import GroupTable, build_group_table
from ut_pcmaps.core.identities import SweepResult, verify_identities
from ut_pcmaps.core.matrix import commutator
from ut_pcmaps.core.pcmap import table_is_central, table_is_pc
from ut_pcmaps.models.schemas import (
    AcceptanceReport,
    CriterionResult,
    DecompositionRecord,
    FamilyRecord,
    IdentityReport,
    ToolkitSettings,
)
from ut_pcmaps.utils.helpers import jsonable, seeded_rng

logger = logging.getLogger(__name__)

# (n, p, k) полного перебора тождеств
EXHAUSTIVE_IDENTITY_GROUPS = [(3, 2, 1), (4, 2, 1), (5, 2, 1), (3, 3, 1), (4, 3, 1)]
RANDOM_IDENTITY_FIELDS = [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)]
RANDOM_IDENTITY_DIMENSIONS = range(3, 9)
EMBEDDING_GROUPS = [(n, p, 1) for n in range(3, 7) for p in (2, 3)]
EMBEDDING_DIMENSION = 12
EMBEDDING_SAMPLES = 100
DECOMPOSITION_ROUNDS = 100

CRITERIA = {
    1: "identity suite",
    2: "single commutators are the derived subgroup",
    3: "double commutators have zero first and second superdiagonals",
    4: "almost identity PC-maps are central",
    5: "classification of PC-maps of UT(3, F_3)",
    6: "decomposition round trip on UT(4, F_3)",
    7: "group structure of PC(UT(3, F_3))",
    8: "identities are stable under embedding",
}


def sweep_report(result: SweepResult) -> IdentityReport:
    return IdentityReport(
        name=result.name,
        n=result.n,
        q=result.q,
        mode=result.mode,
        instances=result.instances,
        failures=result.failures,
        embedded_instances=result.embedded_instances,
        embedding_failures=result.embedding_failures,
        passed=result.passed,
        witness=jsonable(result.witness) if result.witness is not None else None,
    )


def family_records(found: Decomposition) -> List[FamilyRecord]:
    """Семейства разложения слева направо в порядке композиции"""
    records: List[FamilyRecord] = []
    if found.n == 3:
        records.append(FamilyRecord(family="permutable", params={"coeffs": list(found.permutable or (1, 0, 0, 1))}))
    else:
        if found.graph:
            records.append(FamilyRecord(family="graph"))
        records.append(FamilyRecord(family="subcentral", params={"coeffs": list(found.subcentral)}))
        qi = found.quasi_inner
        records.append(FamilyRecord(
            family="quasi_inner",
            params={"diag": list(qi.diag), "unipotent": list(qi.unipotent.entries)} if qi is not None else {},
        ))
    records.append(FamilyRecord(family="field", params={"power": found.field_power}))
    records.append(FamilyRecord(family="central"))
    return records


def decomposition_record(table: GroupTable, found: Decomposition) -> DecompositionRecord:
    qi = found.quasi_inner
    return DecompositionRecord(
        group=(table.n, table.field.p, table.field.k),
        families=family_records(found),
        central=[int(x) for x in found.central],
        field_power=found.field_power,
        graph=found.graph,
        subcentral=found.subcentral,
        quasi_inner_diag=list(qi.diag) if qi is not None else None,
        quasi_inner_unipotent=list(qi.unipotent.entries) if qi is not None else None,
        permutable=found.permutable,
    )


class PCMapToolkit:
    """Оркестратор вычислений над PC-отображениями UT(n, F_q) с необязательным кешем"""

    def __init__(self, settings: Optional[ToolkitSettings] = None, cache_path: Optional[str] = None):
        self.settings = settings or ToolkitSettings()
        self.db_manager = DatabaseManager(cache_path) if cache_path else None
        self._tables: Dict[Tuple[int, int, int], GroupTable] = {}
        self._enumerations: Dict[Tuple[int, int, int, str], PCMapEnumeration] = {}

    async def __aenter__(self):
        if self.db_manager:
            await self.db_manager.connect()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        if self.db_manager:
            await self.db_manager.close()

    def group_table(self, n: int, field: Field) -> GroupTable:
        key = (n, field.p, field.k)
        if key not in self._tables:
            self._tables[key] = build_group_table(n, field, self.settings.group_bound)
        return self._tables[key]

    async def enumerate_maps(self, n: int, field: Field, constraint: str = "none") -> PCMapEnumeration:
        """Все PC-отображения UT(n, F): из памяти, из кеша или перебором"""
        key = (n, field.p, field.k, constraint)
        if key in self._enumerations:
            return self._enumerations[key]
        table = await asyncio.to_thread(self.group_table, n, field)
        enumeration = None
        if self.db_manager:
            enumeration = await self.db_manager.load_enumeration(table, constraint)
            if enumeration is not None:
                logger.info("Loaded enumeration of UT(%d, F_%d) from cache", n, field.q)
        if enumeration is None:
            s = self.settings
            enumeration = await asyncio.to_thread(
                enumerate_pc_maps, table, constraint, s.node_budget, s.workers, s.progress
            )
            if self.db_manager:
                await self.db_manager.save_enumeration(enumeration)
        self._enumerations[key] = enumeration
        return enumeration

    async def decompose_table(self, n: int, field: Field, perm: Sequence[int]) -> DecompositionRecord:
        """Разложение табличного PC-отображения на стандартные семейства"""
        table = await asyncio.to_thread(self.group_table, n, field)
        phi = np.asarray(perm, dtype=np.int64)
        if self.db_manager:
            cached = await self.db_manager.get_decompositions(table, phi)
            if cached:
                return cached[0]
        found = await asyncio.to_thread(decompose_pc_map, table, phi, self.settings.param_budget)
        record = decomposition_record(table, found)
        if self.db_manager:
            await self.db_manager.save_decomposition(table, phi, record)
        return record

    async def verify_identities(
        self,
        n: int,
        field: Field,
        exhaustive: bool = False,
        count: Optional[int] = None,
        names: Optional[Sequence[str]] = None,
        embed_up_to: Optional[int] = None,
    ) -> List[IdentityReport]:
        results = await asyncio.to_thread(
            verify_identities, n, field, exhaustive, count or self.settings.sample_count,
            self.settings.seed, names, embed_up_to,
        )
        return [sweep_report(r) for r in results]

    # --- критерии приёмки ---

    async def run_acceptance(self, criteria: Optional[Sequence[int]] = None) -> AcceptanceReport:
        """Прогон критериев приёмки по порядку; упавший критерий не прерывает остальные"""
        started = time.perf_counter()
        selected = sorted(criteria) if criteria else sorted(CRITERIA)
        handlers: Dict[int, Callable[[], Any]] = {
            1: self._identity_suite,
            2: self._single_commutators,
            3: self._double_commutators,
            4: self._almost_identity,
            5: self._classification,
            6: self._decomposition_round_trip,
            7: self._group_structure,
            8: self._embedding_stability,
        }
        results = []
        for number in selected:
            if number not in handlers:
                raise ToolkitError(f"unknown acceptance criterion {number}")
            results.append(await self._run_criterion(number, handlers[number]))
        report = AcceptanceReport(
            seed=self.settings.seed,
            criteria=results,
            passed=all(r.passed for r in results),
            elapsed=time.perf_counter() - started,
        )
        logger.info("Acceptance %s: %d/%d criteria passed", "passed" if report.passed else "FAILED",
                    sum(r.passed for r in results), len(results))
        return report

    async def _run_criterion(self, number: int, handler: Callable[[], Any]) -> CriterionResult:
        title = CRITERIA[number]
        logger.info("Criterion %d: %s", number, title)
        started = time.perf_counter()
        witness = None
        try:
            passed, details = await handler()
        except ToolkitError as e:
            logger.error("Criterion %d failed: %s: %s", number, type(e).__name__, e)
            passed, details = False, {"error": str(e)}
            witness = jsonable(getattr(e, "witness", None))
        elapsed = time.perf_counter() - started
        if passed:
            logger.info("Criterion %d passed in %.1fs", number, elapsed)
        else:
            logger.error("Criterion %d failed: %s", number, details)
            witness = witness if witness is not None else details.get("witness")
        return CriterionResult(
            number=number, title=title, passed=passed, details=jsonable(details),
            elapsed=elapsed, witness=witness,
        )

    async def _identity_suite(self) -> Tuple[bool, Dict[str, Any]]:
        reports: List[IdentityReport] = []
        for n, p, k in EXHAUSTIVE_IDENTITY_GROUPS:
            reports += await self.verify_identities(n, make_field(p, k), exhaustive=True)
        for p, k in RANDOM_IDENTITY_FIELDS:
            for n in RANDOM_IDENTITY_DIMENSIONS:
                reports += await self.verify_identities(n, make_field(p, k))
        failed = [r for r in reports if not r.passed]
        details = {
            "sweeps": len(reports),
            "instances": sum(r.instances for r in reports),
            "failed": [f"{r.name} UT({r.n}, F_{r.q})" for r in failed],
        }
        if failed:
            details["witness"] = failed[0].witness
        return not failed, details

    async def _embedding_stability(self) -> Tuple[bool, Dict[str, Any]]:
        count = min(self.settings.sample_count, EMBEDDING_SAMPLES)
        reports: List[IdentityReport] = []
        for n, p, k in EMBEDDING_GROUPS:
            reports += await self.verify_identities(
                n, make_field(p, k), count=count, embed_up_to=EMBEDDING_DIMENSION
            )
        failed = [r for r in reports if not r.passed]
        details = {
            "embedded_instances": sum(r.embedded_instances for r in reports),
            "failed": [f"{r.name} UT({r.n}, F_{r.q})" for r in failed],
        }
        if failed:
            details["witness"] = failed[0].witness
        return not failed, details

    async def _single_commutators(self) -> Tuple[bool, Dict[str, Any]]:
        details: Dict[str, Any] = {}
        passed = True
        for p in (2, 3):
            table = await asyncio.to_thread(self.group_table, 4, make_field(p))
            ok, factored = await asyncio.to_thread(self._check_single_commutators, table)
            details[f"UT(4, F_{p})"] = {"sets_equal": ok, "factored": factored}
            passed &= ok
        return passed, details

    @staticmethod
    def _check_single_commutators(table: GroupTable) -> Tuple[bool, int]:
        if not np.array_equal(table.commutator_mask, table.derived_mask):
            return False, 0
        factored = 0
        for x in np.flatnonzero(table.derived_mask).tolist():
            a = table.element(x)
            b, c = factor_commutator(a)
            if commutator(b, c) != a:
                raise CheckFailure("commutator factorisation does not round-trip", witness=a)
            factored += 1
        return True, factored

    async def _double_commutators(self) -> Tuple[bool, Dict[str, Any]]:
        table = await asyncio.to_thread(self.group_table, 5, make_field(2))

        def check() -> Tuple[bool, int]:
            if not np.array_equal(double_commutator_mask(table), table.second_derived_mask):
                return False, 0
            factored = 0
            for idx in np.flatnonzero(table.second_derived_mask).tolist():
                a = table.element(idx)
                x, y, z = factor_double_commutator(a)
                if commutator(x, commutator(y, z)) != a:
                    raise CheckFailure("double commutator factorisation does not round-trip", witness=a)
                factored += 1
            return True, factored

        ok, factored = await asyncio.to_thread(check)
        return ok, {"sets_equal": ok, "factored": factored}

    async def _almost_identity(self) -> Tuple[bool, Dict[str, Any]]:
        details: Dict[str, Any] = {}
        passed = True
        for p in (2, 3):
            field = make_field(p)
            enumeration = await self.enumerate_maps(4, field, "almost_identity")
            table = enumeration.table
            all_central = all(table_is_central(table, r) for r in enumeration.representatives)
            expected = count_central_functions(table, pinned_elements(table, "almost_identity"))
            ok = all_central and enumeration.count == expected
            details[f"UT(4, F_{p})"] = {"count": enumeration.count, "expected": expected, "central": all_central}
            passed &= ok
        return passed, details

    async def _classification(self) -> Tuple[bool, Dict[str, Any]]:
        field = make_field(3)
        enumeration = await self.enumerate_maps(3, field)
        table = enumeration.table
        standard = await asyncio.to_thread(
            generate_standard_set, table, self.settings.param_budget, self.settings.progress
        )
        found = {r.tobytes() for r in enumeration.representatives}
        expected = {r.tobytes() for r in standard.representatives}
        classified = found == expected

        small = await self.enumerate_maps(3, make_field(2))
        naive = await asyncio.to_thread(naive_pc_maps, small.table)
        complete = {t.tobytes() for t in small.tables(self.settings.expand_limit)} == {t.tobytes() for t in naive}

        details = {
            "count": enumeration.count,
            "standard_count": standard.count,
            "representatives": len(enumeration.representatives),
            "naive_UT(3, F_2)": len(naive),
            "enumerated_UT(3, F_2)": small.count,
        }
        if not classified:
            extra = [r for r in enumeration.representatives if r.tobytes() not in expected]
            if extra:
                details["witness"] = {"nonstandard": extra[0].tolist()}
        return classified and complete, details

    async def _decomposition_round_trip(self) -> Tuple[bool, Dict[str, Any]]:
        table = await asyncio.to_thread(self.group_table, 4, make_field(3))
        seed = self.settings.seed
        budget = self.settings.param_budget

        def run() -> Tuple[bool, Dict[str, Any]]:
            tables = FamilyTables(table)
            rng = seeded_rng(seed, "decompose", 4, 3)
            for round_ in range(DECOMPOSITION_ROUNDS):
                phi = random_decomposition(table, rng).recompose(tables)
                if not table_is_pc(table, phi):
                    return False, {"round": round_, "witness": {"not_pc": phi.tolist()}}
                found = decompose_pc_map(table, phi, budget, tables)
                if not np.array_equal(found.recompose(tables), phi):
                    return False, {"round": round_, "witness": {"map": phi.tolist()}}
            return True, {"rounds": DECOMPOSITION_ROUNDS}

        return await asyncio.to_thread(run)

    async def _group_structure(self) -> Tuple[bool, Dict[str, Any]]:
        enumeration = await self.enumerate_maps(3, make_field(3))
        table = enumeration.table
        automorphisms = await asyncio.to_thread(enumerate_automorphisms, table, self.settings.param_budget)
        central = await asyncio.to_thread(check_central_subgroup, enumeration)
        normal = await asyncio.to_thread(check_subcentral_normality, enumeration)
        factored = await asyncio.to_thread(check_aut_times_subcentral, enumeration, automorphisms)

        witness_table = await asyncio.to_thread(self.group_table, 4, make_field(3))
        witness = await asyncio.to_thread(find_non_normality_witness, witness_table)

        details: Dict[str, Any] = {
            "automorphisms": len(automorphisms),
            "central_subgroup": central.holds,
            "subcentral_normal": normal.holds,
            "aut_times_subcentral": factored.holds,
            "standard_subcentral_not_normal_in_UT(4, F_3)": witness is not None,
        }
        for check in (central, normal, factored):
            if not check.holds:
                details["witness"] = check.witness
                break
        if witness is not None:
            details["non_normality_witness"] = {
                "x": witness["x"], "alpha": witness["alpha"], "beta": witness["beta"],
            }
        return central.holds and normal.holds and factored.holds, details
