#!/usr/bin/env python3
"""
CLI интерфейс для ut-pcmaps

Результаты печатаются в stdout как JSON (потоки - по одной записи на строку),
журнал пишется в stderr. Коды выхода: 0 - успех, 1 - проверка не прошла,
2 - ошибка использования или нарушенное предусловие.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from ut_pcmaps.core.errors import (
    BoundExceededError,
    CheckFailure,
    DecompositionError,
    SearchBudgetExceeded,
    ToolkitError,
)
from ut_pcmaps.core.factor import factor_commutator, factor_double_commutator
from ut_pcmaps.core.field import Field
from ut_pcmaps.core.identities import IDENTITY_CHECKS
from ut_pcmaps.core.matrix import UTElement, commutator, inverse, multiply
from ut_pcmaps.core.toolkit import CRITERIA, PCMapToolkit
from ut_pcmaps.models.schemas import (
    EnumerationHeader,
    FactorizationRecord,
    MapTableRecord,
    ToolkitSettings,
)
from ut_pcmaps.utils.helpers import (
    element_record,
    field_from_order,
    field_record,
    format_table,
    jsonable,
    parse_element,
    table_record,
    to_json,
)

logger = logging.getLogger("ut_pcmaps")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def setup_logging(verbose: bool = False):
    """Настройка логирования"""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def settings_from_args(args: argparse.Namespace) -> ToolkitSettings:
    values = {"seed": args.seed, "workers": args.workers, "progress": args.progress}
    if args.budget is not None:
        values["node_budget"] = args.budget
    if args.param_budget is not None:
        values["param_budget"] = args.param_budget
    if getattr(args, "count", None) is not None:
        values["sample_count"] = args.count
    return ToolkitSettings(**values)


def emit(value) -> None:
    print(value if isinstance(value, str) else to_json(value))


def _field(args: argparse.Namespace) -> Field:
    return field_from_order(args.q)


def _element(args: argparse.Namespace, text: str) -> UTElement:
    return parse_element(text, args.n, _field(args))


# --- команды над элементами ---

def field_info(args: argparse.Namespace) -> int:
    emit(field_record(_field(args)).model_dump())
    return EXIT_OK


def mul(args: argparse.Namespace) -> int:
    emit(element_record(multiply(_element(args, args.a), _element(args, args.b))).model_dump())
    return EXIT_OK


def invert(args: argparse.Namespace) -> int:
    emit(element_record(inverse(_element(args, args.a))).model_dump())
    return EXIT_OK


def commute(args: argparse.Namespace) -> int:
    emit(element_record(commutator(_element(args, args.a), _element(args, args.b))).model_dump())
    return EXIT_OK


def factor(args: argparse.Namespace, double: bool = False) -> int:
    a = _element(args, args.a)
    if double:
        factors = factor_double_commutator(a, seed=args.seed)
        kind = "double_commutator"
    else:
        factors = factor_commutator(a, seed=args.seed)
        kind = "commutator"
    record = FactorizationRecord(
        target=element_record(a), kind=kind, factors=[element_record(x) for x in factors]
    )
    emit(record.model_dump())
    return EXIT_OK


# --- асинхронные команды ---

async def enumerate_maps(args: argparse.Namespace) -> int:
    """Перебор PC-отображений: заголовок, затем таблицы по одной на строку"""
    settings = settings_from_args(args)
    constraint = "almost_identity" if args.almost_identity else "none"
    field = _field(args)
    async with PCMapToolkit(settings, args.cache) as toolkit:
        try:
            enumeration = await toolkit.enumerate_maps(args.n, field, constraint)
        except SearchBudgetExceeded as e:
            partial = e.partial
            logger.error("Search aborted after %d nodes: %s", e.nodes, e)
            emit({
                "error": str(e),
                "nodes": e.nodes,
                "partial_representatives": len(partial.representatives) if partial is not None else 0,
            })
            return EXIT_CHECK_FAILED

    table = enumeration.table
    expand = not args.representatives and enumeration.count <= settings.expand_limit
    header = EnumerationHeader(
        group=(table.n, field.p, field.k),
        order=table.order,
        constraint=constraint,
        count=enumeration.count,
        representatives=len(enumeration.representatives),
        twin_classes=[len(c) for c in enumeration.classes],
        nodes=enumeration.nodes,
        expanded=expand,
    )
    emit(header.model_dump_json())
    perms = enumeration.tables(settings.expand_limit) if expand else enumeration.representatives
    for perm in perms:
        emit(table_record(table, perm).model_dump_json())
    return EXIT_OK


async def decompose(args: argparse.Namespace) -> int:
    record = MapTableRecord.model_validate_json(Path(args.table).read_text(encoding="utf-8"))
    n, p, k = record.group
    field = field_from_order(f"{p}^{k}")
    async with PCMapToolkit(settings_from_args(args), args.cache) as toolkit:
        try:
            result = await toolkit.decompose_table(n, field, record.perm)
        except DecompositionError as e:
            logger.error("%s", e)
            emit({"error": str(e), "map": record.perm})
            return EXIT_CHECK_FAILED
    emit(result.model_dump_json(exclude={"created_at"}))
    return EXIT_OK


async def verify(args: argparse.Namespace) -> int:
    field = _field(args)
    async with PCMapToolkit(settings_from_args(args)) as toolkit:
        reports = await toolkit.verify_identities(
            args.n, field, exhaustive=args.exhaustive, names=args.identity, embed_up_to=args.embed_up_to
        )
    if args.format == "json":
        for report in reports:
            emit(report.model_dump_json())
    else:
        rows = [
            (r.name, r.mode, r.instances, r.failures, r.embedded_instances, "pass" if r.passed else "FAIL")
            for r in reports
        ]
        emit(format_table(rows, ["identity", "mode", "instances", "failures", "embedded", "result"]))
    failed = [r for r in reports if not r.passed]
    if failed:
        emit({"error": "identity check failed", "witness": failed[0].witness})
        return EXIT_CHECK_FAILED
    return EXIT_OK


async def acceptance(args: argparse.Namespace) -> int:
    async with PCMapToolkit(settings_from_args(args), args.cache) as toolkit:
        report = await toolkit.run_acceptance(args.criteria)
    for result in report.criteria:
        logger.info("Criterion %d (%s): %s in %.1fs", result.number, result.title,
                    "passed" if result.passed else "FAILED", result.elapsed)
    emit(report.model_dump_json(exclude={"elapsed": True, "criteria": {"__all__": {"elapsed"}}}))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="Размерность n группы UT(n, F_q)")
    common.add_argument("--q", default="2", help="Порядок поля: q или p^k (по умолчанию 2)")
    common.add_argument("--seed", type=int, default=0, help="Зерно случайных выборок")
    common.add_argument(
        "--workers", type=int, default=1,
        help="Число процессов полного перебора (enumerate и перебор внутри acceptance); "
             "тождества проверяются в одном процессе",
    )
    common.add_argument("--budget", type=int, help="Предел числа узлов перебора")
    common.add_argument("--param-budget", type=int, help="Предел перебора параметров семейств")
    common.add_argument("--cache", help="SQLite-файл кеша результатов")
    common.add_argument("--progress", action="store_true", help="Показывать прогресс")
    common.add_argument("--verbose", "-v", action="store_true", help="Подробный вывод")

    parser = argparse.ArgumentParser(
        prog="ut-pcmaps",
        description="ut-pcmaps - отображения UT(n, F_q), сохраняющие коммутаторы",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры использования:
  %(prog)s field-info --q 3^2
  %(prog)s commutator --n 3 --q 3 --a "[1,0,0]" --b "[0,0,1]"
  %(prog)s enumerate --n 3 --q 2
  %(prog)s enumerate --n 4 --q 3 --almost-identity --workers 4
  %(prog)s decompose --table map.json
  %(prog)s verify-identities --n 5 --q 2 --exhaustive
  %(prog)s acceptance --cache results.db
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Доступные команды")

    subparsers.add_parser("field-info", parents=[common], help="Описание поля F_q")
    for name, help_text in (("mul", "Произведение a b"), ("commutator", "Коммутатор [a, b]")):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--a", required=True, help="Элемент: JSON-список элементов или ElementRecord")
        sub.add_argument("--b", required=True, help="Элемент: JSON-список элементов или ElementRecord")
    for name, help_text in (
        ("inverse", "Обратный элемент"),
        ("factor", "Разложение в коммутатор [b, c]"),
        ("factor-double", "Разложение в двойной коммутатор [x, [y, z]]"),
    ):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--a", required=True, help="Элемент: JSON-список элементов или ElementRecord")

    enumerate_parser = subparsers.add_parser("enumerate", parents=[common], help="Все PC-отображения")
    enumerate_parser.add_argument("--almost-identity", action="store_true",
                                  help="Только отображения, фиксирующие трансвекции")
    enumerate_parser.add_argument("--representatives", action="store_true",
                                  help="Выводить только канонических представителей")

    decompose_parser = subparsers.add_parser("decompose", parents=[common], help="Разложение PC-отображения")
    decompose_parser.add_argument("--table", required=True, help="JSON-файл MapTableRecord")

    verify_parser = subparsers.add_parser("verify-identities", parents=[common], help="Проверка тождеств")
    verify_parser.add_argument("--exhaustive", action="store_true", help="Все элементы группы")
    verify_parser.add_argument("--count", type=int, help="Число случайных экземпляров")
    verify_parser.add_argument("--identity", action="append", choices=sorted(IDENTITY_CHECKS),
                               help="Проверить только указанные тождества")
    verify_parser.add_argument("--embed-up-to", type=int, help="Проверять вложения до этой размерности")
    verify_parser.add_argument("--format", choices=["text", "json"], default="text", help="Формат вывода")

    acceptance_parser = subparsers.add_parser("acceptance", parents=[common], help="Критерии приёмки")
    acceptance_parser.add_argument("--criteria", type=int, nargs="+", choices=sorted(CRITERIA),
                                   help="Номера критериев (по умолчанию все)")
    return parser


NEEDS_N = {"mul", "inverse", "commutator", "factor", "factor-double", "enumerate", "verify-identities"}


def main(argv: Optional[List[str]] = None) -> int:
    """Основная функция CLI"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    if args.command in NEEDS_N and args.n is None:
        # список элементов без --n допустим только вместе с ElementRecord
        if not (args.command in {"mul", "inverse", "commutator", "factor", "factor-double"}
                and args.a.lstrip().startswith("{")):
            parser.error(f"{args.command} needs --n")

    setup_logging(args.verbose)

    commands = {
        "field-info": lambda: field_info(args),
        "mul": lambda: mul(args),
        "inverse": lambda: invert(args),
        "commutator": lambda: commute(args),
        "factor": lambda: factor(args),
        "factor-double": lambda: factor(args, double=True),
        "enumerate": lambda: asyncio.run(enumerate_maps(args)),
        "decompose": lambda: asyncio.run(decompose(args)),
        "verify-identities": lambda: asyncio.run(verify(args)),
        "acceptance": lambda: asyncio.run(acceptance(args)),
    }

    try:
        return commands[args.command]()
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return 130
    except CheckFailure as e:
        logger.error("Check failed: %s", e)
        emit({"error": str(e), "witness": jsonable(e.witness)})
        return EXIT_CHECK_FAILED
    except (BoundExceededError, SearchBudgetExceeded) as e:
        logger.error("%s: %s", type(e).__name__, e)
        emit({"error": str(e), "kind": type(e).__name__})
        return EXIT_CHECK_FAILED
    except (ToolkitError, ValidationError, json.JSONDecodeError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        if args.verbose:
            raise
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
