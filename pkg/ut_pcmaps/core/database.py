"""
Асинхронный кеш результатов перебора и разложений (SQLite)
"""

import hashlib
import json
import logging
from datetime import datetime
from typing import List, Optional

import aiosqlite
import numpy as np

from ut_pcmaps.core.enumeration import PCMapEnumeration, free_members, pinned_elements, twin_classes
from ut_pcmaps.core.group_table import GroupTable
from ut_pcmaps.models.schemas import DecompositionRecord, EnumerationHeader

logger = logging.getLogger(__name__)

SCHEMA = """
CREATE TABLE IF NOT EXISTS enumerations (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    n INTEGER NOT NULL,
    p INTEGER NOT NULL,
    k INTEGER NOT NULL,
    constraint_name TEXT NOT NULL,
    count TEXT NOT NULL,
    nodes INTEGER NOT NULL,
    representatives BLOB NOT NULL,
    created_at TIMESTAMP NOT NULL,
    UNIQUE (n, p, k, constraint_name)
);
CREATE TABLE IF NOT EXISTS decompositions (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    n INTEGER NOT NULL,
    p INTEGER NOT NULL,
    k INTEGER NOT NULL,
    map_hash TEXT NOT NULL,
    record TEXT NOT NULL,
    created_at TIMESTAMP NOT NULL,
    UNIQUE (n, p, k, map_hash)
);
"""


def map_hash(perm: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(perm, dtype=np.int64).tobytes()).hexdigest()


class DatabaseManager:
    """Асинхронный менеджер кеша результатов"""

    def __init__(self, db_path: str):
        self.db_path = db_path
        self._connection: Optional[aiosqlite.Connection] = None

    async def __aenter__(self):
        await self.connect()
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        await self.close()

    async def connect(self):
        """Установить соединение и создать таблицы"""
        if self._connection is None:
            self._connection = await aiosqlite.connect(self.db_path)
            self._connection.row_factory = aiosqlite.Row
            await self._connection.executescript(SCHEMA)
            await self._connection.commit()
            logger.debug("Opened result cache %s", self.db_path)

    async def close(self):
        """Закрыть соединение"""
        if self._connection:
            await self._connection.close()
            self._connection = None

    async def save_enumeration(self, enumeration: PCMapEnumeration) -> None:
        """Сохранить (или заменить) результат перебора для группы и ограничения"""
        await self.connect()
        table = enumeration.table
        reps = np.asarray(enumeration.representatives, dtype=np.int32).reshape(-1, table.order)
        await self._connection.execute(
            """
            INSERT OR REPLACE INTO enumerations
                (n, p, k, constraint_name, count, nodes, representatives, created_at)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                table.n, table.field.p, table.field.k, enumeration.constraint,
                str(enumeration.count), enumeration.nodes, reps.tobytes(), datetime.now().isoformat(),
            ),
        )
        await self._connection.commit()
        logger.info("Cached %d representatives for UT(%d, F_%d), constraint=%s",
                    len(enumeration.representatives), table.n, table.field.q, enumeration.constraint)

    async def load_enumeration(self, table: GroupTable, constraint: str) -> Optional[PCMapEnumeration]:
        """Восстановить результат перебора; классы близнецов пересчитываются по таблице"""
        await self.connect()
        async with self._connection.execute(
            """
            SELECT count, nodes, representatives FROM enumerations
            WHERE n = ? AND p = ? AND k = ? AND constraint_name = ?
            """,
            (table.n, table.field.p, table.field.k, constraint),
        ) as cursor:
            row = await cursor.fetchone()
        if row is None:
            return None

        reps = np.frombuffer(row["representatives"], dtype=np.int32).reshape(-1, table.order)
        classes = twin_classes(table)
        free = free_members(classes, pinned_elements(table, constraint))
        enumeration = PCMapEnumeration(
            table, constraint, [r.astype(np.int64) for r in reps], classes, free, row["nodes"]
        )
        if str(enumeration.count) != row["count"]:
            logger.warning("Cached count %s differs from the recomputed %d; ignoring the cache entry",
                           row["count"], enumeration.count)
            return None
        return enumeration

    async def list_enumerations(self) -> List[EnumerationHeader]:
        """Заголовки всех сохранённых переборов"""
        await self.connect()
        async with self._connection.execute(
            """
            SELECT n, p, k, constraint_name, count, nodes, length(representatives) AS size
            FROM enumerations ORDER BY n, p, k, constraint_name
            """
        ) as cursor:
            rows = await cursor.fetchall()
        headers = []
        for row in rows:
            order = (row["p"] ** row["k"]) ** (row["n"] * (row["n"] - 1) // 2)
            headers.append(EnumerationHeader(
                group=(row["n"], row["p"], row["k"]),
                order=order,
                constraint=row["constraint_name"],
                count=int(row["count"]),
                representatives=row["size"] // (4 * order),
                twin_classes=[],
                nodes=row["nodes"],
            ))
        return headers

    async def save_decomposition(self, table: GroupTable, perm: np.ndarray, record: DecompositionRecord) -> None:
        await self.connect()
        await self._connection.execute(
            """
            INSERT OR REPLACE INTO decompositions (n, p, k, map_hash, record, created_at)
            VALUES (?, ?, ?, ?, ?, ?)
            """,
            (
                table.n, table.field.p, table.field.k, map_hash(perm),
                record.model_dump_json(), datetime.now().isoformat(),
            ),
        )
        await self._connection.commit()

    async def get_decompositions(
        self,
        table: GroupTable,
        perm: Optional[np.ndarray] = None,
    ) -> List[DecompositionRecord]:
        """Сохранённые разложения группы (или одного отображения)"""
        await self.connect()
        query = "SELECT record, created_at FROM decompositions WHERE n = ? AND p = ? AND k = ?"
        params: list = [table.n, table.field.p, table.field.k]
        if perm is not None:
            query += " AND map_hash = ?"
            params.append(map_hash(perm))
        query += " ORDER BY id"
        async with self._connection.execute(query, params) as cursor:
            rows = await cursor.fetchall()
        records = []
        for row in rows:
            data = json.loads(row["record"])
            data["created_at"] = row["created_at"]
            records.append(DecompositionRecord.model_validate(data))
        return records
