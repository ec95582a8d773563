"""SQLite storage for extracted records, QA anomalies and the public dump.

Data tables are generated from the registered table definitions: one table
per ``sql_table`` keyed by ``(state_code, date)`` plus any entity key.
Tables whose names start with an underscore are bookkeeping (audit trail,
QA records, provenance) and are left out of the dump.
"""

from __future__ import annotations

import json
import re
import sqlite3
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import SchemaDriftError
from .qa import QaRecord
from .schema import BulletinRecordSet, TableSchema

DB_NAME = "covid_india.db"
DUMP_NAME = "covid_india.sql"
SQL_TYPES = {"integer": "INTEGER", "real": "REAL", "text": "TEXT", "date": "DATE"}
ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")

_BOOKKEEPING = """
CREATE TABLE IF NOT EXISTS _audit (
    seq INTEGER PRIMARY KEY,
    sql_table TEXT NOT NULL,
    row_key TEXT NOT NULL,
    prior_row TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS _qa (
    state_code TEXT NOT NULL,
    date TEXT NOT NULL,
    sql_table TEXT NOT NULL,
    code TEXT NOT NULL,
    severity TEXT NOT NULL,
    detail TEXT,
    PRIMARY KEY (state_code, date, sql_table, code)
);
CREATE TABLE IF NOT EXISTS _provenance (
    sql_table TEXT NOT NULL,
    state_code TEXT NOT NULL,
    date TEXT NOT NULL,
    table_id TEXT,
    sha256 TEXT,
    page_index INTEGER,
    method TEXT,
    region_source TEXT,
    PRIMARY KEY (sql_table, state_code, date)
);
"""


@dataclass(frozen=True)
class UpsertCounts:
    inserted: int = 0
    replaced: int = 0

    def __add__(self, other: UpsertCounts) -> UpsertCounts:
        return UpsertCounts(self.inserted + other.inserted, self.replaced + other.replaced)


def _q(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def connect(db_path) -> sqlite3.Connection:
    return sqlite3.connect(str(db_path))


@contextmanager
def session(db_path):
    """Connection that commits on success, rolls back on error, always closes."""
    conn = connect(db_path)
    try:
        with conn:
            yield conn
    finally:
        conn.close()


def table_layouts(schemas: Iterable[TableSchema]) -> dict[str, tuple[dict[str, str], tuple[str, ...]]]:
    """Per sql_table: merged {column: kind} and the entity key.

    Definitions from different states may share a table; they must agree on
    the kind of every shared column and on the entity key.
    """
    layouts: dict[str, tuple[dict[str, str], tuple[str, ...]]] = {}
    for s in schemas:
        kinds, key = layouts.setdefault(s.sql_table, ({}, tuple(s.entity_key)))
        if tuple(s.entity_key) != key:
            raise SchemaDriftError(f"{s.sql_table}: conflicting entity keys {key} vs {s.entity_key}")
        for dest, kind in s.kinds.items():
            if kinds.setdefault(dest, kind) != kind:
                raise SchemaDriftError(f"{s.sql_table}.{dest}: declared as {kinds[dest]} and {kind}")
    return layouts


def table_ddl(name: str, kinds: dict[str, str], entity_key: Sequence[str]) -> str:
    cols = ["state_code TEXT NOT NULL", "date DATE NOT NULL"]
    for dest in entity_key:
        cols.append(f"{_q(dest)} {SQL_TYPES[kinds[dest]]} NOT NULL")
    for dest in sorted(set(kinds) - set(entity_key)):
        cols.append(f"{_q(dest)} {SQL_TYPES[kinds[dest]]}")
    pk = ", ".join(["state_code", "date", *(_q(k) for k in entity_key)])
    body = ",\n    ".join(cols + [f"PRIMARY KEY ({pk})"])
    return f"CREATE TABLE {_q(name)} (\n    {body}\n)"


def init_db(db_path, schemas: Iterable[TableSchema]) -> Path:
    """Create data tables for every registered definition, plus bookkeeping."""
    layouts = table_layouts(schemas)
    with session(db_path) as conn:
        conn.executescript(_BOOKKEEPING)
        existing = {r[0]: r[1] for r in conn.execute("SELECT name, sql FROM sqlite_master WHERE type='table'")}
        for name in sorted(layouts):
            kinds, key = layouts[name]
            ddl = table_ddl(name, kinds, key)
            if name not in existing:
                conn.execute(ddl)
            elif existing[name] != ddl:
                raise SchemaDriftError(f"table {name} exists with a different layout")
    return Path(db_path)


def _declared(conn, table: str) -> dict[str, str]:
    return {r[1]: r[2].upper() for r in conn.execute(f"PRAGMA table_info({_q(table)})")}


def _key_columns(conn, table: str) -> list[str]:
    rows = [r for r in conn.execute(f"PRAGMA table_info({_q(table)})") if r[5] > 0]
    return [r[1] for r in sorted(rows, key=lambda r: r[5])]


def _fits(value, sql_type: str) -> bool:
    if value is None:
        return True
    if sql_type == "INTEGER":
        return isinstance(value, int) and not isinstance(value, bool)
    if sql_type == "REAL":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if sql_type == "DATE":
        return isinstance(value, str) and bool(ISO_DATE.match(value))
    return isinstance(value, str)


def _check_recordset(conn, rs: BulletinRecordSet) -> None:
    declared = _declared(conn, rs.sql_table)
    if not declared:
        raise SchemaDriftError(f"no table {rs.sql_table}")
    missing = [c for c in rs.columns if c not in declared]
    if missing:
        raise SchemaDriftError(f"{rs.sql_table}: unknown columns {missing}")
    for row in rs.rows:
        if len(row) != len(rs.columns):
            raise SchemaDriftError(f"{rs.sql_table}: row width {len(row)} != {len(rs.columns)}")
        for col, value in zip(rs.columns, row):
            if not _fits(value, declared[col]):
                raise SchemaDriftError(f"{rs.sql_table}.{col}: {value!r} is not {declared[col]}")


def upsert(recordsets: Sequence[BulletinRecordSet], db_path) -> UpsertCounts:
    """Insert or replace every row; replaced rows are copied to ``_audit``
    first.  All record sets are validated against the table layout before
    anything is written."""
    inserted = replaced = 0
    with session(db_path) as conn:
        for rs in recordsets:
            _check_recordset(conn, rs)
        for rs in recordsets:
            key_cols = _key_columns(conn, rs.sql_table)
            cols = ["state_code", "date", *rs.columns]
            placeholders = ", ".join("?" for _ in cols)
            insert = f"INSERT OR REPLACE INTO {_q(rs.sql_table)} ({', '.join(map(_q, cols))}) VALUES ({placeholders})"
            for row in rs.rows:
                values = dict(zip(cols, (rs.state_code, rs.date, *row)))
                key = [values.get(k) for k in key_cols]
                where = " AND ".join(f"{_q(k)} IS ?" for k in key_cols)
                conn.row_factory = sqlite3.Row
                prior = conn.execute(f"SELECT * FROM {_q(rs.sql_table)} WHERE {where}", key).fetchone()
                conn.row_factory = None
                if prior is not None:
                    conn.execute(
                        "INSERT INTO _audit (sql_table, row_key, prior_row) VALUES (?, ?, ?)",
                        (rs.sql_table, json.dumps(key), json.dumps(dict(prior), sort_keys=True)),
                    )
                    replaced += 1
                else:
                    inserted += 1
                conn.execute(insert, [values[c] for c in cols])
            prov = rs.provenance
            conn.execute(
                "INSERT OR REPLACE INTO _provenance VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (rs.sql_table, rs.state_code, rs.date, rs.table_id, prov.get("sha256"),
                 prov.get("page_index"), prov.get("method"), prov.get("region_source")),
            )
    return UpsertCounts(inserted, replaced)


def record_qa(records: Iterable[QaRecord], db_path) -> int:
    n = 0
    with session(db_path) as conn:
        conn.executescript(_BOOKKEEPING)
        for q in records:
            conn.execute(
                "INSERT OR REPLACE INTO _qa VALUES (?, ?, ?, ?, ?, ?)",
                (q.state_code, q.date, q.sql_table, q.code, q.severity, q.detail),
            )
            n += 1
    return n


def clear_qa(db_path, state_code: str, day: str | None = None, codes: Sequence[str] | None = None) -> None:
    """Delete QA records for a state, optionally limited to one date and to
    some codes."""
    conds, args = ["state_code = ?"], [state_code]
    if day is not None:
        conds.append("date = ?")
        args.append(day)
    if codes is not None:
        conds.append(f"code IN ({', '.join('?' for _ in codes)})")
        args += list(codes)
    with session(db_path) as conn:
        conn.executescript(_BOOKKEEPING)
        conn.execute("DELETE FROM _qa WHERE " + " AND ".join(conds), args)


def list_qa(db_path, state_code: str | None = None, severity: str | None = None) -> list[QaRecord]:
    sql = "SELECT state_code, date, sql_table, severity, code, detail FROM _qa"
    conds, args = [], []
    if state_code:
        conds.append("state_code = ?")
        args.append(state_code)
    if severity:
        conds.append("severity = ?")
        args.append(severity)
    if conds:
        sql += " WHERE " + " AND ".join(conds)
    sql += " ORDER BY state_code, date, sql_table, code"
    with session(db_path) as conn:
        conn.executescript(_BOOKKEEPING)
        return [QaRecord(*r) for r in conn.execute(sql, args)]


def data_tables(conn) -> list[str]:
    names = [r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")]
    return sorted(n for n in names if not n.startswith(("_", "sqlite_")))


def _literal(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bytes):
        return "X'" + value.hex().upper() + "'"
    return "'" + str(value).replace("'", "''") + "'"


def dump_sql(db_path, out_path) -> Path:
    """Canonical text dump of the data tables: DDL, then rows in primary-key
    order, tables in lexicographic order.  Identical content gives identical
    bytes."""
    out_path = Path(out_path)
    with session(db_path) as conn:
        lines = ["PRAGMA foreign_keys=OFF;", "BEGIN TRANSACTION;"]
        for name in data_tables(conn):
            (ddl,) = conn.execute("SELECT sql FROM sqlite_master WHERE type='table' AND name=?", (name,)).fetchone()
            lines.append(ddl + ";")
            order = ", ".join(_q(k) for k in _key_columns(conn, name)) or "rowid"
            for row in conn.execute(f"SELECT * FROM {_q(name)} ORDER BY {order}"):
                lines.append(f"INSERT INTO {_q(name)} VALUES({','.join(_literal(v) for v in row)});")
        lines.append("COMMIT;")
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path
