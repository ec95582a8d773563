"""Per-state table definitions and the record extractor that applies them.

A state's definitions live in versioned JSON files,
``<schema_dir>/<STATE>/<YYYY-MM-DD>.json``, where the file name is the first
bulletin date the version applies to.  Each file looks like::

    {
      "state_code": "DL",
      "version": "2020-03-01",
      "date_formats": ["%d-%m-%Y", "%d/%m/%Y"],
      "tables": [
        {
          "table_id": "dl_testing",
          "sql_table": "testing",
          "category": "testing",
          "header_anchors": ["rt pcr tests", "total tests"],
          "threshold": 0.85,
          "orientation": "row-wise",
          "merge_continuation_rows": false,
          "entity_key": [],
          "column_map": [
            {"source": "rt pcr tests", "dest": "rtpcr_tests", "kind": "integer", "required": true}
          ]
        }
      ]
    }

Row-wise tables are located by their header row (row 0, or rows 0 and 1
joined when headers wrap); key-value tables by the labels in their first
column.  A ``source`` is a header phrase or a 0-based column (row-wise) or
row (key-value) index.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import date as Date, datetime
from importlib import resources
from pathlib import Path
from typing import Literal, Sequence

from .errors import AmbiguousMatch, CoercionError, ConfigError
from .geometry import TableGrid
from .qa import QaRecord

log = logging.getLogger(__name__)

Kind = Literal["integer", "real", "text", "date"]
KINDS = ("integer", "real", "text", "date")
DEFAULT_THRESHOLD = 0.85
DEFAULT_DATE_FORMATS = ("%d-%m-%Y", "%d/%m/%Y", "%d.%m.%Y", "%Y-%m-%d", "%d %B %Y", "%d %b %Y", "%B %d, %Y")
NULL_TOKENS = frozenset({"", "nil", "na", "n/a", "-", "--"})
FOOTNOTE = re.compile(r"[*†#]+$")
NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?")
STATES = ("DL", "HR", "KA", "MH", "TG", "UK", "WB")


@dataclass(frozen=True)
class ColumnSpec:
    source: str | int
    dest: str
    kind: Kind = "integer"
    required: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r} for {self.dest}")


@dataclass(frozen=True)
class TableSchema:
    state_code: str
    table_id: str
    sql_table: str
    column_map: tuple[ColumnSpec, ...]
    header_anchors: tuple[str, ...] = ()
    threshold: float = DEFAULT_THRESHOLD
    orientation: Literal["row-wise", "key-value"] = "row-wise"
    merge_continuation_rows: bool = False
    entity_key: tuple[str, ...] = ()
    category: str = ""
    # positional locator: take the n-th detected grid when there are no anchors
    grid_index: int | None = None

    def __post_init__(self):
        dests = [c.dest for c in self.column_map]
        if len(set(dests)) != len(dests):
            raise ConfigError(f"{self.table_id}: duplicate destination columns")
        if not self.header_anchors and self.grid_index is None:
            raise ConfigError(f"{self.table_id}: needs header anchors or a grid_index")
        if self.orientation not in ("row-wise", "key-value"):
            raise ConfigError(f"{self.table_id}: bad orientation {self.orientation!r}")
        if not set(self.entity_key) <= set(dests):
            raise ConfigError(f"{self.table_id}: entity_key must name mapped columns")
        object.__setattr__(self, "header_anchors", tuple(normalize_header(a) for a in self.header_anchors))

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(c.dest for c in self.column_map)

    @property
    def kinds(self) -> dict[str, str]:
        return {c.dest: c.kind for c in self.column_map}

    @classmethod
    def from_dict(cls, d: dict, state_code: str | None = None) -> TableSchema:
        return cls(
            state_code=d.get("state_code", state_code),
            table_id=d["table_id"],
            sql_table=d["sql_table"],
            column_map=tuple(ColumnSpec(**c) for c in d["column_map"]),
            header_anchors=tuple(d.get("header_anchors", ())),
            threshold=float(d.get("threshold", DEFAULT_THRESHOLD)),
            orientation=d.get("orientation", "row-wise"),
            merge_continuation_rows=bool(d.get("merge_continuation_rows", False)),
            entity_key=tuple(d.get("entity_key", ())),
            category=d.get("category", ""),
            grid_index=d.get("grid_index"),
        )


@dataclass(frozen=True)
class SchemaVersion:
    state_code: str
    version: str
    tables: tuple[TableSchema, ...]
    date_formats: tuple[str, ...] = DEFAULT_DATE_FORMATS

    @classmethod
    def from_dict(cls, d: dict) -> SchemaVersion:
        state = d["state_code"]
        return cls(
            state_code=state,
            version=d["version"],
            tables=tuple(TableSchema.from_dict(t, state) for t in d["tables"]),
            date_formats=tuple(d.get("date_formats", DEFAULT_DATE_FORMATS)),
        )


@dataclass
class BulletinRecordSet:
    state_code: str
    date: str
    sql_table: str
    columns: tuple[str, ...]
    rows: list[tuple]
    provenance: dict = field(default_factory=dict)
    table_id: str = ""


# ---------------------------------------------------------------------------
# Schema files
# ---------------------------------------------------------------------------


def default_schema_dir() -> Path:
    return Path(str(resources.files("bulletinkit") / "data" / "schemas"))


def load_schema_versions(state_code: str, schema_dir=None) -> list[SchemaVersion]:
    root = Path(schema_dir) if schema_dir is not None else default_schema_dir()
    folder = root / state_code
    if not folder.is_dir():
        raise ConfigError(f"no schema directory for state {state_code} under {root}")
    versions = []
    for path in sorted(folder.glob("*.json")):
        sv = SchemaVersion.from_dict(json.loads(path.read_text(encoding="utf-8")))
        if sv.version != path.stem:
            raise ConfigError(f"{path}: version field {sv.version!r} does not match file name")
        versions.append(sv)
    if not versions:
        raise ConfigError(f"no schema versions for state {state_code}")
    return versions


def schema_for_date(state_code: str, day: str | Date, schema_dir=None) -> SchemaVersion:
    """The schema version in force on ``day`` (the latest one not after it)."""
    day = day.isoformat() if isinstance(day, Date) else day
    versions = load_schema_versions(state_code, schema_dir)
    active = [v for v in versions if v.version <= day]
    if not active:
        raise ConfigError(f"no {state_code} schema version active on {day}")
    return active[-1]


# ---------------------------------------------------------------------------
# Header matching
# ---------------------------------------------------------------------------


def normalize_header(s: str) -> str:
    """Case-fold, drop trailing footnote markers, turn punctuation into
    spaces and collapse whitespace."""
    s = FOOTNOTE.sub("", s.strip())
    s = "".join(ch if ch.isalnum() or ch.isspace() else " " for ch in unicodedata.normalize("NFKC", s).casefold())
    return " ".join(s.split())


def _levenshtein(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """1 - edit distance / longer length, on normalized text with spaces
    removed (so "RTPCR" and "RT-PCR" compare equal)."""
    a = normalize_header(a).replace(" ", "")
    b = normalize_header(b).replace(" ", "")
    if not a and not b:
        return 1.0
    return 1.0 - _levenshtein(a, b) / max(len(a), len(b))


def _best(phrase: str, candidates: Sequence[str | Sequence[str]], threshold: float) -> int | None:
    """Index of the candidate most similar to ``phrase`` (at least
    ``threshold``; earliest on ties).  A candidate may be a list of
    alternative spellings, scored by its best alternative."""
    best, best_score = None, threshold
    for k, cand in enumerate(candidates):
        variants = [cand] if isinstance(cand, str) else cand
        score = max(similarity(phrase, v) for v in variants)
        if score >= best_score and (best is None or score > best_score):
            best, best_score = k, score
    return best


def _header_candidates(grid: TableGrid, depth: int) -> list[list[str]]:
    """Per column, the header texts a phrase may match.  With a two-row
    header that is the joined text and each row on its own."""
    m = grid.to_matrix(fill_spans=True)
    if depth == 1 or grid.n_rows < 2:
        return [[t] for t in m[0]]
    out = []
    for j in range(grid.n_cols):
        top, low = m[0][j], m[1][j]
        out.append([top] if top == low else [f"{top} {low}".strip(), top, low])
    return out


def _key_candidates(grid: TableGrid) -> list[str]:
    return [row[0] for row in grid.to_matrix(fill_spans=True)]


def header_depth(grid: TableGrid, schema: TableSchema) -> int | None:
    """How many rows form the header of ``grid`` under ``schema`` (0 for a
    key-value table), or None when the anchors are not all present."""
    if schema.orientation == "key-value":
        keys = _key_candidates(grid)
        ok = all(_best(a, keys, schema.threshold) is not None for a in schema.header_anchors)
        return 0 if ok else None
    phrases = [c.source for c in schema.column_map if isinstance(c.source, str)]

    def found(heads, items):
        return all(_best(p, heads, schema.threshold) is not None for p in items)

    one = _header_candidates(grid, 1)
    if found(one, schema.header_anchors) and found(one, phrases):
        return 1
    if grid.n_rows >= 3 and found(_header_candidates(grid, 2), schema.header_anchors):
        return 2
    return 1 if found(one, schema.header_anchors) else None


def match_table(grids: Sequence[TableGrid], schema: TableSchema) -> TableGrid | None:
    """The single grid carrying every header anchor of ``schema``.

    Raises AmbiguousMatch when more than one grid qualifies.
    """
    if not schema.header_anchors:
        idx = schema.grid_index
        return grids[idx] if idx is not None and 0 <= idx < len(grids) else None
    hits = [g for g in grids if header_depth(g, schema) is not None]
    if len(hits) > 1:
        raise AmbiguousMatch(schema.table_id, len(hits))
    return hits[0] if hits else None


# ---------------------------------------------------------------------------
# Cell coercion
# ---------------------------------------------------------------------------


def coerce(cell_text: str, kind: str, date_formats: Sequence[str] = DEFAULT_DATE_FORMATS):
    """Typed value for one cell, or None for an empty / nil marker.

    Numbers lose thousands separators (Indian grouping included) and
    footnote marks, and only the first numeric token counts, so "45 (12)"
    reads as 45.
    """
    s = (cell_text or "").strip()
    if kind == "text":
        return s or None
    s = FOOTNOTE.sub("", s).strip()
    if s.casefold() in NULL_TOKENS:
        return None
    if kind in ("integer", "real"):
        m = NUMBER.search(s.replace(",", ""))
        if m is None:
            raise CoercionError(cell_text, kind)
        value = float(m.group())
        if kind == "real":
            return value
        if not value.is_integer():
            raise CoercionError(cell_text, kind)
        return int(value)
    if kind == "date":
        for fmt in date_formats:
            try:
                return datetime.strptime(s, fmt).date().isoformat()
            except ValueError:
                continue
        raise CoercionError(cell_text, kind)
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


class _Reject(Exception):
    def __init__(self, code, detail):
        self.code = code
        self.detail = detail


def _rows_rowwise(grid: TableGrid, schema: TableSchema, depth: int) -> list[dict[str, str]]:
    heads = _header_candidates(grid, depth)
    index = {}
    for spec in schema.column_map:
        if isinstance(spec.source, int):
            k = spec.source if 0 <= spec.source < grid.n_cols else None
        else:
            k = _best(spec.source, heads, schema.threshold)
        if k is None and spec.required:
            raise _Reject("required_null", f"column {spec.source!r} not found")
        index[spec.dest] = k
    body = grid.to_matrix(fill_spans=True)[depth:]
    if schema.merge_continuation_rows:
        merged: list[list[str]] = []
        for row in body:
            if merged and not row[0].strip():
                merged[-1] = [f"{a} {b}".strip() for a, b in zip(merged[-1], row)]
            else:
                merged.append(list(row))
        body = merged
    out = []
    for row in body:
        if not any(t.strip() for t in row):
            continue
        out.append({dest: (row[k] if k is not None else "") for dest, k in index.items()})
    return out


def _rows_keyvalue(grid: TableGrid, schema: TableSchema) -> list[dict[str, str]]:
    m = grid.to_matrix(fill_spans=True)
    keys = [row[0] for row in m]
    record = {}
    for spec in schema.column_map:
        if isinstance(spec.source, int):
            r = spec.source if 0 <= spec.source < grid.n_rows else None
        else:
            r = _best(spec.source, keys, schema.threshold)
        if r is None and spec.required:
            raise _Reject("required_null", f"key {spec.source!r} not found")
        record[spec.dest] = m[r][1] if r is not None and grid.n_cols > 1 else ""
    return [record]


def apply_schema(grid: TableGrid, schema: TableSchema, date_formats=DEFAULT_DATE_FORMATS) -> list[tuple]:
    """Typed rows from a matched grid; raises _Reject on any failure."""
    depth = header_depth(grid, schema) if schema.header_anchors else (0 if schema.orientation == "key-value" else 1)
    if depth is None:
        raise _Reject("table_missing", "anchors no longer match")
    raw = _rows_keyvalue(grid, schema) if schema.orientation == "key-value" else _rows_rowwise(grid, schema, depth)
    if not raw:
        raise _Reject("required_null", "table has no data rows")
    rows = []
    for n, rec in enumerate(raw):
        values = []
        for spec in schema.column_map:
            text = rec[spec.dest]
            try:
                value = coerce(text, spec.kind, date_formats)
            except CoercionError:
                if spec.required:
                    raise _Reject("coercion_failed", f"row {n} {spec.dest}: {text!r} is not {spec.kind}")
                log.warning("%s row %d: dropping unreadable %s value %r", schema.table_id, n, spec.dest, text)
                value = None
            if value is None and spec.required:
                raise _Reject("required_null", f"row {n} {spec.dest}: {text!r}")
            values.append(value)
        rows.append(tuple(values))
    return rows


def extract_records(
    grids: Sequence[TableGrid],
    day: str | Date,
    schemas: SchemaVersion | Sequence[TableSchema],
    provenance: dict | None = None,
) -> tuple[list[BulletinRecordSet], list[QaRecord]]:
    """Apply every table definition to one bulletin's grids.

    Each definition yields exactly one of: a record set, or a QA record
    explaining why not.  One failing definition never stops the others.
    """
    day = day.isoformat() if isinstance(day, Date) else day
    if isinstance(schemas, SchemaVersion):
        tables, formats = schemas.tables, schemas.date_formats
    else:
        tables, formats = tuple(schemas), DEFAULT_DATE_FORMATS
    recordsets, qa = [], []
    for schema in tables:
        try:
            grid = match_table(grids, schema)
        except AmbiguousMatch as exc:
            qa.append(QaRecord(schema.state_code, day, schema.sql_table, "error", "ambiguous_match", str(exc)))
            continue
        if grid is None:
            qa.append(QaRecord(schema.state_code, day, schema.sql_table, "warn", "table_missing", schema.table_id))
            continue
        try:
            rows = apply_schema(grid, schema, formats)
        except _Reject as rej:
            severity = "warn" if rej.code == "table_missing" else "error"
            qa.append(QaRecord(schema.state_code, day, schema.sql_table, severity, rej.code, f"{schema.table_id}: {rej.detail}"))
            continue
        prov = dict(provenance or {})
        prov.update(page_index=grid.page_index, method=grid.method, region_source=grid.region_source)
        recordsets.append(BulletinRecordSet(schema.state_code, day, schema.sql_table, schema.columns, rows, prov, schema.table_id))
    return recordsets, qa
