"""Data-quality anomaly records."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Literal

QA_CODES = frozenset(
    {
        "ambiguous_match",
        "coercion_failed",
        "required_null",
        "negative_delta",
        "hash_changed",
        "table_missing",
        "ingest_failed",
        "schema_drift",
        "ratio_exceeds_one",
        "daily_mismatch",
    }
)


@dataclass(frozen=True)
class QaRecord:
    state_code: str
    date: str
    sql_table: str
    severity: Literal["warn", "error"]
    code: str
    detail: str = ""

    def __post_init__(self):
        if self.code not in QA_CODES:
            raise ValueError(f"unknown QA code {self.code!r}")
        if self.severity not in ("warn", "error"):
            raise ValueError(f"unknown severity {self.severity!r}")

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.state_code, self.date, self.sql_table, self.code)

    def to_dict(self) -> dict:
        return asdict(self)
