"""Daily orchestration: fetch, extract, load, analyze, dump.

Bulletins live at ``<data_dir>/bulletins/<state>/<YYYY-MM-DD>.pdf``.  Next
to a bulletin, optional sidecars refine extraction:

* ``<date>.hints.jsonl`` -- table region hints (see ``load_region_hints``);
* ``<date>.ocr.tsv`` with ``<date>.ocr.json`` -- a word grid and its page
  geometry, used instead of the PDF text layer for scanned bulletins.

Every (state, date) is processed in isolation: a broken bulletin becomes QA
records and never stops the others.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from datetime import date as Date
from importlib import resources
from pathlib import Path
from typing import Sequence

from .analytics import METRICS, compute_metric
from .errors import ConfigError, IngestError, SchemaDriftError
from .fetcher import FetchPolicy, Ledger, StateSource, discover, fetch_new, ledger_path, _get
from .ingest import OcrGeometry, load_ocr_grid, load_pdf, load_region_hints
from .qa import QaRecord
from .regions import DetectParams, detect_tables
from .schema import BulletinRecordSet, extract_records, load_schema_versions, schema_for_date
from .store import DB_NAME, DUMP_NAME, clear_qa, dump_sql, init_db, record_qa, upsert
from .stream import StreamParams

log = logging.getLogger(__name__)

ANALYTICS_CODES = ("negative_delta", "ratio_exceeds_one")


@dataclass(frozen=True)
class PipelineConfig:
    states: dict[str, StateSource]
    schema_dir: Path | None = None
    detect: DetectParams = DetectParams()
    fetch: FetchPolicy = field(default_factory=FetchPolicy)
    heuristic_regions: bool = False
    min_ocr_conf: float = 50.0

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> PipelineConfig:
        try:
            states = {code: StateSource.from_dict(code, s or {}) for code, s in d.get("states", {}).items()}
            schema_dir = d.get("schema_dir")
            if schema_dir is not None:
                schema_dir = Path(schema_dir)
                if base is not None and not schema_dir.is_absolute():
                    schema_dir = base / schema_dir
            det = dict(d.get("detector", {}))
            snap_tol = float(det.pop("snap_tol", 2.0))
            min_segments = int(det.pop("lattice_min_segments", 4))
            detect = DetectParams(StreamParams(**det), snap_tol, min_segments)
            fetch = FetchPolicy(**d.get("fetch", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        return cls(
            states=states,
            schema_dir=schema_dir,
            detect=detect,
            fetch=fetch,
            heuristic_regions=bool(d.get("heuristic_regions", False)),
            min_ocr_conf=float(d.get("min_ocr_conf", 50.0)),
        )


def load_config(path=None) -> PipelineConfig:
    """Read a JSON config; the packaged default when ``path`` is None."""
    if path is None:
        text = (resources.files("bulletinkit") / "data" / "config.json").read_text(encoding="utf-8")
        return PipelineConfig.from_dict(json.loads(text))
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return PipelineConfig.from_dict(d, base=path.parent)


@dataclass
class PipelineRunReport:
    fetched: int = 0
    extracted: int = 0
    loaded: int = 0
    qa_warn: int = 0
    qa_error: int = 0
    stage_seconds: dict[str, float] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    # (state, date, sql_table) -> "loaded" or the QA code that replaced it
    outcomes: dict[tuple[str, str, str], str] = field(default_factory=dict)

    @property
    def exit_status(self) -> int:
        return 1 if self.qa_error or self.failures else 0

    def count(self, records: Sequence[QaRecord]) -> None:
        for q in records:
            if q.severity == "error":
                self.qa_error += 1
            else:
                self.qa_warn += 1

    def to_dict(self) -> dict:
        return {
            "fetched": self.fetched,
            "extracted": self.extracted,
            "loaded": self.loaded,
            "qa_warn": self.qa_warn,
            "qa_error": self.qa_error,
            "stage_seconds": {k: round(v, 3) for k, v in self.stage_seconds.items()},
            "failures": self.failures,
            "exit_status": self.exit_status,
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Timer:
    def __init__(self, report: PipelineRunReport, stage: str):
        self.report, self.stage = report, stage

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        dt = time.perf_counter() - self.t0
        self.report.stage_seconds[self.stage] = self.report.stage_seconds.get(self.stage, 0.0) + dt


def _as_date(d) -> Date | None:
    if d is None or isinstance(d, Date):
        return d
    return Date.fromisoformat(d)


def _in_range(day: Date, date_range) -> bool:
    lo, hi = (_as_date(x) for x in date_range)
    return (lo is None or day >= lo) and (hi is None or day <= hi)


def local_bulletins(data_dir, state_code: str, date_range=(None, None)) -> list[tuple[Date, Path]]:
    folder = Path(data_dir) / "bulletins" / state_code
    found = []
    for path in sorted(folder.glob("*.pdf")):
        try:
            day = Date.fromisoformat(path.stem)
        except ValueError:
            log.warning("ignoring %s: file name is not an ISO date", path)
            continue
        if _in_range(day, date_range):
            found.append((day, path))
    return found


def bulletin_grids(path, config: PipelineConfig, hints_path=None) -> list:
    """Detected grids for every page of one bulletin, honoring sidecars."""
    path = Path(path)
    pages = load_pdf(path)
    ocr_tsv = path.with_suffix(".ocr.tsv")
    ocr_geom = path.with_suffix(".ocr.json")
    if ocr_tsv.exists() and ocr_geom.exists():
        geometry = OcrGeometry(**json.loads(ocr_geom.read_text(encoding="utf-8")))
        pages[0] = load_ocr_grid(ocr_tsv, geometry, config.min_ocr_conf, page_index=0)
    hints_path = Path(hints_path) if hints_path else path.with_suffix(".hints.jsonl")
    hints = load_region_hints(hints_path, pages) if hints_path.exists() else []
    grids = []
    for page in pages:
        page_hints = [h for h in hints if h.page_index == page.page_index]
        grids += detect_tables(page, page_hints, config.detect, config.heuristic_regions)
    return grids


def extract_bulletin(path, state_code: str, day, config: PipelineConfig, hints_path=None):
    """(record sets, QA records, ingested?) for one bulletin file."""
    from .fetcher import sha256_file

    day = day.isoformat() if isinstance(day, Date) else day
    version = schema_for_date(state_code, day, config.schema_dir)
    try:
        grids = bulletin_grids(path, config, hints_path)
    except IngestError as exc:
        qa = [
            QaRecord(state_code, day, t.sql_table, "error", "ingest_failed", f"{exc.reason}: {exc}")
            for t in version.tables
        ]
        return [], qa, False
    recordsets, qa = extract_records(grids, day, version, {"sha256": sha256_file(path)})
    return recordsets, qa, True


def load_recordsets(recordsets: Sequence[BulletinRecordSet], db_path) -> tuple[list[BulletinRecordSet], list[QaRecord]]:
    """Upsert each record set separately so one drifting table cannot block
    the rest; returns (loaded, QA for the rejected)."""
    loaded, qa = [], []
    for rs in recordsets:
        try:
            upsert([rs], db_path)
        except SchemaDriftError as exc:
            qa.append(QaRecord(rs.state_code, rs.date, rs.sql_table, "error", "schema_drift", str(exc)))
        else:
            loaded.append(rs)
    return loaded, qa


def _fetch_state(state_code, config, data_dir, date_range, session) -> int:
    src = config.states[state_code]
    if not src.listing_url:
        log.info("%s: no listing_url configured; using local bulletins only", state_code)
        return 0
    import requests

    session = session or requests.Session()
    html = _get(session, src.listing_url, config.fetch, time.sleep).decode("utf-8", errors="replace")
    refs = [r for r in discover(state_code, html, src.listing_url, src) if _in_range(r.date, date_range)]
    lpath = ledger_path(data_dir, state_code)
    downloaded, ledger = fetch_new(refs, Ledger.load(lpath), Path(data_dir) / "bulletins",
                                   session, config.fetch, ledger_file=lpath)
    ledger.save(lpath)
    return len(downloaded)


def run_pipeline(
    states: Sequence[str],
    date_range=(None, None),
    config: PipelineConfig | None = None,
    data_dir=".",
    fetch: bool = True,
    session=None,
    report_dir=None,
) -> PipelineRunReport:
    """Run every stage for ``states`` over bulletins dated within
    ``date_range`` (inclusive; either end may be None).

    Unknown states raise ConfigError before anything is written.  The SQL
    dump is rewritten at ``<data_dir>/covid_india.sql``; with ``report_dir``
    the static report pages are regenerated too.
    """
    config = config or load_config()
    states = list(states)
    for s in states:
        if s not in config.states:
            raise ConfigError(f"state {s} is not configured")
    all_tables = []
    for s in config.states:
        for version in load_schema_versions(s, config.schema_dir):
            all_tables += version.tables

    report = PipelineRunReport()
    if not states:
        return report
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    db_path = data_dir / DB_NAME
    init_db(db_path, all_tables)

    if fetch:
        with _Timer(report, "fetch"):
            for s in states:
                try:
                    report.fetched += _fetch_state(s, config, data_dir, date_range, session)
                except Exception as exc:
                    log.error("%s: fetch failed: %s", s, exc)
                    report.failures.append({"stage": "fetch", "state": s, "error": str(exc)})

    for s in states:
        for day, path in local_bulletins(data_dir, s, date_range):
            iso = day.isoformat()
            with _Timer(report, "extract"):
                try:
                    recordsets, qa, ingested = extract_bulletin(path, s, iso, config)
                except ConfigError as exc:
                    report.failures.append({"stage": "extract", "state": s, "date": iso, "error": str(exc)})
                    continue
            report.extracted += ingested
            with _Timer(report, "load"):
                clear_qa(db_path, s, iso)
                loaded, drift = load_recordsets(recordsets, db_path)
                qa += drift
                record_qa(qa, db_path)
            report.loaded += bool(loaded)
            report.count(qa)
            for rs in loaded:
                report.outcomes[(s, iso, rs.sql_table)] = "loaded"
            for q in qa:
                report.outcomes.setdefault((s, iso, q.sql_table), q.code)

    with _Timer(report, "analyze"):
        lo, hi = date_range
        for s in states:
            clear_qa(db_path, s, codes=ANALYTICS_CODES)
            qa: list[QaRecord] = []
            for metric in METRICS:
                compute_metric(db_path, s, metric, lo, hi, qa)
            unique = {q.key: q for q in qa}
            record_qa(unique.values(), db_path)
            report.count(unique.values())

    with _Timer(report, "dump"):
        dump_sql(db_path, data_dir / DUMP_NAME)

    if report_dir is not None:
        from .report import render_highlights

        with _Timer(report, "report"):
            render_highlights(db_path, report_dir)
    return report
