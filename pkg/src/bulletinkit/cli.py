"""Command-line entry point.

Stages can run one at a time (``fetch``, ``extract``, ``load``,
``analyze``, ``dump``, ``report``) or all together (``run``).  ``extract``
writes one JSON file per bulletin under ``<data-dir>/extracted`` which
``load`` then reads, so extraction can be inspected before loading.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from datetime import date as Date
from pathlib import Path

from .errors import BulletinError
from .qa import QaRecord
from .schema import BulletinRecordSet

log = logging.getLogger("bulletinkit")


def _date(s: str) -> Date:
    try:
        return Date.fromisoformat(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {s!r}")


def _states(args, config) -> list[str]:
    return args.state or sorted(config.states)


def _range(args):
    if getattr(args, "date", None):
        return (args.date, args.date)
    return (args.since, args.until)


def _extracted_path(data_dir, state, day) -> Path:
    return Path(data_dir) / "extracted" / state / f"{day}.json"


def _recordset_dict(rs: BulletinRecordSet) -> dict:
    return {
        "state_code": rs.state_code,
        "date": rs.date,
        "sql_table": rs.sql_table,
        "table_id": rs.table_id,
        "columns": list(rs.columns),
        "rows": [list(r) for r in rs.rows],
        "provenance": rs.provenance,
    }


def _recordset_from(d: dict) -> BulletinRecordSet:
    return BulletinRecordSet(d["state_code"], d["date"], d["sql_table"], tuple(d["columns"]),
                             [tuple(r) for r in d["rows"]], d["provenance"], d["table_id"])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_fetch(args, config) -> int:
    import requests

    from .fetcher import Ledger, discover, fetch_new, ledger_path, verify, _get

    session = requests.Session()
    status = 0
    for state in _states(args, config):
        src = config.states[state]
        if not src.listing_url:
            print(f"{state}: no listing_url configured, skipped")
            continue
        html = _get(session, src.listing_url, config.fetch, time.sleep).decode("utf-8", "replace")
        refs = [r for r in discover(state, html, src.listing_url, src)
                if (args.since is None or r.date >= args.since) and (args.until is None or r.date <= args.until)]
        lpath = ledger_path(args.data_dir, state)
        ledger = Ledger.load(lpath)
        if args.verify:
            for q in verify(refs, ledger, session, config.fetch):
                print(f"{q.severity} {q.code} {q.state_code} {q.date} {q.detail}")
            continue
        todo = [r for r in refs if not ledger.is_done(r.state_code, r.date)]
        if args.dry_run:
            for r in todo:
                print(f"{state} {r.date} {r.url}")
            continue
        downloaded, ledger = fetch_new(todo, ledger, Path(args.data_dir) / "bulletins", session,
                                       config.fetch, ledger_file=lpath)
        ledger.save(lpath)
        failed = len(todo) - len(downloaded)
        print(f"{state}: {len(downloaded)} downloaded, {failed} failed")
        status |= bool(failed)
    return status


def cmd_extract(args, config) -> int:
    from .pipeline import extract_bulletin, local_bulletins

    if args.pdf:
        if not (args.date and args.state and len(args.state) == 1):
            raise BulletinError("--pdf needs exactly one --state and a --date")
        jobs = [(args.state[0], args.date, Path(args.pdf))]
    else:
        jobs = [(s, d, p) for s in _states(args, config) for d, p in local_bulletins(args.data_dir, s, _range(args))]
    status = 0
    for state, day, path in jobs:
        recordsets, qa, _ = extract_bulletin(path, state, day, config, args.hints)
        out = _extracted_path(args.data_dir, state, day.isoformat())
        out.parent.mkdir(parents=True, exist_ok=True)
        doc = {"recordsets": [_recordset_dict(r) for r in recordsets], "qa": [q.to_dict() for q in qa]}
        out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        errors = sum(q.severity == "error" for q in qa)
        print(f"{state} {day}: {len(recordsets)} tables, {len(qa)} QA ({errors} errors)")
        status |= bool(errors)
    return status


def cmd_load(args, config) -> int:
    from .pipeline import load_recordsets
    from .schema import load_schema_versions
    from .store import DB_NAME, clear_qa, init_db, record_qa

    db = Path(args.data_dir) / DB_NAME
    init_db(db, [t for s in config.states for v in load_schema_versions(s, config.schema_dir) for t in v.tables])
    status = 0
    for state in _states(args, config):
        for path in sorted((Path(args.data_dir) / "extracted" / state).glob("*.json")):
            day = _date(path.stem)
            lo, hi = _range(args)
            if (lo and day < lo) or (hi and day > hi):
                continue
            doc = json.loads(path.read_text(encoding="utf-8"))
            qa = [QaRecord(**q) for q in doc["qa"]]
            clear_qa(db, state, day.isoformat())
            loaded, drift = load_recordsets([_recordset_from(d) for d in doc["recordsets"]], db)
            record_qa(qa + drift, db)
            print(f"{state} {day}: {len(loaded)} tables loaded")
            status |= any(q.severity == "error" for q in qa + drift)
    return int(status)


def cmd_analyze(args, config) -> int:
    from .analytics import compute_metric, series_to_csv
    from .store import DB_NAME, record_qa

    db = Path(args.data_dir) / DB_NAME
    qa: list[QaRecord] = []
    points = []
    for state in _states(args, config):
        points += compute_metric(db, state, args.metric, args.since, args.until, qa)
    text = series_to_csv(points)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    record_qa({q.key: q for q in qa}.values(), db)
    return 0


def cmd_dump(args, config) -> int:
    from .store import DB_NAME, DUMP_NAME, dump_sql

    out = dump_sql(Path(args.data_dir) / DB_NAME, args.out or Path(args.data_dir) / DUMP_NAME)
    print(out)
    return 0


def cmd_report(args, config) -> int:
    from .report import render_highlights
    from .store import DB_NAME

    out = args.out or Path(args.data_dir) / "report"
    for path in render_highlights(Path(args.data_dir) / DB_NAME, out, args.since, args.until):
        print(path)
    return 0


def cmd_run(args, config) -> int:
    from .pipeline import run_pipeline

    report = run_pipeline(_states(args, config), _range(args), config, args.data_dir,
                          fetch=not args.no_fetch, report_dir=args.report_dir)
    print(report.to_text())
    return report.exit_status


def cmd_validate(args, config) -> int:
    from .store import DB_NAME, list_qa

    records = []
    for state in _states(args, config):
        records += list_qa(Path(args.data_dir) / DB_NAME, state, args.severity)
    for q in records:
        print(f"{q.severity}\t{q.code}\t{q.state_code}\t{q.date}\t{q.sql_table}\t{q.detail}")
    return int(any(q.severity == "error" for q in records))


def cmd_forge(args, config) -> int:
    from .forge import forge_bulletins, forge_corpus

    if args.bulletins:
        truth = forge_bulletins(args.out, tuple(args.state or ("DL", "WB")), args.start, args.days, args.seed)
        print(f"{len(truth)} bulletins written under {Path(args.out) / 'bulletins'}")
    else:
        written = forge_corpus(args.out, args.count, args.seed)
        print(f"{len(written)} fixtures written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .analytics import METRICS

    p = argparse.ArgumentParser(prog="bulletinkit", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config file (default: packaged config)")
    p.add_argument("--data-dir", default="data", help="working directory for bulletins, ledger and database")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def with_scope(sp):
        sp.add_argument("--state", action="append", help="state code (repeatable; default: all configured)")
        sp.add_argument("--since", type=_date)
        sp.add_argument("--until", type=_date)
        sp.add_argument("--date", type=_date, help="a single bulletin date (overrides --since/--until)")
        return sp

    sp = with_scope(sub.add_parser("fetch", help="discover and download new bulletins"))
    sp.add_argument("--dry-run", action="store_true", help="list what would be downloaded")
    sp.add_argument("--verify", action="store_true", help="re-download and warn on changed content")
    sp.set_defaults(func=cmd_fetch)

    sp = with_scope(sub.add_parser("extract", help="detect tables and apply schemas"))
    sp.add_argument("--pdf", help="extract this file instead of the stored bulletins")
    sp.add_argument("--hints", help="region hints (JSON lines) for --pdf")
    sp.set_defaults(func=cmd_extract)

    sp = with_scope(sub.add_parser("load", help="load extracted records into the database"))
    sp.set_defaults(func=cmd_load)

    sp = with_scope(sub.add_parser("analyze", help="compute a metric series as CSV"))
    sp.add_argument("--metric", choices=METRICS, required=True)
    sp.add_argument("--out", help="CSV file (default: stdout)")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("dump", help="write the canonical SQL dump")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dump)

    sp = sub.add_parser("report", help="render charts and HTML pages")
    sp.add_argument("--out")
    sp.add_argument("--since", type=_date)
    sp.add_argument("--until", type=_date)
    sp.set_defaults(func=cmd_report)

    sp = with_scope(sub.add_parser("run", help="fetch, extract, load, analyze and dump"))
    sp.add_argument("--no-fetch", action="store_true", help="use local bulletins only")
    sp.add_argument("--report-dir", help="also render the report here")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("validate", help="list QA records")
    sp.add_argument("--state", action="append")
    sp.add_argument("--severity", choices=("warn", "error"))
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("forge", help="generate synthetic fixtures")
    sp.add_argument("--count", type=int, default=200)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", default="fixtures")
    sp.add_argument("--bulletins", action="store_true", help="whole bulletins in <out>/bulletins instead of tables")
    sp.add_argument("--state", action="append")
    sp.add_argument("--start", default="2021-04-12")
    sp.add_argument("--days", type=int, default=5)
    sp.set_defaults(func=cmd_forge)
    return p


def main(argv=None) -> int:
    from .pipeline import load_config

    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        for s in getattr(args, "state", None) or []:
            if s not in config.states:
                raise BulletinError(f"state {s} is not configured")
        return args.func(args, config)
    except BulletinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
