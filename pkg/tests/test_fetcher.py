from datetime import date

import pytest
import requests

from bulletinkit import fetcher
from bulletinkit.errors import ConfigError
from bulletinkit.fetcher import (
    BulletinRef, FetchPolicy, Ledger, LedgerEntry, StateSource, bulletin_path, discover, fetch_new, parse_date, verify,
)

from mockserver import BulletinSite

DL = StateSource("DL", link_pattern=r"\.pdf$", date_formats=("%d-%m-%Y", "%d/%m/%Y", "%d %B %Y"))
FAST = FetchPolicy(retries=3, backoff=2.0, delay=1.0, timeout=5.0)


def no_sleep(_):
    pass


def test_page_without_matching_links():
    assert discover("DL", '<a href="/about.html">About</a>', "http://x.gov.in/", DL) == []


def test_dated_links_become_refs():
    html = (
        '<a href="files/hb1.pdf">Health Bulletin 15-04-2021.pdf</a>'
        '<a href="files/hb2.pdf">Health Bulletin 16-04-2021.pdf</a>'
    )
    refs = discover("DL", html, "http://x.gov.in/covid/", DL)
    assert [r.date for r in refs] == [date(2021, 4, 15), date(2021, 4, 16)]
    assert refs[0].url == "http://x.gov.in/covid/files/hb1.pdf"


def test_duplicate_date_keeps_first_link():
    html = '<a href="/a.pdf">Bulletin 15-04-2021</a><a href="/b.pdf">Bulletin (revised) 15-04-2021</a>'
    (ref,) = discover("DL", html, "http://x.gov.in/", DL)
    assert ref.url.endswith("/a.pdf")


def test_dates_from_href_and_spelled_months():
    html = (
        '<a href="/docs/Bulletin%2017-04-2021.pdf">download</a>'
        '<a href="/docs/b.pdf">Bulletin 3 May 2021</a>'
        '<a href="/docs/c.pdf">Bulletin, undated</a>'
    )
    refs = discover("DL", html, "http://x.gov.in/", DL)
    assert [r.date for r in refs] == [date(2021, 4, 17), date(2021, 5, 3)]


def test_formats_are_tried_in_configured_order():
    assert parse_date("report 04/05/2021", ("%d/%m/%Y",)) == date(2021, 5, 4)
    assert parse_date("report 2021-13-45", ("%Y-%m-%d",)) is None


def test_missing_pattern_is_config_error():
    with pytest.raises(ConfigError):
        discover("DL", "<html></html>", "http://x.gov.in/", None)


def test_ref_invariants():
    with pytest.raises(ValueError):
        BulletinRef("XX", date(2021, 4, 1), "http://x/a.pdf")
    with pytest.raises(ValueError):
        BulletinRef("DL", date(2021, 4, 1), "/relative/a.pdf")


def test_ledger_entry_needs_hash_when_ok():
    with pytest.raises(ValueError):
        LedgerEntry("ok", "abc")
    with pytest.raises(ValueError):
        LedgerEntry("maybe")


def test_ledger_file_round_trip(tmp_path):
    ledger = Ledger().with_entry("DL", date(2021, 4, 15), LedgerEntry("ok", "a" * 64, "2021-04-15T10:00:00+00:00", "http://x/a.pdf"))
    ledger = ledger.with_entry("DL", "2021-04-16", LedgerEntry("failed", "", "2021-04-16T10:00:00+00:00"))
    path = ledger.save(tmp_path / "DL.log")
    assert Ledger.load(path) == ledger


def test_appended_lines_win_and_compaction_keeps_latest(tmp_path):
    path = tmp_path / "DL.log"
    ledger = Ledger()
    ledger.append(path, "DL", "2021-04-15", LedgerEntry("failed"))
    ledger.append(path, "DL", "2021-04-15", LedgerEntry("ok", "b" * 64))
    loaded = Ledger.load(path)
    assert loaded.is_done("DL", "2021-04-15")
    loaded.save(path)
    assert len(path.read_text().splitlines()) == 1


def refs_for(site, state, days):
    url = site.publish(state, days)
    return discover(state, requests.get(url, timeout=5).text, url, DL)


def test_fetch_skips_everything_already_ok(tmp_path):
    with BulletinSite() as site:
        refs = refs_for(site, "DL", ["2021-04-15"])
        first, ledger = fetch_new(refs, Ledger(), tmp_path, policy=FAST, sleep=no_sleep)
        again, ledger2 = fetch_new(refs, ledger, tmp_path, policy=FAST, sleep=no_sleep)
    assert len(first) == 1 and again == [] and ledger2 == ledger


def test_fetch_downloads_only_new_dates(tmp_path):
    with BulletinSite() as site:
        refs = refs_for(site, "DL", ["2021-04-15", "2021-04-16", "2021-04-17"])
        known = Ledger().with_entry("DL", "2021-04-15", LedgerEntry("ok", "c" * 64))
        got, ledger = fetch_new(refs, known, tmp_path, policy=FAST, sleep=no_sleep)
    assert [r.date.isoformat() for r in got] == ["2021-04-16", "2021-04-17"]
    assert sum(e.status == "ok" for e in ledger.entries.values()) == 3
    for r in got:
        assert r.local_path == bulletin_path(tmp_path, "DL", r.date)
        assert r.local_path.read_bytes().startswith(b"%PDF")
    assert not list(tmp_path.rglob("*.part"))


def test_failure_is_recorded_and_retried_later(tmp_path):
    sleeps = []
    with BulletinSite() as site:
        refs = refs_for(site, "DL", ["2021-04-15", "2021-04-16"])
        site.failing.add("/bulletins/DL/2021-04-16.pdf")
        got, ledger = fetch_new(refs, Ledger(), tmp_path, policy=FAST, sleep=sleeps.append)
        assert site.hits["/bulletins/DL/2021-04-16.pdf"] == 3
        assert [e.status for _, e in sorted(ledger.entries.items())] == ["ok", "failed"]
        site.failing.clear()
        got2, ledger = fetch_new(refs, ledger, tmp_path, policy=FAST, sleep=no_sleep)
        assert site.hits["/bulletins/DL/2021-04-15.pdf"] == 1
    assert [r.date.isoformat() for r in got2] == ["2021-04-16"]
    assert all(e.status == "ok" for e in ledger.entries.values())
    # one polite delay before the second request, then backoff 2 s and 4 s
    assert sleeps == [1.0, 2.0, 4.0]


def test_ledger_file_is_appended_as_we_go(tmp_path):
    lpath = tmp_path / "ledger" / "DL.log"
    with BulletinSite() as site:
        refs = refs_for(site, "DL", ["2021-04-15", "2021-04-16"])
        _, ledger = fetch_new(refs, Ledger(), tmp_path / "b", policy=FAST, ledger_file=lpath, sleep=no_sleep)
    assert Ledger.load(lpath) == ledger


def test_crash_before_rename_leaves_no_final_file(tmp_path, monkeypatch):
    def boom(src, dst):
        raise OSError("disk vanished")

    with BulletinSite() as site:
        refs = refs_for(site, "DL", ["2021-04-15"])
        monkeypatch.setattr(fetcher.os, "replace", boom)
        with pytest.raises(OSError):
            fetch_new(refs, Ledger(), tmp_path, policy=FAST, sleep=no_sleep)
    assert not bulletin_path(tmp_path, "DL", "2021-04-15").exists()


def test_verify_warns_on_republished_bulletin(tmp_path):
    with BulletinSite() as site:
        refs = refs_for(site, "DL", ["2021-04-15"])
        _, ledger = fetch_new(refs, Ledger(), tmp_path, policy=FAST, sleep=no_sleep)
        assert verify(refs, ledger, policy=FAST) == []
        site.routes["/bulletins/DL/2021-04-15.pdf"] = b"%PDF-1.4 corrected\n"
        (q,) = verify(refs, ledger, policy=FAST)
    assert (q.code, q.severity, q.date) == ("hash_changed", "warn", "2021-04-15")
