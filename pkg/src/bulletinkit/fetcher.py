"""Bulletin discovery and incremental download.

Each state's listing page is scanned for links matching a configured
pattern; the bulletin date is read from the link text or URL using the
state's date formats.  Downloads are recorded in a per-state ledger so that
a bulletin fetched successfully is never fetched again, while failed ones
are retried on the next run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field, replace
from datetime import date as Date, datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence
from urllib.parse import unquote, urljoin, urlparse

from .errors import ConfigError
from .qa import QaRecord

log = logging.getLogger(__name__)

REGISTERED_STATES = ("DL", "HR", "KA", "MH", "TG", "UK", "WB")
USER_AGENT = "bulletinkit/0.1 (+research data extraction; polite crawler)"
_FORMAT_PATTERNS = {
    "%d": r"\d{1,2}",
    "%m": r"\d{1,2}",
    "%Y": r"\d{4}",
    "%y": r"\d{2}",
    "%B": r"[A-Za-z]+",
    "%b": r"[A-Za-z]{3}",
}


@dataclass(frozen=True)
class StateSource:
    state_code: str
    listing_url: str | None = None
    link_pattern: str = r"\.pdf$"
    date_formats: tuple[str, ...] = ("%d-%m-%Y", "%d/%m/%Y", "%d.%m.%Y", "%d %B %Y")

    @classmethod
    def from_dict(cls, state_code: str, d: Mapping) -> StateSource:
        return cls(
            state_code=state_code,
            listing_url=d.get("listing_url"),
            link_pattern=d.get("link_pattern", cls.link_pattern),
            date_formats=tuple(d.get("date_formats", cls.date_formats)),
        )


@dataclass(frozen=True)
class BulletinRef:
    state_code: str
    date: Date
    url: str
    local_path: Path | None = None

    def __post_init__(self):
        if self.state_code not in REGISTERED_STATES:
            raise ValueError(f"unregistered state {self.state_code!r}")
        if not urlparse(self.url).scheme:
            raise ValueError(f"url must be absolute: {self.url!r}")


def _date_regex(fmt: str) -> re.Pattern:
    out, i = [], 0
    while i < len(fmt):
        token = fmt[i : i + 2]
        if token in _FORMAT_PATTERNS:
            out.append(_FORMAT_PATTERNS[token])
            i += 2
        else:
            out.append(re.escape(fmt[i]))
            i += 1
    return re.compile(r"(?<!\d)" + "".join(out) + r"(?!\d)")


def parse_date(text: str, formats: Sequence[str]) -> Date | None:
    """First date in ``text`` readable with one of ``formats`` (tried in order)."""
    for fmt in formats:
        for m in _date_regex(fmt).finditer(text):
            try:
                return datetime.strptime(m.group(), fmt).date()
            except ValueError:
                continue
    return None


def discover(state_code: str, listing_html: str, base_url: str, source: StateSource | None) -> list[BulletinRef]:
    """Bulletin links on a listing page, one per date, oldest first."""
    from bs4 import BeautifulSoup

    if source is None or not source.link_pattern:
        raise ConfigError(f"no link pattern configured for {state_code}")
    pattern = re.compile(source.link_pattern, re.IGNORECASE)
    soup = BeautifulSoup(listing_html, "html.parser")
    refs: dict[Date, BulletinRef] = {}
    for a in soup.find_all("a", href=True):
        href = a["href"].strip()
        text = " ".join(a.get_text(" ").split())
        if not (pattern.search(href) or pattern.search(text)):
            continue
        day = parse_date(text, source.date_formats) or parse_date(unquote(href), source.date_formats)
        if day is None:
            log.warning("%s: no date in link %r (%s); skipped", state_code, text, href)
            continue
        if day not in refs:
            refs[day] = BulletinRef(state_code, day, urljoin(base_url, href))
    return [refs[d] for d in sorted(refs)]


# ---------------------------------------------------------------------------
# Ledger
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerEntry:
    status: str
    sha256: str = ""
    fetched_at: str = ""
    url: str = ""

    def __post_init__(self):
        if self.status not in ("ok", "failed"):
            raise ValueError(f"bad ledger status {self.status!r}")
        if self.status == "ok" and not re.fullmatch(r"[0-9a-f]{64}", self.sha256):
            raise ValueError("ok entries need a lowercase sha256")


@dataclass
class Ledger:
    entries: dict[tuple[str, str], LedgerEntry] = field(default_factory=dict)

    def get(self, state_code: str, day) -> LedgerEntry | None:
        return self.entries.get((state_code, _iso(day)))

    def is_done(self, state_code: str, day) -> bool:
        entry = self.get(state_code, day)
        return entry is not None and entry.status == "ok"

    def with_entry(self, state_code: str, day, entry: LedgerEntry) -> Ledger:
        entries = dict(self.entries)
        entries[(state_code, _iso(day))] = entry
        return Ledger(entries)

    @staticmethod
    def _line(key, entry: LedgerEntry) -> str:
        rec = {"state_code": key[0], "date": key[1], **entry.__dict__}
        return json.dumps(rec, sort_keys=True)

    @classmethod
    def load(cls, path) -> Ledger:
        """Replay a ledger file; later lines win."""
        entries = {}
        path = Path(path)
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                key = (rec.pop("state_code"), rec.pop("date"))
                entries[key] = LedgerEntry(**rec)
        return cls(entries)

    def save(self, path) -> Path:
        """Rewrite ``path`` with one line per entry (compaction)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text("".join(self._line(k, self.entries[k]) + "\n" for k in sorted(self.entries)), encoding="utf-8")
        os.replace(tmp, path)
        return path

    def append(self, path, state_code: str, day, entry: LedgerEntry) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(self._line((state_code, _iso(day)), entry) + "\n")
            fh.flush()
            os.fsync(fh.fileno())


def _iso(day) -> str:
    return day.isoformat() if isinstance(day, Date) else str(day)


def ledger_path(data_dir, state_code: str) -> Path:
    return Path(data_dir) / "ledger" / f"{state_code}.log"


def bulletin_path(dest_dir, state_code: str, day) -> Path:
    return Path(dest_dir) / state_code / f"{_iso(day)}.pdf"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Download
# ---------------------------------------------------------------------------


@dataclass
class FetchPolicy:
    retries: int = 3
    backoff: float = 2.0
    delay: float = 1.0
    timeout: float = 60.0
    user_agent: str = USER_AGENT


def _utcnow() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def _get(session, url: str, policy: FetchPolicy, sleep) -> bytes:
    last = None
    for attempt in range(policy.retries):
        if attempt:
            sleep(policy.backoff * 2 ** (attempt - 1))
        try:
            resp = session.get(url, timeout=policy.timeout, headers={"User-Agent": policy.user_agent})
            resp.raise_for_status()
            return resp.content
        except Exception as exc:  # requests raises several unrelated types
            last = exc
            log.info("GET %s failed (attempt %d/%d): %s", url, attempt + 1, policy.retries, exc)
    raise last


def fetch_new(
    refs: Sequence[BulletinRef],
    ledger: Ledger,
    dest_dir,
    session=None,
    policy: FetchPolicy | None = None,
    ledger_file=None,
    sleep: Callable[[float], None] = time.sleep,
    clock: Callable[[], str] = _utcnow,
) -> tuple[list[BulletinRef], Ledger]:
    """Download every ref not yet recorded as ``ok``.

    Files land at ``dest_dir/<state>/<date>.pdf`` through a temporary file
    and an atomic rename.  A ref that still fails after the configured
    retries is recorded as ``failed`` and the remaining refs proceed.  When
    ``ledger_file`` is given each outcome is appended to it immediately.
    """
    import requests

    policy = policy or FetchPolicy()
    session = session or requests.Session()
    downloaded = []
    last_host = {}
    for ref in sorted(refs, key=lambda r: (r.state_code, r.date)):
        if ledger.is_done(ref.state_code, ref.date):
            continue
        host = urlparse(ref.url).netloc
        if host in last_host and policy.delay > 0:
            sleep(policy.delay)
        last_host[host] = True
        final = bulletin_path(dest_dir, ref.state_code, ref.date)
        try:
            body = _get(session, ref.url, policy, sleep)
        except Exception as exc:
            log.warning("%s %s: giving up after %d attempts: %s", ref.state_code, ref.date, policy.retries, exc)
            entry = LedgerEntry("failed", "", clock(), ref.url)
        else:
            final.parent.mkdir(parents=True, exist_ok=True)
            tmp = final.with_name(final.name + ".part")
            tmp.write_bytes(body)
            os.replace(tmp, final)
            entry = LedgerEntry("ok", hashlib.sha256(body).hexdigest(), clock(), ref.url)
            downloaded.append(replace(ref, local_path=final))
        ledger = ledger.with_entry(ref.state_code, ref.date, entry)
        if ledger_file is not None:
            ledger.append(ledger_file, ref.state_code, ref.date, entry)
    return downloaded, ledger


def verify(refs: Sequence[BulletinRef], ledger: Ledger, session=None, policy: FetchPolicy | None = None) -> list[QaRecord]:
    """Re-download ledgered bulletins and warn where the content changed."""
    import requests

    policy = policy or FetchPolicy()
    session = session or requests.Session()
    warnings = []
    for ref in refs:
        entry = ledger.get(ref.state_code, ref.date)
        if entry is None or entry.status != "ok":
            continue
        try:
            body = _get(session, ref.url, policy, time.sleep)
        except Exception:
            continue
        digest = hashlib.sha256(body).hexdigest()
        if digest != entry.sha256:
            warnings.append(
                QaRecord(ref.state_code, ref.date.isoformat(), "*", "warn", "hash_changed",
                         f"{entry.sha256[:12]} -> {digest[:12]}")
            )
    return warnings
