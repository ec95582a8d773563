"""Adapters from external artifacts to :class:`PageModel` and region hints.

Three inputs are supported:

* PDF files, read through pdfplumber (pdfminer.six underneath).  Words
  become text runs, stroked segments and thin rectangles become ruling
  lines.
* OCR word grids: the 12-column tab-separated output of an OCR engine
  (``level page_num block_num par_num line_num word_num left top width
  height conf text``).  Pixel geometry is converted to points using an
  explicit :class:`OcrGeometry`; there is no DPI guessing.
* Region hint files: JSON lines, one ``{page_index, x0, y0, x1, y1,
  confidence, origin}`` object per line, coordinates already in PDF points
  with a top-left origin.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

from .errors import IngestError
from .geometry import BBox, PageModel, RulingLine, TextRun

log = logging.getLogger(__name__)

MIN_RULE_LENGTH = 8.0
MAX_RULE_THICKNESS = 3.0
DEFAULT_MIN_CONF = 50.0
GRID_COLUMNS = (
    "level", "page_num", "block_num", "par_num", "line_num", "word_num",
    "left", "top", "width", "height", "conf", "text",
)


@dataclass(frozen=True)
class RegionHint:
    page_index: int
    region: BBox
    confidence: float = 1.0
    origin: Literal["external", "heuristic"] = "external"


@dataclass(frozen=True)
class OcrWord:
    page_index: int
    left: int
    top: int
    width: int
    height: int
    conf: float
    text: str


@dataclass(frozen=True)
class OcrGeometry:
    width_px: float
    height_px: float
    width_pt: float
    height_pt: float

    @property
    def scale(self) -> tuple[float, float]:
        return self.width_pt / self.width_px, self.height_pt / self.height_px


# ---------------------------------------------------------------------------
# PDF
# ---------------------------------------------------------------------------


def _clip_box(x0, y0, x1, y1, width, height) -> BBox:
    x0, x1 = min(max(x0, 0.0), width), min(max(x1, 0.0), width)
    y0, y1 = min(max(y0, 0.0), height), min(max(y1, 0.0), height)
    return BBox(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))


def _rule(axis, position, a, b, thickness) -> RulingLine | None:
    start, end = min(a, b), max(a, b)
    thickness = thickness if thickness and thickness > 0 else 0.5
    if end - start < MIN_RULE_LENGTH or thickness > MAX_RULE_THICKNESS:
        return None
    return RulingLine(axis, position, start, end, thickness)


def _page_rules(page) -> list[RulingLine]:
    rules = []
    for ln in page.lines:
        width = ln.get("linewidth", 0.5)
        if abs(ln["bottom"] - ln["top"]) < 1e-6:
            rules.append(_rule("horizontal", ln["top"], ln["x0"], ln["x1"], width))
        elif abs(ln["x1"] - ln["x0"]) < 1e-6:
            rules.append(_rule("vertical", ln["x0"], ln["top"], ln["bottom"], width))
    for rc in page.rects:
        w, h = rc["x1"] - rc["x0"], rc["bottom"] - rc["top"]
        if h <= MAX_RULE_THICKNESS and w >= MIN_RULE_LENGTH:
            rules.append(_rule("horizontal", (rc["top"] + rc["bottom"]) / 2, rc["x0"], rc["x1"], h or rc.get("linewidth")))
        elif w <= MAX_RULE_THICKNESS and h >= MIN_RULE_LENGTH:
            rules.append(_rule("vertical", (rc["x0"] + rc["x1"]) / 2, rc["top"], rc["bottom"], w or rc.get("linewidth")))
        elif rc.get("stroke"):
            lw = rc.get("linewidth", 0.5)
            rules.append(_rule("horizontal", rc["top"], rc["x0"], rc["x1"], lw))
            rules.append(_rule("horizontal", rc["bottom"], rc["x0"], rc["x1"], lw))
            rules.append(_rule("vertical", rc["x0"], rc["top"], rc["bottom"], lw))
            rules.append(_rule("vertical", rc["x1"], rc["top"], rc["bottom"], lw))
    return [r for r in rules if r is not None]


def load_pdf(path) -> list[PageModel]:
    """Read every page of a PDF into a :class:`PageModel`.

    Runs are whitespace-separated words with confidence 1.0.  Straight
    segments at least 8 pt long and at most 3 pt thick become ruling lines.
    """
    import pdfplumber
    from pdfminer.pdfdocument import PDFEncryptionError, PDFPasswordIncorrect

    path = Path(path)
    if not path.is_file():
        raise IngestError("corrupt", f"{path} does not exist")
    try:
        pdf = pdfplumber.open(path)
    except Exception as exc:  # pdfminer raises a zoo of parser errors
        cause = exc.__cause__ or exc.__context__ or exc
        if isinstance(exc, (PDFPasswordIncorrect, PDFEncryptionError)) or isinstance(
            cause, (PDFPasswordIncorrect, PDFEncryptionError)
        ):
            raise IngestError("encrypted", str(path)) from exc
        raise IngestError("corrupt", f"{path}: {exc}") from exc
    pages = []
    try:
        if getattr(pdf.doc, "encryption", None):
            raise IngestError("encrypted", str(path))
        for index, page in enumerate(pdf.pages):
            width, height = float(page.width), float(page.height)
            runs = []
            for w in page.extract_words(keep_blank_chars=False, use_text_flow=False):
                text = w["text"].strip()
                if text:
                    runs.append(TextRun(_clip_box(w["x0"], w["top"], w["x1"], w["bottom"], width, height), text))
            lines = [
                r for r in _page_rules(page)
                if r.position <= (height if r.axis == "horizontal" else width) and r.start >= 0
            ]
            pages.append(PageModel(index, width, height, tuple(runs), tuple(lines)))
    except IngestError:
        raise
    except Exception as exc:
        raise IngestError("corrupt", f"{path}: {exc}") from exc
    finally:
        pdf.close()
    return pages


# ---------------------------------------------------------------------------
# OCR word grid
# ---------------------------------------------------------------------------


def read_ocr_words(path) -> list[OcrWord]:
    """Parse a word-grid TSV into :class:`OcrWord` rows (structural rows included)."""
    words = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1 and [c.strip().lower() for c in row[:11]] == list(GRID_COLUMNS[:11]):
                continue
            if not row or row == [""]:
                continue
            if len(row) == 11:
                row = row + [""]
            if len(row) != 12:
                raise IngestError("bad_grid_row", f"expected 12 columns, got {len(row)}", line=lineno)
            try:
                page_num = int(row[1])
                left, top, width, height = (int(float(v)) for v in row[6:10])
                conf = float(row[10])
            except ValueError as exc:
                raise IngestError("bad_grid_row", str(exc), line=lineno) from exc
            text = row[11].strip()
            if text and (width <= 0 or height <= 0) and conf >= 0:
                raise IngestError("bad_grid_row", "word with empty box", line=lineno)
            words.append(OcrWord(max(page_num - 1, 0), left, top, width, height, conf, text))
    return words


def load_ocr_grid(
    path,
    geometry: OcrGeometry,
    min_conf: float = DEFAULT_MIN_CONF,
    page_index: int = 0,
) -> PageModel:
    """Turn one page of an OCR word grid into a :class:`PageModel`.

    Rows with ``conf == -1`` describe blocks and lines, not words, and are
    skipped; so are words below ``min_conf`` (engine percentage scale).
    """
    sx, sy = geometry.scale
    runs = []
    for w in read_ocr_words(path):
        if w.page_index != page_index or not w.text or w.conf < 0 or w.conf < min_conf:
            continue
        box = _clip_box(
            w.left * sx, w.top * sy, (w.left + w.width) * sx, (w.top + w.height) * sy,
            geometry.width_pt, geometry.height_pt,
        )
        runs.append(TextRun(box, w.text, min(w.conf / 100.0, 1.0)))
    return PageModel(page_index, geometry.width_pt, geometry.height_pt, tuple(runs), (), source="ocr")


# ---------------------------------------------------------------------------
# Region hints
# ---------------------------------------------------------------------------


def _page_sizes(pages) -> list[tuple[float, float]] | None:
    if pages is None:
        return None
    return [(p.width, p.height) if isinstance(p, PageModel) else (float(p[0]), float(p[1])) for p in pages]


def load_region_hints(path, pages: Sequence[PageModel] | Sequence[tuple[float, float]] | None = None) -> list[RegionHint]:
    """Read a JSON-lines hint file, clamp each box to its page, and sort by
    (page_index, y0, x0).  ``pages`` supplies page sizes; without it only
    negative coordinates are clamped and page indices are not checked."""
    sizes = _page_sizes(pages)
    hints = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                page_index = int(rec["page_index"])
                x0, y0, x1, y1 = (float(rec[k]) for k in ("x0", "y0", "x1", "y1"))
                conf = float(rec.get("confidence", 1.0))
                origin = rec.get("origin", "external")
            except (ValueError, KeyError, TypeError) as exc:
                raise IngestError("bad_hint", str(exc), line=lineno) from exc
            if x1 < x0 or y1 < y0 or not 0 <= conf <= 1 or origin not in ("external", "heuristic"):
                raise IngestError("bad_hint", "invalid box, confidence or origin", line=lineno)
            if sizes is not None and not 0 <= page_index < len(sizes):
                raise IngestError("bad_hint", f"page_index {page_index} out of range", line=lineno)
            width, height = sizes[page_index] if sizes is not None else (float("inf"), float("inf"))
            if page_index < 0:
                raise IngestError("bad_hint", "negative page_index", line=lineno)
            box = BBox(
                min(max(x0, 0.0), width), min(max(y0, 0.0), height),
                min(max(x1, 0.0), width), min(max(y1, 0.0), height),
            )
            hints.append(RegionHint(page_index, box, conf, origin))
    hints.sort(key=lambda h: (h.page_index, h.region.y0, h.region.x0))
    return hints


def save_region_hints(hints: Sequence[RegionHint], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for h in hints:
            rec = {
                "page_index": h.page_index,
                "x0": h.region.x0,
                "y0": h.region.y0,
                "x1": h.region.x1,
                "y1": h.region.y1,
                "confidence": h.confidence,
                "origin": h.origin,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path
