"""Synthetic bulletin pages with ground-truth manifests.

Every table produced here comes with a :class:`TableManifest` recording what
a perfect detector should return, so detector tests compare against the
generator rather than against hand-written expectations.

Randomness comes from :func:`numpy.random.default_rng` (PCG64) seeded with
the caller's integer, so a seed reproduces the same corpus everywhere.

Text is set in Courier, where every glyph advances 0.6 em and the glyph box
spans ``size`` points starting 0.194 em below the baseline; this is what a
PDF reader reports for the standard Courier metrics, which makes rendered
fixtures round-trip through :func:`bulletinkit.ingest.load_pdf` exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import GenError
from .geometry import BBox, PageModel, RulingLine, TableGrid, TextRun, union_all
from .ingest import RegionHint

CHAR_WIDTH = 0.6
DESCENT = 0.194
FONT_SIZE = 8.0
MAX_ROWS = 30
MAX_COLS = 12
SNAP_TOL = 2.0

WORDS = [
    "Delhi", "Howrah", "Kolkata", "Nadia", "Pune", "Thane", "Mysuru", "Udupi", "Dehradun",
    "Haridwar", "Gurugram", "Karnal", "Nagpur", "Malda", "Bankura", "Hooghly", "Jalpaiguri",
    "Active", "Cured", "Deaths", "Tests", "Beds", "Vacant", "ICU", "Ventilator", "Oxygen",
    "Home", "Isolation", "Samples", "Positive", "Negative", "Doses", "Total", "Male", "Female",
]
HEADER_WORDS = [
    "Total", "Active", "Cases", "New", "Deaths", "Tests", "RT-PCR", "RAT", "Beds", "Occupied",
    "Vacant", "District", "Cumulative", "Today", "Doses", "First", "Second", "Recovered", "Age",
]


def text_width(text: str, size: float = FONT_SIZE) -> float:
    return len(text) * CHAR_WIDTH * size


def word_runs(text: str, x: float, top: float, size: float = FONT_SIZE) -> list[TextRun]:
    """Word-level runs for ``text`` set left-aligned at (x, top)."""
    runs = []
    for word in text.split(" "):
        if word:
            runs.append(TextRun(BBox(x, top, x + text_width(word, size), top + size), word))
        x += text_width(word + " ", size)
    return runs


def indian_grouping(n: int) -> str:
    """Format an integer with lakh/crore comma grouping: 123456 -> 1,23,456."""
    s = str(abs(n))
    if len(s) > 3:
        head, tail = s[:-3], s[-3:]
        parts = []
        while len(head) > 2:
            parts.insert(0, head[-2:])
            head = head[:-2]
        if head:
            parts.insert(0, head)
        s = ",".join(parts + [tail])
    return ("-" if n < 0 else "") + s


@dataclass
class TableManifest:
    region: BBox
    ruled: bool
    n_rows: int
    n_cols: int
    # anchor-cell texts in row-major order; positions covered by a span are skipped
    cell_texts: list[str]
    gutters: list[float]
    spans: list[tuple[int, int, int, int]] = field(default_factory=list)
    cell_boxes: list[BBox] = field(default_factory=list)

    def anchors(self) -> list[tuple[int, int]]:
        covered = set()
        for r, c, rs, cs in self.spans:
            covered.update((i, j) for i in range(r, r + rs) for j in range(c, c + cs) if (i, j) != (r, c))
        return [(i, j) for i in range(self.n_rows) for j in range(self.n_cols) if (i, j) not in covered]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["region"] = list(asdict(self.region).values())
        d["cell_boxes"] = [list(asdict(b).values()) for b in self.cell_boxes]
        d["spans"] = [list(s) for s in self.spans]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> TableManifest:
        return cls(
            region=BBox(*d["region"]),
            ruled=d["ruled"],
            n_rows=d["n_rows"],
            n_cols=d["n_cols"],
            cell_texts=list(d["cell_texts"]),
            gutters=list(d["gutters"]),
            spans=[tuple(s) for s in d.get("spans", [])],
            cell_boxes=[BBox(*b) for b in d.get("cell_boxes", [])],
        )


def grid_matches(grid: TableGrid, manifest: TableManifest) -> bool:
    if (grid.n_rows, grid.n_cols) != (manifest.n_rows, manifest.n_cols):
        return False
    if grid.spans != sorted(tuple(s) for s in manifest.spans):
        return False
    texts = {(c.row, c.col): c.text for c in grid.cells}
    return [texts.get(a) for a in manifest.anchors()] == manifest.cell_texts


def reparse_by_containment(runs: list[TextRun], manifest: TableManifest) -> list[str]:
    """Brute-force oracle: give every run to the manifest cell box that
    fully contains it, then read each cell line by line."""
    eps = 1e-6  # word advances are summed, so edges can drift by a few ulps
    texts = []
    for box in manifest.cell_boxes:
        inside = [
            r for r in runs
            if box.x0 - eps <= r.bbox.x0 and r.bbox.x1 <= box.x1 + eps
            and box.y0 - eps <= r.bbox.y0 and r.bbox.y1 <= box.y1 + eps
        ]
        inside.sort(key=lambda r: (round(r.bbox.y0, 6), r.bbox.x0))
        texts.append(" ".join(r.text for r in inside))
    return texts


@dataclass(frozen=True)
class TableConstraints:
    ruled: bool = False
    rows: int | None = None
    cols: int | None = None
    min_rows: int = 2
    max_rows: int = 12
    min_cols: int = 2
    max_cols: int = 8
    min_gutter: float = 6.0
    max_gutter: float = 20.0
    max_spans: int = 0
    dashed: bool = False
    font_size: float = FONT_SIZE
    origin: tuple[float, float] = (36.0, 36.0)
    margin: float = 36.0


def _check(c: TableConstraints) -> None:
    rows_hi = c.rows if c.rows is not None else c.max_rows
    cols_hi = c.cols if c.cols is not None else c.max_cols
    rows_lo = c.rows if c.rows is not None else c.min_rows
    cols_lo = c.cols if c.cols is not None else c.min_cols
    if not 2 <= rows_lo <= rows_hi <= MAX_ROWS:
        raise GenError(f"rows must lie in [2, {MAX_ROWS}]")
    if not 2 <= cols_lo <= cols_hi <= MAX_COLS:
        raise GenError(f"cols must lie in [2, {MAX_COLS}]")
    if c.min_gutter <= CHAR_WIDTH * c.font_size or c.min_gutter > c.max_gutter:
        raise GenError("gutter floor must exceed one space width and not exceed max_gutter")
    if c.max_spans < 0 or c.font_size <= 0:
        raise GenError("bad span count or font size")


def _dims(rng, c: TableConstraints) -> tuple[int, int]:
    rows = c.rows if c.rows is not None else int(rng.integers(c.min_rows, c.max_rows + 1))
    cols = c.cols if c.cols is not None else int(rng.integers(c.min_cols, c.max_cols + 1))
    return rows, cols


def _token(rng) -> str:
    kind = rng.integers(0, 4)
    if kind == 0:
        return str(WORDS[rng.integers(len(WORDS))])
    if kind == 1:
        return indian_grouping(int(rng.integers(0, 10 ** int(rng.integers(1, 8)))))
    if kind == 2:
        return f"{rng.integers(0, 100)}.{rng.integers(0, 10)}%"
    return str(int(rng.integers(0, 1000)))


def _header(rng) -> str:
    n = int(rng.integers(1, 3))
    return " ".join(str(HEADER_WORDS[k]) for k in rng.choice(len(HEADER_WORDS), n, replace=False))


def _page(runs, lines, c: TableConstraints, region: BBox) -> PageModel:
    return PageModel(0, region.x1 + c.margin, region.y1 + c.margin, tuple(runs), tuple(lines))


def gen_table(seed: int, constraints: TableConstraints | None = None) -> tuple[PageModel, TableManifest]:
    """One synthetic table on an otherwise empty page.

    Unruled tables hold single-token data cells under a one- or two-word
    header row, columns left-aligned and separated by the drawn gutters.
    Ruled tables draw every cell edge as its own stroke (optionally dashed),
    leaving out the edges inside declared spans.
    """
    c = constraints or TableConstraints()
    _check(c)
    rng = np.random.default_rng(seed)
    if c.ruled:
        return _gen_ruled(rng, c)
    return _gen_unruled(rng, c)


def _gen_unruled(rng, c: TableConstraints) -> tuple[PageModel, TableManifest]:
    rows, cols = _dims(rng, c)
    size = c.font_size
    texts = [[_header(rng) for _ in range(cols)]]
    texts += [[_token(rng) for _ in range(cols)] for _ in range(rows - 1)]
    widths = [max(text_width(texts[r][k], size) for r in range(rows)) for k in range(cols)]
    gutters = [float(np.round(rng.uniform(c.min_gutter, c.max_gutter) * 2) / 2) for _ in range(cols - 1)]
    gutters = [max(g, c.min_gutter) for g in gutters]
    x0, top = c.origin
    xs = [x0]
    for k in range(cols - 1):
        xs.append(xs[-1] + widths[k] + gutters[k])
    runs, boxes = [], []
    y = top
    for r in range(rows):
        for k in range(cols):
            runs += word_runs(texts[r][k], xs[k], y, size)
            boxes.append(BBox(xs[k], y, xs[k] + widths[k], y + size))
        y += size + float(rng.uniform(2.0, 6.0))
    region = union_all(rr.bbox for rr in runs)
    manifest = TableManifest(region, False, rows, cols, [t for row in texts for t in row], gutters, [], boxes)
    return _page(runs, [], c, region), manifest


def _pick_spans(rng, rows, cols, max_spans) -> list[tuple[int, int, int, int]]:
    for _ in range(50):
        spans, used = [], set()
        for _ in range(int(rng.integers(0, max_spans + 1))):
            rs, cs = int(rng.integers(1, 3)), int(rng.integers(1, 4))
            if rs == cs == 1:
                cs = 2
            if rs > rows or cs > cols:
                continue
            r, k = int(rng.integers(0, rows - rs + 1)), int(rng.integers(0, cols - cs + 1))
            cells = {(i, j) for i in range(r, r + rs) for j in range(k, k + cs)}
            if cells & used:
                continue
            used |= cells
            spans.append((r, k, rs, cs))
        if _spans_keep_every_rule(spans, rows, cols):
            return sorted(spans)
    return []


def _interior(spans, i, j, axis) -> bool:
    """Whether the edge is hidden by a span: for axis 'v', the rule left of
    column j in row i; for 'h', the rule above row i in column j."""
    for r, k, rs, cs in spans:
        if axis == "v" and r <= i < r + rs and k < j < k + cs:
            return True
        if axis == "h" and k <= j < k + cs and r < i < r + rs:
            return True
    return False


def _spans_keep_every_rule(spans, rows, cols) -> bool:
    for j in range(1, cols):
        if all(_interior(spans, i, j, "v") for i in range(rows)):
            return False
    for i in range(1, rows):
        if all(_interior(spans, i, j, "h") for j in range(cols)):
            return False
    return True


def _stroke(rng, axis, position, start, end, dashed) -> list[RulingLine]:
    if not dashed or end - start < 12:
        return [RulingLine(axis, position, start, end, 0.5)]
    out, a = [], start
    while a < end:
        b = min(a + float(rng.uniform(3.0, 6.0)), end)
        if end - b < 1.0:
            b = end
        out.append(RulingLine(axis, position, a, b, 0.5))
        a = b + 2.0
    return out


def _gen_ruled(rng, c: TableConstraints) -> tuple[PageModel, TableManifest]:
    rows, cols = _dims(rng, c)
    size = c.font_size
    spans = _pick_spans(rng, rows, cols, c.max_spans)
    manifest = TableManifest(BBox(0, 0, 0, 0), True, rows, cols, [], [], spans, [])
    anchors = manifest.anchors()
    span_of = {(r, k): (rs, cs) for r, k, rs, cs in spans}
    texts = {}
    for r, k in anchors:
        texts[(r, k)] = _header(rng) if r == 0 else " ".join(_token(rng) for _ in range(int(rng.integers(1, 3))))
    pad = float(rng.uniform(2.0, 5.0))
    widths = [12.0] * cols
    for (r, k), t in texts.items():
        if span_of.get((r, k), (1, 1))[1] == 1:
            widths[k] = max(widths[k], text_width(t, size) + 2 * pad)
    for (r, k), (rs, cs) in span_of.items():
        need = text_width(texts[(r, k)], size) + 2 * pad - sum(widths[k : k + cs])
        if need > 0:
            widths[k] += need
    x0, top = c.origin
    xs = [x0]
    for w in widths:
        xs.append(xs[-1] + w)
    row_h = size + 2 * pad
    ys = [top + i * row_h for i in range(rows + 1)]

    lines = []
    for i in range(rows + 1):
        for j in range(cols):
            if not _interior(spans, i, j, "h"):
                lines += _stroke(rng, "horizontal", ys[i], xs[j], xs[j + 1], c.dashed)
    for j in range(cols + 1):
        for i in range(rows):
            if not _interior(spans, i, j, "v"):
                lines += _stroke(rng, "vertical", xs[j], ys[i], ys[i + 1], c.dashed)

    runs, boxes = [], []
    for r, k in anchors:
        rs, cs = span_of.get((r, k), (1, 1))
        runs += word_runs(texts[(r, k)], xs[k] + pad, ys[r] + pad, size)
        boxes.append(BBox(xs[k], ys[r], xs[k + cs], ys[r + rs]))
    region = BBox(xs[0], ys[0], xs[-1], ys[-1])
    manifest = replace(manifest, region=region, cell_texts=[texts[a] for a in anchors], cell_boxes=boxes)
    return _page(runs, lines, c, region), manifest


def translate_page(page: PageModel, dx: float, dy: float) -> PageModel:
    return PageModel(
        page.page_index,
        page.width + dx,
        page.height + dy,
        tuple(r.translated(dx, dy) for r in page.runs),
        tuple(l.translated(dx, dy) for l in page.lines),
        page.source,
    )


def place(page: PageModel, manifest: TableManifest, dx: float, dy: float):
    """Shift a generated fragment by (dx, dy), returning runs, lines, manifest."""
    runs = [r.translated(dx, dy) for r in page.runs]
    lines = [l.translated(dx, dy) for l in page.lines]
    moved = replace(
        manifest,
        region=manifest.region.translated(dx, dy),
        cell_boxes=[b.translated(dx, dy) for b in manifest.cell_boxes],
    )
    return runs, lines, moved


def gen_page_appendix_a2(seed: int) -> tuple[PageModel, list[TableManifest], list[RegionHint]]:
    """Eight small unruled tables packed in two stacks of four.

    Vertical gaps between neighbouring tables stay below the stream
    detector's block gap, so whole-page detection fuses them; the returned
    hints box each table exactly (2 pt padding).
    """
    rng = np.random.default_rng(seed)
    width, height = 612.0, 792.0
    runs, manifests = [], []
    title = word_runs("Daily Health Bulletin - Summary Tables", 36.0, 30.0, 10.0)
    runs += title
    stack_x = [36.0, 320.0]
    hints = []
    for col, x in enumerate(stack_x):
        y = 72.0
        for _ in range(4):
            c = TableConstraints(
                min_rows=3, max_rows=5, min_cols=2, max_cols=3, min_gutter=8.0, max_gutter=14.0, origin=(0.0, 0.0)
            )
            frag, man = gen_table(int(rng.integers(0, 2**63 - 1)), c)
            if man.region.x1 - man.region.x0 > 250:
                frag, man = gen_table(
                    int(rng.integers(0, 2**63 - 1)), replace(c, max_cols=2)
                )
            fr, _, moved = place(frag, man, x - man.region.x0, y - man.region.y0)
            runs += fr
            manifests.append(moved)
            y = moved.region.y1 + float(rng.uniform(8.0, 14.0))
    for man in manifests:
        r = man.region
        box = BBox(max(r.x0 - 2, 0), max(r.y0 - 2, 0), min(r.x1 + 2, width), min(r.y1 + 2, height))
        hints.append(RegionHint(0, box, 0.95, "external"))
    order = sorted(range(8), key=lambda k: (manifests[k].region.y0, manifests[k].region.x0))
    manifests = [manifests[k] for k in order]
    hints = [hints[k] for k in order]
    return PageModel(0, width, height, tuple(runs), ()), manifests, hints


# ---------------------------------------------------------------------------
# PDF emission
# ---------------------------------------------------------------------------


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-0") else "0"


def _pdf_string(text: str) -> str:
    return "(" + text.replace("\\", "\\\\").replace("(", "\\(").replace(")", "\\)") + ")"


def page_content(page: PageModel) -> bytes:
    h = page.height
    ops = []
    for line in page.lines:
        ops.append(f"{_num(line.thickness)} w")
        if line.axis == "horizontal":
            y = _num(h - line.position)
            ops.append(f"{_num(line.start)} {y} m {_num(line.end)} {y} l S")
        else:
            x = _num(line.position)
            ops.append(f"{x} {_num(h - line.start)} m {x} {_num(h - line.end)} l S")
    for run in page.runs:
        size = run.bbox.height
        baseline = h - (run.bbox.y1 - DESCENT * size)
        ops.append(f"BT /F1 {_num(size)} Tf 1 0 0 1 {_num(run.bbox.x0)} {_num(baseline)} Tm {_pdf_string(run.text)} Tj ET")
    return ("\n".join(ops) + "\n").encode("latin-1")


def write_pdf(pages: list[PageModel], path, encrypt_stub: bool = False) -> Path:
    """Write ``pages`` as a minimal uncompressed PDF using Courier text and
    stroked line segments only."""
    objects: list[bytes] = []

    def add(body: bytes) -> int:
        objects.append(body)
        return len(objects)

    catalog = add(b"")
    pages_id = add(b"")
    font = add(b"<< /Type /Font /Subtype /Type1 /BaseFont /Courier /Encoding /WinAnsiEncoding >>")
    kids = []
    for page in pages:
        content = page_content(page)
        stream = add(b"<< /Length %d >>\nstream\n" % len(content) + content + b"endstream")
        kids.append(
            add(
                (
                    f"<< /Type /Page /Parent {pages_id} 0 R /MediaBox [0 0 {_num(page.width)} {_num(page.height)}] "
                    f"/Resources << /Font << /F1 {font} 0 R >> >> /Contents {stream} 0 R >>"
                ).encode()
            )
        )
    objects[catalog - 1] = f"<< /Type /Catalog /Pages {pages_id} 0 R >>".encode()
    objects[pages_id - 1] = (
        f"<< /Type /Pages /Kids [{' '.join(f'{k} 0 R' for k in kids)}] /Count {len(kids)} >>".encode()
    )
    encrypt = None
    if encrypt_stub:
        encrypt = add(
            b"<< /Filter /Standard /V 1 /R 2 /Length 40 /P -4 "
            b"/O <" + b"11" * 32 + b"> /U <" + b"22" * 32 + b"> >>"
        )

    out = bytearray(b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n")
    offsets = []
    for i, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += f"{i} 0 obj\n".encode() + body + b"\nendobj\n"
    xref = len(out)
    out += f"xref\n0 {len(objects) + 1}\n0000000000 65535 f \n".encode()
    for off in offsets:
        out += f"{off:010d} 00000 n \n".encode()
    trailer = f"<< /Size {len(objects) + 1} /Root {catalog} 0 R"
    if encrypt:
        trailer += f" /Encrypt {encrypt} 0 R /ID [<{'ab' * 16}> <{'ab' * 16}>]"
    out += f"trailer\n{trailer} >>\nstartxref\n{xref}\n%%EOF\n".encode()
    path = Path(path)
    path.write_bytes(bytes(out))
    return path


def forge_corpus(out_dir, count: int, seed: int) -> list[Path]:
    """Write ``count`` single-table fixtures (PDF plus manifest JSON),
    alternating unruled and ruled-with-spans tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    written = []
    for k in range(count):
        ruled = bool(k % 2)
        c = TableConstraints(ruled=ruled, max_spans=3 if ruled else 0)
        page, manifest = gen_table(int(rng.integers(0, 2**63 - 1)), c)
        stem = out / f"table_{k:04d}"
        write_pdf([page], stem.with_suffix(".pdf"))
        stem.with_suffix(".json").write_text(json.dumps(manifest.to_dict(), indent=1) + "\n")
        written.append(stem.with_suffix(".pdf"))
    return written


# ---------------------------------------------------------------------------
# Whole bulletins for pipeline fixtures
# ---------------------------------------------------------------------------

CORRUPTIONS = ("required_na", "bad_number", "duplicate_table", "truncated")
BULLETIN_PAD = 3.0
BULLETIN_GAP = 20.0


def ruled_table(rows: list[list[str]], x: float, y: float, pad: float = BULLETIN_PAD):
    """Fully ruled table with left-aligned cells; returns (runs, lines, region)."""
    n_cols = len(rows[0])
    widths = [max(text_width(r[j]) for r in rows) + 2 * pad for j in range(n_cols)]
    xs = [x]
    for w in widths:
        xs.append(xs[-1] + max(w, 20.0))
    row_h = FONT_SIZE + 2 * pad
    ys = [y + row_h * i for i in range(len(rows) + 1)]
    lines = [RulingLine("horizontal", yy, xs[0], xs[-1]) for yy in ys]
    lines += [RulingLine("vertical", xx, ys[0], ys[-1]) for xx in xs]
    runs = []
    for i, row in enumerate(rows):
        for j, text in enumerate(row):
            runs += word_runs(text, xs[j] + pad, ys[i] + pad)
    return runs, lines, BBox(xs[0], ys[0], xs[-1], ys[-1])


def _bulletin_rows(schema, values: dict) -> list[list[str]] | None:
    """Cell texts for one table definition filled from ``values``
    ({dest: value}); None when no mapped column has a value."""
    specs = [c for c in schema.column_map if isinstance(c.source, str) and c.dest in values]
    if not specs:
        return None

    def fmt(v):
        return indian_grouping(v) if isinstance(v, int) else str(v)

    if schema.orientation == "key-value":
        return [[c.source, fmt(values[c.dest])] for c in specs]
    return [[c.source for c in specs], [fmt(values[c.dest]) for c in specs]]


def gen_bulletin(schema_version, day, values: dict[str, dict], corrupt: str | None = None, seed: int = 0) -> PageModel:
    """One-page bulletin carrying a ruled table per definition in
    ``schema_version`` for which ``values`` (keyed by sql_table) has data.

    ``corrupt`` damages the page deliberately: ``required_na`` prints "NA"
    for a required value, ``bad_number`` prints an unreadable number, and
    ``duplicate_table`` repeats the first table.  (``truncated`` acts on the
    written file, see :func:`forge_bulletins`.)
    """
    if corrupt is not None and corrupt not in CORRUPTIONS:
        raise GenError(f"unknown corruption {corrupt!r}")
    day = day.isoformat() if hasattr(day, "isoformat") else str(day)
    rng = np.random.default_rng(seed)
    width, height = 612.0, 792.0
    runs = word_runs(f"{schema_version.state_code} Health Bulletin", 36.0, 24.0)
    runs += word_runs(f"Bulletin date {day}", 360.0, 24.0)
    lines: list[RulingLine] = []
    tables = []
    for schema in schema_version.tables:
        rows = _bulletin_rows(schema, values.get(schema.sql_table, {}))
        if rows is not None:
            tables.append((schema, rows))
    if corrupt in ("required_na", "bad_number") and tables:
        schema, rows = tables[int(rng.integers(0, len(tables)))]
        required = [c.source for c in schema.column_map if c.required]
        label = "NA" if corrupt == "required_na" else "unknown"
        if schema.orientation == "key-value":
            for row in rows:
                if row[0] in required:
                    row[1] = label
                    break
        else:
            k = next(j for j, h in enumerate(rows[0]) if h in required)
            rows[1][k] = label
    if corrupt == "duplicate_table" and tables:
        tables.append(tables[0])
    y = 60.0
    for _, rows in tables:
        r, l, region = ruled_table(rows, 36.0, y)
        runs += r
        lines += l
        y = region.y1 + BULLETIN_GAP
        if y > height - 40:
            raise GenError("bulletin does not fit on one page")
    return PageModel(0, width, height, tuple(runs), tuple(lines))


def bulletin_series(seed: int, days: int, start_cases: int = 50_000) -> list[dict[str, dict]]:
    """Plausible cumulative bulletin values for ``days`` consecutive days."""
    rng = np.random.default_rng(seed)
    cases, deaths, recovered = start_cases, start_cases // 60, int(start_cases * 0.8)
    rtpcr, rat = 400_000, 300_000
    first, second = 100_000, 20_000
    beds = int(rng.integers(4000, 9000))
    calls = 0
    out = []
    for _ in range(days):
        new = int(rng.integers(200, 3000))
        cases += new
        deaths += int(rng.integers(0, max(2, new // 40)))
        recovered += int(rng.integers(100, new + 1))
        rtpcr += int(rng.integers(10_000, 40_000))
        rat += int(rng.integers(5_000, 30_000))
        first += int(rng.integers(1_000, 10_000))
        second += int(rng.integers(500, 5_000))
        occupied = int(rng.integers(beds // 5, beds))
        calls += int(rng.integers(50, 400))
        out.append({
            "case_info": {
                "confirmed_total": cases,
                "recovered_total": recovered,
                "deaths_total": deaths,
                "active_cases": cases - recovered - deaths,
            },
            "testing": {"rtpcr_tests": rtpcr, "rat_tests": rat, "total_tests": rtpcr + rat},
            "vaccination": {"first_doses": first, "second_doses": second, "total_doses": first + second},
            "hospitalization": {"beds_total": beds, "beds_occupied": occupied, "beds_vacant": beds - occupied},
            "mental_health_counselling": {"counselling_calls": calls, "persons_counselled": calls // 2},
        })
    return out


def write_bulletin(page: PageModel, path, truncate: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_pdf([page], path)
    if truncate:
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 3])
    return path


def forge_bulletins(
    data_dir,
    states=("DL", "WB"),
    start="2021-04-12",
    days: int = 5,
    seed: int = 0,
    corrupt: dict | None = None,
    values: dict | None = None,
    schema_dir=None,
) -> dict[tuple[str, str], dict]:
    """Write a bulletin corpus to ``data_dir/bulletins/<state>/<date>.pdf``.

    ``corrupt`` maps (state, iso date) to a corruption name; ``values`` maps
    (state, iso date) to explicit bulletin values and replaces the generated
    series for those dates.  Returns the values printed for each bulletin.
    """
    from datetime import date as Date, timedelta

    from .schema import schema_for_date

    corrupt = corrupt or {}
    values = values or {}
    d0 = Date.fromisoformat(start) if isinstance(start, str) else start
    truth = {}
    for n, state in enumerate(states):
        series = bulletin_series(seed * 1000 + n, days)
        for k in range(days):
            day = (d0 + timedelta(days=k)).isoformat()
            vals = values.get((state, day), series[k])
            how = corrupt.get((state, day))
            page = gen_bulletin(schema_for_date(state, day, schema_dir), day, vals,
                                None if how == "truncated" else how, seed + k)
            write_bulletin(page, Path(data_dir) / "bulletins" / state / f"{day}.pdf", truncate=how == "truncated")
            truth[(state, day)] = vals
    return truth
