"""Whitespace-driven table inference for pages without ruling lines.

Runs are grouped into row bands by vertical overlap, bands are grouped into
blocks separated by tall vertical gaps, and inside every block the column
boundaries are the whitespace channels that most bands leave empty.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .geometry import BBox, Cell, PageModel, TableGrid, TextRun, runs_in, union_all, vertical_overlap_ratio


@dataclass(frozen=True)
class StreamParams:
    row_overlap_min: float = 0.5
    min_gap: float = 6.0
    coverage_min: float = 0.8
    block_gap: float = 18.0
    cross_tol: float = 1.0

    def __post_init__(self):
        if not 0 < self.row_overlap_min <= 1:
            raise ValueError("row_overlap_min must be in (0, 1]")
        if self.min_gap <= 0:
            raise ValueError("min_gap must be positive")
        if not 0 < self.coverage_min <= 1:
            raise ValueError("coverage_min must be in (0, 1]")
        if self.block_gap < 0 or self.cross_tol < 0:
            raise ValueError("block_gap and cross_tol must be non-negative")


@dataclass(frozen=True)
class RowBand:
    y0: float
    y1: float
    runs: tuple[TextRun, ...]


@dataclass(frozen=True)
class ColumnCut:
    x: float


def _run_key(run: TextRun):
    b = run.bbox
    return (b.y0, b.x0, b.y1, b.x1, run.text)


def cluster_rows(runs: list[TextRun], row_overlap_min: float = 0.5) -> list[RowBand]:
    """Partition runs into bands under the transitive closure of
    ``vertical_overlap_ratio >= row_overlap_min``."""
    if not 0 < row_overlap_min <= 1:
        raise ValueError("row_overlap_min must be in (0, 1]")
    ordered = sorted(runs, key=_run_key)
    parent = list(range(len(ordered)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, a in enumerate(ordered):
        for j in range(i + 1, len(ordered)):
            b = ordered[j]
            if b.bbox.y0 >= a.bbox.y1:
                break
            if vertical_overlap_ratio(a.bbox, b.bbox) >= row_overlap_min:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[TextRun]] = {}
    for i, run in enumerate(ordered):
        groups.setdefault(find(i), []).append(run)
    bands = []
    for members in groups.values():
        members.sort(key=lambda r: (r.bbox.x0, r.bbox.y0, r.bbox.x1, r.text))
        bands.append(
            RowBand(
                y0=min(r.bbox.y0 for r in members),
                y1=max(r.bbox.y1 for r in members),
                runs=tuple(members),
            )
        )
    bands.sort(key=lambda b: (b.y0, b.y1, b.runs[0].bbox.x0))
    return bands


def _band_intervals(band: RowBand, cross_tol: float) -> list[tuple[float, float]]:
    spans = []
    for r in band.runs:
        lo, hi = r.bbox.x0 + cross_tol, r.bbox.x1 - cross_tol
        if hi > lo:
            spans.append((lo, hi))
    spans.sort()
    merged: list[list[float]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def find_column_cuts(
    bands: list[RowBand],
    min_gap: float = 6.0,
    coverage_min: float = 0.8,
    cross_tol: float = 1.0,
) -> list[ColumnCut]:
    """Column boundaries inside a block of row bands.

    A channel is a maximal x-interval, strictly between the leftmost and
    rightmost ink, over which at least ``coverage_min`` of the bands are
    empty (runs are shrunk by ``cross_tol`` on each side first).  Channels at
    least ``min_gap`` wide yield one cut, placed at the middle of the widest
    stretch of the channel that the most bands leave empty.
    """
    if min_gap <= 0:
        raise ValueError("min_gap must be positive")
    all_runs = [r for b in bands for r in b.runs]
    if not all_runs:
        return []
    xmin = min(r.bbox.x0 for r in all_runs)
    xmax = max(r.bbox.x1 for r in all_runs)
    per_band = [_band_intervals(b, cross_tol) for b in bands]
    points = {xmin, xmax}
    for spans in per_band:
        for lo, hi in spans:
            points.update(p for p in (lo, hi) if xmin < p < xmax)
    xs = sorted(points)
    need = math.ceil(coverage_min * len(bands) - 1e-9)

    index = {x: k for k, x in enumerate(xs)}
    delta = [0] * len(xs)
    for spans in per_band:
        for lo, hi in spans:
            lo, hi = max(lo, xmin), min(hi, xmax)
            if hi > lo:
                delta[index[lo]] += 1
                delta[index[hi]] -= 1
    free_counts = []
    covered = 0
    for k in range(len(xs) - 1):
        covered += delta[k]
        free_counts.append(len(bands) - covered)

    cuts = []
    i = 0
    n = len(free_counts)
    while i < n:
        if free_counts[i] < need:
            i += 1
            continue
        j = i
        while j + 1 < n and free_counts[j + 1] >= need:
            j += 1
        start, end = xs[i], xs[j + 1]
        width = end - start - 2 * cross_tol
        if start > xmin and end < xmax and width >= min_gap:
            cuts.append(ColumnCut(_core_midpoint(xs, free_counts, i, j)))
        i = j + 1
    return cuts


def _core_midpoint(xs, free_counts, i, j) -> float:
    best = max(free_counts[i : j + 1])
    best_span = None
    k = i
    while k <= j:
        if free_counts[k] != best:
            k += 1
            continue
        m = k
        while m + 1 <= j and free_counts[m + 1] == best:
            m += 1
        span = (xs[k], xs[m + 1])
        if best_span is None or span[1] - span[0] > best_span[1] - best_span[0]:
            best_span = span
        k = m + 1
    return (best_span[0] + best_span[1]) / 2


def split_blocks(bands: list[RowBand], block_gap: float) -> list[list[RowBand]]:
    blocks: list[list[RowBand]] = []
    for band in bands:
        if blocks and band.y0 - max(b.y1 for b in blocks[-1]) <= block_gap:
            blocks[-1].append(band)
        else:
            blocks.append([band])
    return blocks


def grid_from_bands(bands: list[RowBand], cuts: list[ColumnCut], method="stream", page_index=0) -> TableGrid:
    xs = [c.x for c in cuts]
    n_cols = len(xs) + 1
    cells = []
    for r, band in enumerate(bands):
        buckets: list[list[TextRun]] = [[] for _ in range(n_cols)]
        for run in band.runs:
            # center exactly on a cut belongs to the left column
            buckets[bisect_left(xs, run.bbox.center[0])].append(run)
        for c, members in enumerate(buckets):
            cells.append(Cell(r, c, 1, 1, " ".join(m.text for m in members), tuple(members)))
    region = union_all(run.bbox for band in bands for run in band.runs)
    return TableGrid(region, len(bands), n_cols, cells, method, page_index=page_index)


def detect_stream(page: PageModel, region: BBox | None = None, params: StreamParams | None = None) -> list[TableGrid]:
    """Tables on ``page`` (or inside ``region``) inferred from whitespace.

    Without a region, tightly packed tables that share no large vertical gap
    come back fused into one grid; constraining the search to a region is
    how callers separate them.
    """
    params = params or StreamParams()
    runs = runs_in(page.runs, region) if region is not None else list(page.runs)
    if not runs:
        return []
    method = "ocr" if page.source == "ocr" else "stream"
    grids = []
    for block in split_blocks(cluster_rows(runs, params.row_overlap_min), params.block_gap):
        if len(block) < 2:
            continue
        cuts = find_column_cuts(block, params.min_gap, params.coverage_min, params.cross_tol)
        if not cuts:
            continue
        grids.append(grid_from_bands(block, cuts, method, page.page_index))
    grids.sort(key=lambda g: (g.region.y0, g.region.x0))
    return grids
