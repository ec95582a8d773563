"""Region-constrained table detection.

Table regions come either from an external detector's hint file or from a
simple proximity heuristic.  Detection then runs separately inside every
region, which keeps tightly packed tables from being fused together.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Sequence

from .geometry import BBox, PageModel, TableGrid, union_all
from .ingest import RegionHint
from .lattice import detect_lattice
from .stream import StreamParams, detect_stream

LATTICE_MIN_SEGMENTS = 4
DEFAULT_HEURISTIC_GAP = 10.0
MIN_COMPONENT_RUNS = 4


@dataclass(frozen=True)
class ResolvedRegion:
    region: BBox
    source: Literal["external", "heuristic"]
    page_index: int

    def __post_init__(self):
        if self.region.area <= 0:
            raise ValueError("degenerate region")


@dataclass(frozen=True)
class DetectParams:
    stream: StreamParams = StreamParams()
    snap_tol: float = 2.0
    lattice_min_segments: int = LATTICE_MIN_SEGMENTS


def propose_regions_heuristic(page: PageModel, gap: float = DEFAULT_HEURISTIC_GAP) -> list[ResolvedRegion]:
    """Group runs whose boxes lie within ``gap`` of each other (Chebyshev
    distance between boxes) and return every group of at least four runs as
    a region equal to the union of its run boxes."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    runs = sorted(page.runs, key=lambda r: (r.bbox.x0, r.bbox.y0, r.bbox.x1, r.bbox.y1, r.text))
    parent = list(range(len(runs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, a in enumerate(runs):
        for j in range(i + 1, len(runs)):
            b = runs[j]
            if b.bbox.x0 - a.bbox.x1 > gap:
                break  # later runs start even further right
            dx = max(b.bbox.x0 - a.bbox.x1, a.bbox.x0 - b.bbox.x1, 0.0)
            dy = max(b.bbox.y0 - a.bbox.y1, a.bbox.y0 - b.bbox.y1, 0.0)
            if max(dx, dy) <= gap:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list] = {}
    for i, run in enumerate(runs):
        groups.setdefault(find(i), []).append(run)
    regions = [
        ResolvedRegion(union_all(r.bbox for r in members), "heuristic", page.page_index)
        for members in groups.values()
        if len(members) >= MIN_COMPONENT_RUNS
    ]
    regions = [r for r in regions if r.region.area > 0]
    regions.sort(key=lambda r: (r.region.y0, r.region.x0))
    return regions


def resolve_hints(hints: Sequence[RegionHint], page: PageModel, iou_max: float = 0.5) -> list[ResolvedRegion]:
    """Hints for ``page`` clamped to it, with near-duplicates suppressed.

    Of two hints overlapping with IoU above ``iou_max`` only the more
    confident survives (the earlier one on ties).
    """
    mine = [h for h in hints if h.page_index == page.page_index]
    ranked = sorted(enumerate(mine), key=lambda p: (-p[1].confidence, p[0]))
    kept: list[tuple[int, RegionHint]] = []
    for idx, h in ranked:
        box = h.region.clamped(page.width, page.height)
        if box.area <= 0:
            continue
        if any(box.iou(k.region) > iou_max for _, k in kept):
            continue
        kept.append((idx, replace(h, region=box)))
    kept.sort(key=lambda p: (p[1].region.y0, p[1].region.x0, p[0]))
    return [ResolvedRegion(h.region, h.origin, page.page_index) for _, h in kept]


def segments_in(page: PageModel, region: BBox) -> int:
    return sum(1 for l in page.lines if l.bbox.intersection(region) is not None)


def detect_with_regions(
    page: PageModel,
    regions: Sequence[ResolvedRegion],
    params: DetectParams | None = None,
) -> list[TableGrid]:
    """Run detection separately inside each region, in region order.

    Regions crossed by at least four ruling segments use the lattice
    detector, the rest the stream detector.  Each grid records its region's
    source.
    """
    params = params or DetectParams()
    grids = []
    for reg in regions:
        if segments_in(page, reg.region) >= params.lattice_min_segments:
            found = detect_lattice(page, params.snap_tol, region=reg.region)
        else:
            found = detect_stream(page, reg.region, params.stream)
        grids += [replace(g, region_source=reg.source) for g in found]
    return grids


def detect_tables(
    page: PageModel,
    hints: Sequence[RegionHint] | None = None,
    params: DetectParams | None = None,
    heuristic: bool = False,
) -> list[TableGrid]:
    """Default detection policy for one page.

    With hints (or ``heuristic=True``) detection is region-constrained.
    Otherwise ruled tables come from the lattice detector and the stream
    detector handles the text left outside them.
    """
    params = params or DetectParams()
    if hints:
        return detect_with_regions(page, resolve_hints(hints, page), params)
    if heuristic:
        return detect_with_regions(page, propose_regions_heuristic(page), params)
    ruled = detect_lattice(page, params.snap_tol)
    rest = [r for r in page.runs if not any(g.region.contains_point(*r.bbox.center) for g in ruled)]
    loose = detect_stream(replace(page, runs=tuple(rest)), None, params.stream)
    return sorted(ruled + loose, key=lambda g: (g.region.y0, g.region.x0))
