"""Page geometry and the table types every detector emits.

Coordinates are PDF points with the origin at the top-left corner of the
page and y growing downward.  Adapters flip PDF-native coordinates once at
ingestion, so nothing downstream needs to care.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Literal

Axis = Literal["horizontal", "vertical"]
Method = Literal["lattice", "stream", "ocr"]


@dataclass(frozen=True, order=True)
class BBox:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        coords = (self.x0, self.y0, self.x1, self.y1)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite bbox {coords}")
        if min(coords) < 0:
            raise ValueError(f"negative bbox coordinate {coords}")
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"inverted bbox {coords}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def intersection(self, other: BBox) -> BBox | None:
        x0, y0 = max(self.x0, other.x0), max(self.y0, other.y0)
        x1, y1 = min(self.x1, other.x1), min(self.y1, other.y1)
        if x0 > x1 or y0 > y1:
            return None
        return BBox(x0, y0, x1, y1)

    def iou(self, other: BBox) -> float:
        inter = self.intersection(other)
        if inter is None:
            return 0.0
        union = self.area + other.area - inter.area
        return inter.area / union if union > 0 else 0.0

    def translated(self, dx: float, dy: float) -> BBox:
        return BBox(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def clamped(self, width: float, height: float) -> BBox:
        x0 = min(max(self.x0, 0.0), width)
        y0 = min(max(self.y0, 0.0), height)
        return BBox(x0, y0, min(max(self.x1, x0), width), min(max(self.y1, y0), height))


def bbox_union(a: BBox, b: BBox) -> BBox:
    return BBox(min(a.x0, b.x0), min(a.y0, b.y0), max(a.x1, b.x1), max(a.y1, b.y1))


def union_all(boxes: Iterable[BBox]) -> BBox:
    return reduce(bbox_union, boxes)


def vertical_overlap_ratio(a: BBox, b: BBox) -> float:
    """Overlap of the y-intervals divided by the smaller of the two heights."""
    smaller = min(a.height, b.height)
    if smaller <= 0:
        return 0.0
    overlap = min(a.y1, b.y1) - max(a.y0, b.y0)
    if overlap <= 0:
        return 0.0
    return min(overlap / smaller, 1.0)


@dataclass(frozen=True)
class TextRun:
    bbox: BBox
    text: str
    confidence: float = 1.0

    def __post_init__(self):
        if not self.text or self.text != self.text.strip():
            raise ValueError(f"run text must be non-empty and stripped: {self.text!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")

    def translated(self, dx: float, dy: float) -> TextRun:
        return TextRun(self.bbox.translated(dx, dy), self.text, self.confidence)


@dataclass(frozen=True)
class RulingLine:
    axis: Axis
    position: float
    start: float
    end: float
    thickness: float = 1.0

    def __post_init__(self):
        if self.axis not in ("horizontal", "vertical"):
            raise ValueError(f"bad axis {self.axis!r}")
        if not self.start < self.end:
            raise ValueError(f"degenerate ruling line {self.start}..{self.end}")
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def bbox(self) -> BBox:
        half = self.thickness / 2
        if self.axis == "horizontal":
            return BBox(self.start, max(self.position - half, 0.0), self.end, self.position + half)
        return BBox(max(self.position - half, 0.0), self.start, self.position + half, self.end)

    def translated(self, dx: float, dy: float) -> RulingLine:
        if self.axis == "horizontal":
            return RulingLine(self.axis, self.position + dy, self.start + dx, self.end + dx, self.thickness)
        return RulingLine(self.axis, self.position + dx, self.start + dy, self.end + dy, self.thickness)


@dataclass(frozen=True)
class PageModel:
    page_index: int
    width: float
    height: float
    runs: tuple[TextRun, ...] = ()
    lines: tuple[RulingLine, ...] = ()
    source: Literal["pdf", "ocr"] = "pdf"

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        object.__setattr__(self, "lines", tuple(self.lines))
        if self.page_index < 0:
            raise ValueError("page_index must be >= 0")
        page = BBox(0, 0, self.width, self.height)
        for item in (*self.runs, *self.lines):
            b = item.bbox
            # ruling-line thickness may poke half a stroke past the edge
            slack = getattr(item, "thickness", 0.0)
            if b.x1 > page.x1 + slack or b.y1 > page.y1 + slack:
                raise ValueError(f"{item!r} lies outside the page")

    @property
    def bbox(self) -> BBox:
        return BBox(0, 0, self.width, self.height)


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    row_span: int = 1
    col_span: int = 1
    text: str = ""
    source_runs: tuple[TextRun, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class TableGrid:
    region: BBox
    n_rows: int
    n_cols: int
    cells: tuple[Cell, ...]
    method: Method
    region_source: str | None = None
    page_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        check_grid(self)

    def cell_at(self, row: int, col: int) -> Cell | None:
        """The cell whose span covers (row, col)."""
        for c in self.cells:
            if c.row <= row < c.row + c.row_span and c.col <= col < c.col + c.col_span:
                return c
        return None

    def to_matrix(self, fill_spans: bool = False) -> list[list[str]]:
        """Dense row-major text matrix.  Positions covered by a span are
        empty unless ``fill_spans`` copies the anchor's text into them."""
        out = [["" for _ in range(self.n_cols)] for _ in range(self.n_rows)]
        for c in self.cells:
            for r in range(c.row, c.row + c.row_span):
                for k in range(c.col, c.col + c.col_span):
                    if fill_spans or (r, k) == (c.row, c.col):
                        out[r][k] = c.text
        return out

    @property
    def spans(self) -> list[tuple[int, int, int, int]]:
        return sorted(
            (c.row, c.col, c.row_span, c.col_span)
            for c in self.cells
            if c.row_span > 1 or c.col_span > 1
        )


def check_grid(grid: TableGrid) -> None:
    """Raise ValueError unless the grid's cells are in range and disjoint."""
    if grid.n_rows < 1 or grid.n_cols < 1:
        raise ValueError("grid must have at least one row and column")
    seen_anchor = set()
    occupied: dict[tuple[int, int], tuple[int, int]] = {}
    for c in grid.cells:
        if c.row_span < 1 or c.col_span < 1:
            raise ValueError(f"bad span on {c}")
        if not (0 <= c.row < grid.n_rows and 0 <= c.col < grid.n_cols):
            raise ValueError(f"cell anchor out of range: {(c.row, c.col)}")
        if c.row + c.row_span > grid.n_rows or c.col + c.col_span > grid.n_cols:
            raise ValueError(f"cell span overflows grid: {(c.row, c.col)}")
        if (c.row, c.col) in seen_anchor:
            raise ValueError(f"duplicate anchor {(c.row, c.col)}")
        seen_anchor.add((c.row, c.col))
        for r in range(c.row, c.row + c.row_span):
            for k in range(c.col, c.col + c.col_span):
                if (r, k) in occupied:
                    raise ValueError(f"cells {occupied[(r, k)]} and {(c.row, c.col)} overlap")
                occupied[(r, k)] = (c.row, c.col)


def runs_in(runs: Iterable[TextRun], region: BBox) -> list[TextRun]:
    """Runs whose center lies inside ``region``."""
    return [r for r in runs if region.contains_point(*r.bbox.center)]
