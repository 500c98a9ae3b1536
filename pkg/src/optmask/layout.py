"""Physical mask geometry: pixel apertures, instance arrays and exports.

All lengths are integer nanometres.  A mask for edge ``k`` is a grid of
square apertures, one per matrix row, open where the row does *not* use the
edge.  An instance array tiles one pre-composited stack per k-subset of
masks, in lexicographic subset order, row-major on a square grid.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Protocol, Sequence

import numpy as np

from .masks import IncidenceMatrix, build_hamiltonian
from .optics import PixelGrid

Rect = tuple[int, int, int, int]

DEFAULT_COMBO_LIMIT = 10**6


class CombinationLimitError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutParams:
    pixel_size: int = 1500
    pixel_gap: int = 1500
    mask_gap: int = 15000
    unit: str = "nm"

    def __post_init__(self) -> None:
        for name in ("pixel_size", "pixel_gap", "mask_gap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.unit != "nm":
            raise ValueError("lengths are stored in nm")

    @property
    def pixel_pitch(self) -> int:
        return self.pixel_size + self.pixel_gap


def _grid_extent(cells: int, size: int, gap: int) -> int:
    # every pixel owns its trailing gap: 5 x (1.5 + 1.5) um = 15 um
    return cells * (size + gap)


@dataclass(frozen=True)
class MaskGeometry:
    grid: PixelGrid
    open_cells: np.ndarray  # bool, (height, width)
    params: LayoutParams

    @property
    def extent_nm(self) -> tuple[int, int]:
        p = self.params
        return (
            _grid_extent(self.grid.width, p.pixel_size, p.pixel_gap),
            _grid_extent(self.grid.height, p.pixel_size, p.pixel_gap),
        )

    @property
    def open_count(self) -> int:
        return int(self.open_cells.sum())

    def rects(self, x0: int = 0, y0: int = 0) -> Iterator[Rect]:
        p = self.params
        for i, j in zip(*np.nonzero(self.open_cells)):
            yield (
                x0 + int(j) * p.pixel_pitch,
                y0 + int(i) * p.pixel_pitch,
                p.pixel_size,
                p.pixel_size,
            )


def _grid_for(m: IncidenceMatrix, width: int | None) -> PixelGrid:
    return PixelGrid.square(m.rows) if width is None else PixelGrid.rectangular(m.rows, width)


def _stack_transmits(m: IncidenceMatrix, combo: Sequence[int]) -> np.ndarray:
    combo = list(combo)
    if any(not 0 <= c < m.cols for c in combo) or len(set(combo)) != len(combo):
        raise ValueError(f"invalid mask combination {tuple(combo)} for {m.cols} masks")
    if not combo:
        return np.ones(m.rows, dtype=bool)
    return ~m.array[:, combo].any(axis=1)


def mask_geometry(
    m: IncidenceMatrix, col: int, p: LayoutParams | None = None, width: int | None = None
) -> MaskGeometry:
    """Aperture layout of the single mask for column ``col``."""
    if not 0 <= col < m.cols:
        raise IndexError(f"column {col} out of range for {m.cols} masks")
    return stack_preview(m, (col,), p, width)


def stack_preview(
    m: IncidenceMatrix,
    combo: Sequence[int],
    p: LayoutParams | None = None,
    width: int | None = None,
) -> MaskGeometry:
    """Composite of several stacked masks: open only where all are open."""
    grid = _grid_for(m, width)
    open_cells = grid.place(_stack_transmits(m, combo), fill=False)
    return MaskGeometry(grid, open_cells, p or LayoutParams())


@dataclass(frozen=True)
class InstanceArray:
    n: int
    k: int
    combos: tuple[tuple[int, ...], ...]
    grid_side: int
    matrix: IncidenceMatrix
    params: LayoutParams
    mask_grid: PixelGrid

    @property
    def used_cells(self) -> int:
        return len(self.combos)

    @property
    def unused_cells(self) -> int:
        return self.grid_side**2 - self.used_cells

    @property
    def last_row_used(self) -> int:
        if not self.combos:
            return 0
        return (self.used_cells - 1) % self.grid_side + 1

    @property
    def last_row_unused(self) -> int:
        return self.grid_side - self.last_row_used if self.combos else 0

    @property
    def mask_extent_nm(self) -> tuple[int, int]:
        p = self.params
        return (
            _grid_extent(self.mask_grid.width, p.pixel_size, p.pixel_gap),
            _grid_extent(self.mask_grid.height, p.pixel_size, p.pixel_gap),
        )

    @property
    def extent_nm(self) -> tuple[int, int]:
        # each instance cell carries its trailing mask gap
        w, h = self.mask_extent_nm
        g = self.params.mask_gap
        return (self.grid_side * (w + g), self.grid_side * (h + g))

    def transmitting(self) -> np.ndarray:
        """Boolean ``(len(combos), rows)``: which pixels each stack leaves open."""
        if not self.combos:
            return np.zeros((0, self.matrix.rows), dtype=bool)
        sel = np.zeros((len(self.combos), self.matrix.cols), dtype=np.int64)
        idx = np.array(self.combos, dtype=np.int64).reshape(len(self.combos), self.k)
        np.put_along_axis(sel, idx, 1, axis=1)
        return (sel @ self.matrix.array.T.astype(np.int64)) == 0

    def stacks(self) -> Iterator[tuple[int, int, MaskGeometry]]:
        """``(x0, y0, geometry)`` for every instance, row-major."""
        w, h = self.mask_extent_nm
        g = self.params.mask_gap
        for i, open_rows in enumerate(self.transmitting()):
            r, c = divmod(i, self.grid_side)
            geom = MaskGeometry(
                self.mask_grid, self.mask_grid.place(open_rows, fill=False), self.params
            )
            yield c * (w + g), r * (h + g), geom

    def rects(self) -> Iterator[Rect]:
        for x0, y0, geom in self.stacks():
            yield from geom.rects(x0, y0)


def combination_count(n: int, k: int) -> int:
    return math.comb(n * (n - 1), k)


def instance_array(
    n: int,
    k: int,
    p: LayoutParams | None = None,
    limit: int = DEFAULT_COMBO_LIMIT,
    m: IncidenceMatrix | None = None,
    width: int | None = None,
) -> InstanceArray:
    """All k-mask stacks for an ``n``-vertex problem, tiled on a square grid."""
    masks = n * (n - 1)
    if not 0 <= k <= masks:
        raise ValueError(f"k must be in [0, {masks}], got {k}")
    count = combination_count(n, k)
    if count > limit:
        raise CombinationLimitError(
            f"C({masks}, {k}) = {count} combinations exceeds limit {limit}"
        )
    m = m or build_hamiltonian(n)
    if m.kind != "hamiltonian" or m.n != n:
        raise ValueError("mask set does not match n")
    combos = tuple(itertools.combinations(range(masks), k))
    side = math.isqrt(count - 1) + 1
    return InstanceArray(n, k, combos, side, m, p or LayoutParams(), _grid_for(m, width))


class Drawable(Protocol):
    @property
    def extent_nm(self) -> tuple[int, int]: ...

    def rects(self) -> Iterator[Rect]: ...


def svg_document(geometry: Drawable) -> str:
    """SVG 1.1 with 1 user unit = 1 nm: opaque background, white apertures."""
    w, h = geometry.extent_nm
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w / 1e6:g}mm" height="{h / 1e6:g}mm" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#000000"/>',
    ]
    out.extend(
        f'<rect x="{x}" y="{y}" width="{rw}" height="{rh}" fill="#ffffff"/>'
        for x, y, rw, rh in geometry.rects()
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def rects_document(geometry: Drawable) -> str:
    lines = ["RECTS v1"]
    lines.extend(f"{x} {y} {w} {h}" for x, y, w, h in geometry.rects())
    return "\n".join(lines) + "\n"


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_svg(geometry: Drawable, path) -> Path:
    return _write(path, svg_document(geometry))


def emit_rects(geometry: Drawable, path) -> Path:
    return _write(path, rects_document(geometry))


def format_length(nm: int) -> str:
    """Human-readable length: um below 1 mm, mm above."""
    if nm >= 1_000_000:
        return f"{nm / 1e6:g}mm"
    return f"{nm / 1e3:g}um"
