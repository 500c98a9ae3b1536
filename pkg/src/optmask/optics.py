"""Phenomenological light-propagation model for a stack of pixel masks.

Pixels sit on a square grid (row-major, ``w = ceil(sqrt(rows))``).  Every
mask layer attenuates transmitted light by ``alpha`` and leaks a fraction
``beta`` of each open pixel's light into each open 4-neighbour, which is the
mechanism by which a blocking stack can still light a detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np

from .masks import IncidenceMatrix
from .solver import multiply, selection_vector

BETA_MAX = 0.25


@dataclass(frozen=True)
class PixelGrid:
    """Placement of matrix rows onto a ``height x width`` grid of cells."""

    rows: int
    height: int
    width: int

    @classmethod
    def square(cls, rows: int) -> PixelGrid:
        side = math.isqrt(rows - 1) + 1 if rows > 0 else 0
        return cls(rows, side, side)

    @classmethod
    def rectangular(cls, rows: int, width: int) -> PixelGrid:
        if width < 1:
            raise ValueError("grid width must be positive")
        return cls(rows, -(-rows // width), width)

    @property
    def side(self) -> int:
        if self.height != self.width:
            raise ValueError("grid is not square")
        return self.width

    @property
    def cells(self) -> int:
        return self.height * self.width

    def cell_of(self, r: int) -> tuple[int, int]:
        if not 0 <= r < self.rows:
            raise IndexError(f"row {r} out of range")
        return divmod(r, self.width)

    def place(self, values: np.ndarray, fill=0) -> np.ndarray:
        """Lay a per-row vector onto the grid; filler cells get ``fill``."""
        flat = np.full(self.cells, fill, dtype=np.asarray(values).dtype)
        flat[: self.rows] = values
        return flat.reshape(self.height, self.width)

    @property
    def used(self) -> np.ndarray:
        return self.place(np.ones(self.rows, dtype=bool), fill=False)


@dataclass(frozen=True)
class OpticsParams:
    alpha: float = 0.0
    beta: float = 0.0
    tau: float = 0.5
    i0: float = 1.0
    blocked_retention: bool = False
    layer_order: Literal["ascending", "descending"] = "ascending"

    def validate(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if not 0.0 <= self.beta <= BETA_MAX:
            raise ValueError(f"beta must be in [0, {BETA_MAX}], got {self.beta}")
        if not self.i0 > 0:
            raise ValueError(f"i0 must be positive, got {self.i0}")
        if not 0 < self.tau < self.i0:
            raise ValueError(f"tau must satisfy 0 < tau < i0, got tau={self.tau}, i0={self.i0}")
        if self.layer_order not in ("ascending", "descending"):
            raise ValueError(f"unknown layer order {self.layer_order!r}")


@dataclass(frozen=True)
class IntensityField:
    grid: PixelGrid
    values: np.ndarray
    layer_totals: tuple[float, ...] = field(default=(), compare=False)

    @property
    def per_row(self) -> np.ndarray:
        return self.values.reshape(-1)[: self.grid.rows]

    @property
    def total(self) -> float:
        return float(self.values.sum())


def _neighbour_sum(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    out[1:, :] += x[:-1, :]
    out[:-1, :] += x[1:, :]
    out[:, 1:] += x[:, :-1]
    out[:, :-1] += x[:, 1:]
    return out


def layer_sequence(selected: Iterable[int], p: OpticsParams) -> list[int]:
    return sorted(set(selected), reverse=p.layer_order == "descending")


def apply_layer(
    f: np.ndarray, open_: np.ndarray, used: np.ndarray, p: OpticsParams
) -> np.ndarray:
    """One synchronous layer update; reads only the pre-layer field ``f``."""
    receivers = used if p.blocked_retention else open_
    k = _neighbour_sum(receivers.astype(np.float64))
    keep = (1.0 - p.alpha) * (1.0 - k * p.beta) * f
    leak = np.where(open_, p.beta * (1.0 - p.alpha) * f, 0.0)
    incoming = _neighbour_sum(leak)
    return np.where(open_, keep, 0.0) + np.where(receivers, incoming, 0.0)


def propagate(
    m: IncidenceMatrix,
    selected: Iterable[int],
    p: OpticsParams,
    grid: PixelGrid | None = None,
) -> IntensityField:
    """Send ``i0`` through every pixel and push it through the selected masks."""
    p.validate()
    grid = grid or PixelGrid.square(m.rows)
    if grid.rows != m.rows:
        raise ValueError("grid does not match the matrix row count")
    layers = layer_sequence(selected, p)
    selection_vector(m, layers)  # range check
    used = grid.used
    f = np.where(used, p.i0, 0.0)
    totals = [float(f.sum())]
    bits = m.array
    for col in layers:
        open_ = grid.place(bits[:, col] == 0, fill=False)
        f = apply_layer(f, open_, used, p)
        totals.append(float(f.sum()))
    return IntensityField(grid, f, tuple(totals))


@dataclass(frozen=True)
class Detection:
    any_pixel_above_tau: bool
    cell_list: tuple[int, ...]
    total_intensity: float


def detect(f: IntensityField, p: OpticsParams) -> Detection:
    """Per-pixel threshold decision plus the summed (lens + detector) reading."""
    rows = f.per_row
    above = tuple(int(r) for r in np.flatnonzero(rows > p.tau))
    return Detection(bool(above), above, f.total)


@dataclass(frozen=True)
class MarginReport:
    max_intensity: float
    safe_beta: float
    beta_upper: float
    false_positive: bool


def _max_intensity(m, selected, p, grid) -> float:
    return float(propagate(m, selected, p, grid).values.max(initial=0.0))


def crosstalk_margin(
    m: IncidenceMatrix,
    selected: Sequence[int],
    p: OpticsParams,
    beta_upper: float = BETA_MAX,
    rel_tol: float = 1e-6,
    grid: PixelGrid | None = None,
) -> MarginReport:
    """Peak leaked intensity at ``p.beta`` and the largest beta that stays below tau.

    Only meaningful for a stack that blocks every pixel in the ideal model.
    """
    p.validate()
    if np.any(multiply(m, selection_vector(m, selected)) == 0):
        raise ValueError("selection transmits in the ideal model; no crosstalk margin")
    peak = _max_intensity(m, selected, p, grid)

    def safe(beta: float) -> bool:
        return _max_intensity(m, selected, replace(p, beta=beta), grid) <= p.tau

    if safe(beta_upper):
        safe_beta = beta_upper
    else:
        lo, hi = 0.0, beta_upper
        while hi - lo > rel_tol * hi:
            mid = 0.5 * (lo + hi)
            if safe(mid):
                lo = mid
            else:
                hi = mid
        safe_beta = lo
    return MarginReport(peak, safe_beta, beta_upper, peak > p.tau)


def lipschitz_bound(layers: int, p: OpticsParams) -> float:
    """Bound on ``|d field / d beta|`` for a stack of ``layers`` masks.

    Each layer map has max row sum <= 1 and its beta-derivative has max row
    sum <= 8 (1 - alpha).
    """
    return 8.0 * (1.0 - p.alpha) * layers * p.i0
