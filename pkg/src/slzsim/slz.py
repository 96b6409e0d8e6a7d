"""Distance transform on the head-plane grid and circular landing zone extraction.

The largest people-free circle is located as the maximum of the Euclidean
distance transform of the occupancy grid. The found disk is then rasterized
as occupied and the search repeats, yielding up to n_p candidates with
radius at least r0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass
class DistanceMap:
    values: np.ndarray      # meters, shape (rows, cols), 0 on occupied cells
    cell_size: float

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SlzProposal:
    cx: float       # circle center, world frame (m)
    cy: float
    radius: float   # meters
    frame_index: int = 0

    @property
    def area(self) -> float:
        return float(np.pi * self.radius ** 2)


@dataclass(frozen=True)
class SlzConfig:
    n_p: int = 10   # max proposals per frame
    r0: float = 1.0  # minimum safety radius (m)

    def __post_init__(self):
        if self.n_p < 1:
            raise ValueError("n_p must be at least 1")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")


def _boundary_distance_cells(rows: int, cols: int) -> np.ndarray:
    """Distance from each cell center to the nearest point outside the grid
    boundary, in cell units."""
    i = np.arange(rows, dtype=float)
    j = np.arange(cols, dtype=float)
    di = np.minimum(i, rows - 1 - i) + 0.5
    dj = np.minimum(j, cols - 1 - j) + 0.5
    return np.minimum(di[:, None], dj[None, :])


def _distance_cells(values: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest occupied cell center, in cell
    units; falls back to the grid boundary when no cell is occupied."""
    occupied = values == 0
    if occupied.any():
        return ndimage.distance_transform_edt(~occupied)
    return _boundary_distance_cells(*values.shape)


def euclidean_distance_transform(grid) -> DistanceMap:
    """Per-cell distance in meters to the nearest occupied cell center.

    Fully free grids measure distance to the grid boundary instead, so
    landing proposals never extend past the mapped region.
    """
    return DistanceMap(_distance_cells(grid.values) * grid.cell_size,
                       grid.cell_size)


def extract_slz(grid, cfg: SlzConfig, frame_index: int = 0) -> list[SlzProposal]:
    """Iteratively extract the biggest inscribed circles with radius >= r0.

    Each emitted disk is rasterized as occupied in a working copy before the
    next search; results come out in extraction order (non-increasing radius).
    Tie locations resolve to the lowest (row, col).
    """
    work = grid.values.copy()
    cell = grid.cell_size
    proposals = []
    for _ in range(cfg.n_p):
        dist = _distance_cells(work) * cell
        flat = int(np.argmax(dist))  # first occurrence = lowest (row, col)
        radius = float(dist.flat[flat])
        if radius < cfg.r0:
            break
        i, j = divmod(flat, grid.cols)
        cx = grid.origin_x + j * cell
        cy = grid.origin_y + i * cell
        proposals.append(SlzProposal(cx, cy, radius, frame_index))
        # mark every cell whose center lies within the found radius;
        # compare in squared cell units to dodge float rounding at the rim
        di = (np.arange(grid.rows) - i)[:, None]
        dj = (np.arange(grid.cols) - j)[None, :]
        rc2 = (radius / cell) ** 2
        work[di * di + dj * dj <= rc2 + 1e-9] = 0
    return proposals
