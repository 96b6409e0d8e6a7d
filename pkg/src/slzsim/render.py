"""Minimal dependency-free PGM/PPM frame renders."""

from __future__ import annotations

import numpy as np


def write_pgm(path, gray: np.ndarray) -> None:
    gray = np.asarray(gray, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (gray.shape[1], gray.shape[0]))
        fh.write(gray.tobytes())


def write_ppm(path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (rgb.shape[1], rgb.shape[0]))
        fh.write(rgb.tobytes())


def _draw_circle(rgb: np.ndarray, i: float, j: float, r_cells: float,
                 color) -> None:
    rows, cols = rgb.shape[:2]
    ii = np.arange(rows)[:, None] - i
    jj = np.arange(cols)[None, :] - j
    d = np.sqrt(ii * ii + jj * jj)
    ring = np.abs(d - r_cells) <= 0.6
    rgb[ring] = color


def render_frame(grid, proposals, tracks, target) -> np.ndarray:
    """Composite: occupancy grayscale, proposals green, tracks blue,
    selected target red. Circles are in world meters; the grid maps them
    to cells."""
    rgb = np.repeat(grid.values[:, :, None], 3, axis=2).astype(np.uint8)
    cell = grid.cell_size

    def to_cells(cx, cy, r):
        return ((cy - grid.origin_y) / cell, (cx - grid.origin_x) / cell,
                r / cell)

    for p in proposals:
        _draw_circle(rgb, *to_cells(p.cx, p.cy, p.radius), (0, 200, 0))
    for t in tracks:
        cx, cy, r = t.circle
        _draw_circle(rgb, *to_cells(cx, cy, max(r, cell)), (0, 0, 230))
    if target is not None:
        cx, cy, r = target.circle
        _draw_circle(rgb, *to_cells(cx, cy, max(r, cell)), (230, 0, 0))
    return rgb
