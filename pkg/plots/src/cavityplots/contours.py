"""Marching-squares contour extraction on a rectilinear grid with gaps.

Works directly on the serialised grid values: no resampling, no smoothing.
Cells touching an infeasible (NaN) corner are skipped, so contours never
cross the blank region.
"""

from __future__ import annotations

import math

import numpy as np

from .gridio import Grid


def _interp(c1: float, c2: float, v1: float, v2: float, level: float) -> float:
    if v2 == v1:
        return 0.5 * (c1 + c2)
    t = (level - v1) / (v2 - v1)
    return c1 + t * (c2 - c1)


def extract_contours(grid: Grid, level: float) -> list[np.ndarray]:
    """Line segments of the iso-``level`` curve as (2, 2) arrays
    [[x1, y1], [x2, y2]] in axis coordinates (axis 0 = x, axis 1 = y)."""
    x = grid.axes[0].values
    y = grid.axes[1].values
    v = grid.values
    segments: list[np.ndarray] = []
    for i in range(len(x) - 1):
        for j in range(len(y) - 1):
            corners = v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1]
            if any(math.isnan(c) for c in corners):
                continue
            above = [c > level for c in corners]
            if all(above) or not any(above):
                continue
            # edge crossings: 0 bottom (y_j), 1 right (x_{i+1}), 2 top, 3 left
            pts = []
            if above[0] != above[1]:
                pts.append((_interp(x[i], x[i + 1], corners[0], corners[1], level), y[j]))
            if above[1] != above[2]:
                pts.append((x[i + 1], _interp(y[j], y[j + 1], corners[1], corners[2], level)))
            if above[3] != above[2]:
                pts.append((_interp(x[i], x[i + 1], corners[3], corners[2], level), y[j + 1]))
            if above[0] != above[3]:
                pts.append((x[i], _interp(y[j], y[j + 1], corners[0], corners[3], level)))
            if len(pts) == 2:
                segments.append(np.array([pts[0], pts[1]]))
            elif len(pts) == 4:
                # saddle: split by the cell-centre value
                centre_above = sum(corners) / 4.0 > level
                if centre_above == above[0]:
                    segments.append(np.array([pts[0], pts[1]]))
                    segments.append(np.array([pts[2], pts[3]]))
                else:
                    segments.append(np.array([pts[0], pts[3]]))
                    segments.append(np.array([pts[1], pts[2]]))
    return segments


def level_in_range(grid: Grid, level: float) -> bool:
    finite = grid.values[np.isfinite(grid.values)]
    if finite.size == 0:
        return False
    return bool(finite.min() <= level <= finite.max())
