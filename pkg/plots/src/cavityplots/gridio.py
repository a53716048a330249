"""Reader for the ioncavity grid schema.

CSV: header ``axis1[unit],axis2[unit],quantity[unit],feasible``, one row per
cell in row-major order, infeasible cells with an empty value field and
feasible=0; axis values and fixed parameters live in a ``.meta.json``
sidecar. The JSON format carries everything in one document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GridFormatError(ValueError):
    """The file does not follow the documented grid schema."""


@dataclass(frozen=True)
class AxisData:
    name: str
    unit: str
    values: np.ndarray

    @property
    def label(self) -> str:
        return f"{self.name} [{self.unit}]"


@dataclass(frozen=True)
class Grid:
    axes: tuple[AxisData, AxisData]
    values: np.ndarray          # NaN on infeasible cells
    feasible: np.ndarray
    quantity: str
    unit: str
    fixed: dict = field(default_factory=dict)
    seed: int = 0


def _axes_from_meta(doc: dict) -> tuple[AxisData, AxisData]:
    axes = doc.get("axes")
    if not isinstance(axes, list) or len(axes) != 2:
        raise GridFormatError("grid metadata must declare exactly two axes")
    return tuple(
        AxisData(ax["name"], ax.get("unit", "-"), np.asarray(ax["values"], dtype=float))
        for ax in axes
    )


def read_grid(path: str | Path) -> Grid:
    """Parse a grid written by the ioncavity CLI (CSV+sidecar or JSON)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"grid file {path} not found")
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        axes = _axes_from_meta(doc)
        values = np.array(
            [[np.nan if v is None else float(v) for v in row] for row in doc["values"]]
        )
        feasible = np.asarray(doc["feasible"], dtype=bool)
    else:
        meta_path = path.with_suffix(".meta.json")
        if not meta_path.exists():
            raise FileNotFoundError(f"grid sidecar {meta_path} not found")
        doc = json.loads(meta_path.read_text())
        axes = _axes_from_meta(doc)
        lines = path.read_text().strip().split("\n")
        if len(lines) < 2:
            raise GridFormatError(f"grid {path} has no data rows")
        cells = []
        for line in lines[1:]:
            parts = line.split(",")
            if len(parts) != 4:
                raise GridFormatError(f"bad row in {path}: {line!r}")
            ok = parts[3] == "1"
            cells.append((float(parts[2]) if ok and parts[2] != "" else np.nan, ok))
        shape = (axes[0].values.size, axes[1].values.size)
        if len(cells) != shape[0] * shape[1]:
            raise GridFormatError(
                f"grid {path}: {len(cells)} rows do not fill a {shape} grid"
            )
        values = np.array([v for v, _ in cells]).reshape(shape)
        feasible = np.array([ok for _, ok in cells]).reshape(shape)
    if values.shape != (axes[0].values.size, axes[1].values.size):
        raise GridFormatError("value matrix does not match the axes")
    return Grid(
        axes=axes,
        values=values,
        feasible=feasible,
        quantity=doc.get("quantity", "value"),
        unit=doc.get("unit", "-"),
        fixed=doc.get("fixed", {}),
        seed=doc.get("seed", 0),
    )
