"""Deterministic serialisation of records and sweep grids.

Grid CSV schema: header ``axis1[unit],axis2[unit],quantity[unit],feasible``,
one row per cell in row-major order; infeasible cells have an empty value
field and feasible=0 (never NaN text). Axis metadata, fixed parameters, the
quantity name and the seed live in a JSON sidecar next to the CSV. Records
(single-row results) use the same ``name[unit]`` headers.

Floats are written with repr (shortest round-trip form): identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grids import Axis, SweepGrid

Record = dict[str, tuple[float, str]]


def fmt_float(x: float) -> str:
    return repr(float(x))


def sidecar_path(path: Path) -> Path:
    return path.with_suffix(".meta.json")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _grid_meta(grid: SweepGrid) -> dict:
    return {
        "axes": [
            {"name": ax.name, "unit": ax.unit, "values": [float(v) for v in ax.values]}
            for ax in grid.axes
        ],
        "fixed": grid.fixed,
        "quantity": grid.quantity,
        "unit": grid.unit,
        "seed": grid.seed,
    }


def write_grid(path: str | Path, grid: SweepGrid, fmt: str = "csv") -> list[Path]:
    """Write a grid as CSV + JSON sidecar, or as a single JSON file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ax1, ax2 = grid.axes
    if fmt == "csv":
        lines = [f"{ax1.name}[{ax1.unit}],{ax2.name}[{ax2.unit}],{grid.quantity}[{grid.unit}],feasible"]
        for i, v1 in enumerate(ax1.values):
            for j, v2 in enumerate(ax2.values):
                ok = bool(grid.feasible[i, j])
                val = fmt_float(grid.values[i, j]) if ok else ""
                lines.append(f"{fmt_float(v1)},{fmt_float(v2)},{val},{1 if ok else 0}")
        path.write_text("\n".join(lines) + "\n")
        meta = sidecar_path(path)
        meta.write_text(_dump_json(_grid_meta(grid)))
        return [path, meta]
    if fmt == "json":
        doc = _grid_meta(grid)
        doc["values"] = [
            [float(v) if ok else None for v, ok in zip(row, okrow)]
            for row, okrow in zip(grid.values, grid.feasible)
        ]
        doc["feasible"] = [[bool(ok) for ok in row] for row in grid.feasible]
        path.write_text(_dump_json(doc))
        return [path]
    raise ValidationError(f"unknown output format {fmt!r}; expected csv or json")


def load_grid(path: str | Path) -> SweepGrid:
    """Re-parse a grid written by write_grid (either format)."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        values = np.array(
            [[np.nan if v is None else v for v in row] for row in doc["values"]],
            dtype=float,
        )
        feasible = np.array(doc["feasible"], dtype=bool)
    else:
        meta = sidecar_path(path)
        if not meta.exists():
            raise ValidationError(f"grid sidecar {meta} not found")
        doc = json.loads(meta.read_text())
        lines = path.read_text().strip().split("\n")
        cells = []
        for line in lines[1:]:
            parts = line.split(",")
            if len(parts) != 4:
                raise ValidationError(f"bad grid row in {path}: {line!r}")
            cells.append((np.nan if parts[2] == "" else float(parts[2]), parts[3] == "1"))
        n1 = len(doc["axes"][0]["values"])
        n2 = len(doc["axes"][1]["values"])
        if len(cells) != n1 * n2:
            raise ValidationError(f"grid {path} has {len(cells)} rows, expected {n1 * n2}")
        values = np.array([v for v, _ in cells]).reshape(n1, n2)
        feasible = np.array([ok for _, ok in cells]).reshape(n1, n2)
    axes = tuple(
        Axis(ax["name"], np.array(ax["values"], dtype=float), ax["unit"])
        for ax in doc["axes"]
    )
    return SweepGrid(
        axes=axes,
        values=values,
        feasible=feasible,
        quantity=doc["quantity"],
        unit=doc.get("unit", "-"),
        fixed=doc.get("fixed", {}),
        seed=doc.get("seed", 0),
    )


def write_record(path: str | Path, record: Record, fmt: str = "csv") -> list[Path]:
    """Write a single-row result with explicit unit column headers."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        header = ",".join(f"{name}[{unit}]" for name, (_, unit) in record.items())
        row = ",".join(fmt_float(value) for _, (value, _) in record.items())
        path.write_text(header + "\n" + row + "\n")
        return [path]
    if fmt == "json":
        doc = {
            "values": {name: float(value) for name, (value, _) in record.items()},
            "units": {name: unit for name, (_, unit) in record.items()},
        }
        path.write_text(_dump_json(doc))
        return [path]
    raise ValidationError(f"unknown output format {fmt!r}; expected csv or json")


def load_record(path: str | Path) -> Record:
    """Re-parse a record written by write_record (either format)."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return {
            name: (float(value), doc["units"][name])
            for name, value in doc["values"].items()
        }
    lines = path.read_text().strip().split("\n")
    if len(lines) != 2:
        raise ValidationError(f"record {path} must have a header and one data row")
    record: Record = {}
    for head, cell in zip(lines[0].split(","), lines[1].split(",")):
        if "[" not in head or not head.endswith("]"):
            raise ValidationError(f"record column {head!r} lacks a unit header")
        name, unit = head[:-1].split("[", 1)
        record[name] = (float(cell), unit)
    return record


def write_waveform(path: str | Path, waveform: np.ndarray, meta: dict, fmt: str = "csv") -> list[Path]:
    """Write an emission-rate time series plus a summary sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        lines = ["t[s],emission_rate[1/s]"]
        for t, e in waveform:
            lines.append(f"{fmt_float(t)},{fmt_float(e)}")
        path.write_text("\n".join(lines) + "\n")
        side = sidecar_path(path)
        side.write_text(_dump_json(meta))
        return [path, side]
    if fmt == "json":
        doc = dict(meta)
        doc["waveform"] = {
            "t[s]": [float(t) for t, _ in waveform],
            "emission_rate[1/s]": [float(e) for _, e in waveform],
        }
        path.write_text(_dump_json(doc))
        return [path]
    raise ValidationError(f"unknown output format {fmt!r}; expected csv or json")
