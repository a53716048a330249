"""Figure recipes: JSON documents naming the grids to draw and how.

Schema (all paths are resolved relative to the recipe file):
  grids            list of grid CSV/JSON paths, one panel each (required)
  titles           optional list of panel titles
  scale            "linear" | "log" colour normalisation (default linear)
  cmap             matplotlib colormap name (default viridis)
  contour_levels   list of numbers, or the string "degradation" to use the
                   grid sidecar's fixed["degradation_levels"]
  marks            list of {"x":..., "y":...} crosses, or the string
                   "design" to mark the sidecar's fixed["design"] point
  xlabel, ylabel   axis labels (default: axis name [unit] from the grid)
  ylog, xlog       log-scale the axes (default false)
  vmin, vmax       optional colour range
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class RecipeError(ValueError):
    """The recipe is malformed or references missing inputs."""


_ALLOWED = {
    "grids",
    "titles",
    "scale",
    "cmap",
    "contour_levels",
    "contour_style",
    "marks",
    "xlabel",
    "ylabel",
    "xlog",
    "ylog",
    "vmin",
    "vmax",
}


@dataclass(frozen=True)
class FigureRecipe:
    grid_paths: tuple[Path, ...]
    titles: tuple[str, ...]
    scale: str = "linear"
    cmap: str = "viridis"
    contour_levels: object = None   # list[float] | "degradation" | None
    contour_style: dict = field(default_factory=lambda: {"colors": "black", "linestyles": ":"})
    marks: object = None            # list[dict] | "design" | None
    xlabel: str | None = None
    ylabel: str | None = None
    xlog: bool = False
    ylog: bool = False
    vmin: float | None = None
    vmax: float | None = None


def load_recipe(path: str | Path) -> FigureRecipe:
    path = Path(path)
    if not path.exists():
        raise RecipeError(f"recipe file {path} not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RecipeError(f"recipe {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise RecipeError("recipe root must be a JSON object")
    unknown = sorted(set(doc) - _ALLOWED)
    if unknown:
        raise RecipeError(f"unknown recipe key(s): {', '.join(unknown)}")
    grids = doc.get("grids")
    if not isinstance(grids, list) or not grids:
        raise RecipeError("recipe must list at least one grid path")
    grid_paths = tuple((path.parent / g).resolve() for g in grids)
    missing = [str(g) for g in grid_paths if not g.exists()]
    if missing:
        raise RecipeError(f"grid file(s) not found: {', '.join(missing)}")
    titles = doc.get("titles") or [Path(g).stem for g in grids]
    if len(titles) != len(grids):
        raise RecipeError("titles must match grids one to one")
    scale = doc.get("scale", "linear")
    if scale not in ("linear", "log"):
        raise RecipeError(f"scale must be linear or log, got {scale!r}")
    levels = doc.get("contour_levels")
    if levels is not None and levels != "degradation":
        if not isinstance(levels, list) or not all(
            isinstance(v, (int, float)) for v in levels
        ):
            raise RecipeError("contour_levels must be a number list or 'degradation'")
    marks = doc.get("marks")
    if marks is not None and marks != "design":
        if not isinstance(marks, list) or not all(
            isinstance(m, dict) and {"x", "y"} <= set(m) for m in marks
        ):
            raise RecipeError("marks must be a list of {x, y} objects or 'design'")
    return FigureRecipe(
        grid_paths=grid_paths,
        titles=tuple(titles),
        scale=scale,
        cmap=doc.get("cmap", "viridis"),
        contour_levels=levels,
        contour_style=doc.get("contour_style", {"colors": "black", "linestyles": ":"}),
        marks=marks,
        xlabel=doc.get("xlabel"),
        ylabel=doc.get("ylabel"),
        xlog=bool(doc.get("xlog", False)),
        ylog=bool(doc.get("ylog", False)),
        vmin=doc.get("vmin"),
        vmax=doc.get("vmax"),
    )
