"""Heatmap rendering with contour overlays and optimum marks.

One panel per grid; infeasible cells are drawn blank (white). Contours are
the package's own marching-squares polylines extracted from the serialised
values, so what is plotted is exactly what extract_contours returns. Input
files are never modified; identical inputs yield byte-identical PNGs.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.colors import LogNorm, Normalize

from .contours import extract_contours, level_in_range
from .gridio import Grid, read_grid
from .recipes import FigureRecipe, RecipeError, load_recipe


class RenderError(ValueError):
    """The recipe cannot be rendered (empty grid, no feasible data)."""


def _edges(values: np.ndarray, log: bool) -> np.ndarray:
    """Cell edges for pcolormesh from cell-centre coordinates."""
    v = np.asarray(values, dtype=float)
    if v.size == 1:
        pad = (abs(v[0]) if v[0] != 0 else 1.0) * 0.05
        return np.array([v[0] - pad, v[0] + pad])
    if log:
        lv = np.log10(v)
        mids = 0.5 * (lv[:-1] + lv[1:])
        return 10 ** np.concatenate(
            [[lv[0] - (mids[0] - lv[0])], mids, [lv[-1] + (lv[-1] - mids[-1])]]
        )
    mids = 0.5 * (v[:-1] + v[1:])
    return np.concatenate([[v[0] - (mids[0] - v[0])], mids, [v[-1] + (v[-1] - mids[-1])]])


def _resolve_levels(recipe: FigureRecipe, grid: Grid) -> list[float]:
    if recipe.contour_levels is None:
        return []
    if recipe.contour_levels == "degradation":
        levels = grid.fixed.get("degradation_levels")
        if not levels:
            warnings.warn("grid sidecar carries no degradation_levels; skipping contours")
            return []
        return [float(v) for v in levels]
    return [float(v) for v in recipe.contour_levels]


def _resolve_marks(recipe: FigureRecipe, grid: Grid) -> list[tuple[float, float]]:
    if recipe.marks is None:
        return []
    if recipe.marks == "design":
        design = grid.fixed.get("design")
        if not design:
            warnings.warn("grid sidecar carries no design point; skipping marks")
            return []
        x_name, y_name = grid.axes[0].name, grid.axes[1].name
        if x_name not in design or y_name not in design:
            warnings.warn(
                f"design point lacks axis fields {x_name!r}/{y_name!r}; skipping marks"
            )
            return []
        return [(float(design[x_name]), float(design[y_name]))]
    return [(float(m["x"]), float(m["y"])) for m in recipe.marks]


def render(recipe: FigureRecipe, out_path: str | Path) -> Path:
    """Render the recipe to an image file; returns the written path."""
    grids = [read_grid(p) for p in recipe.grid_paths]
    if all(not g.feasible.any() for g in grids):
        raise RenderError("no feasible cells in any grid; nothing to render")

    n = len(grids)
    ncols = min(n, 3)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.6 * ncols, 3.8 * nrows), squeeze=False
    )
    finite = np.concatenate(
        [g.values[np.isfinite(g.values)].ravel() for g in grids if g.feasible.any()]
    )
    vmin = recipe.vmin if recipe.vmin is not None else float(finite.min())
    vmax = recipe.vmax if recipe.vmax is not None else float(finite.max())
    if recipe.scale == "log":
        positive = finite[finite > 0]
        if positive.size == 0:
            raise RenderError("log colour scale requested but no positive values")
        norm = LogNorm(vmin=max(vmin, float(positive.min())), vmax=vmax)
    else:
        norm = Normalize(vmin=vmin, vmax=vmax)
    cmap = plt.get_cmap(recipe.cmap).copy()
    cmap.set_bad("white")

    mesh = None
    for k, grid in enumerate(grids):
        ax = axes[k // ncols][k % ncols]
        x_edges = _edges(grid.axes[0].values, recipe.xlog)
        y_edges = _edges(grid.axes[1].values, recipe.ylog)
        masked = np.ma.masked_invalid(grid.values).T
        mesh = ax.pcolormesh(x_edges, y_edges, masked, norm=norm, cmap=cmap)
        for level in _resolve_levels(recipe, grid):
            if not level_in_range(grid, level):
                warnings.warn(
                    f"contour level {level!r} outside the data range of "
                    f"{recipe.grid_paths[k].name}; skipped"
                )
                continue
            segments = extract_contours(grid, level)
            if segments:
                ax.add_collection(
                    LineCollection(segments, zorder=3, **recipe.contour_style)
                )
        for x, y in _resolve_marks(recipe, grid):
            ax.plot(x, y, marker="x", color="red", markersize=9, mew=2, zorder=4)
        if recipe.xlog:
            ax.set_xscale("log")
        if recipe.ylog:
            ax.set_yscale("log")
        ax.set_title(recipe.titles[k])
        ax.set_xlabel(recipe.xlabel or grid.axes[0].label)
        ax.set_ylabel(recipe.ylabel or grid.axes[1].label)
    for k in range(n, nrows * ncols):
        axes[k // ncols][k % ncols].set_axis_off()
    label = f"{grids[0].quantity} [{grids[0].unit}]"
    fig.colorbar(mesh, ax=[a for row in axes for a in row], label=label, shrink=0.9)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, metadata={"Software": "cavityplots"})
    plt.close(fig)
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavityplots", description="render an ioncavity grid figure recipe"
    )
    parser.add_argument("--recipe", required=True, help="recipe JSON path")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        recipe = load_recipe(args.recipe)
        written = render(recipe, args.out)
    except (RecipeError, RenderError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
