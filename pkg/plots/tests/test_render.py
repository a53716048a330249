import hashlib
import json

import numpy as np
import pytest

from cavityplots.contours import extract_contours, level_in_range
from cavityplots.gridio import Grid, GridFormatError, read_grid
from cavityplots.recipes import RecipeError, load_recipe
from cavityplots.render import RenderError, main, render


def _write_recipe(path, doc):
    path.write_text(json.dumps(doc, indent=2))
    return path


def test_read_grid_csv(clipping_grid):
    grid = read_grid(clipping_grid)
    assert grid.quantity == "clipping_loss"
    assert grid.axes[0].name == "l" and grid.axes[0].unit == "m"
    assert grid.values.shape == (24, 20)
    assert not grid.feasible.all() and grid.feasible.any()
    assert np.isnan(grid.values[~grid.feasible]).all()


def test_read_grid_missing_sidecar(tmp_path, clipping_grid):
    orphan = tmp_path / "orphan.csv"
    orphan.write_text(clipping_grid.read_text())
    with pytest.raises(FileNotFoundError):
        read_grid(orphan)


def test_read_grid_rejects_malformed_rows(tmp_path, clipping_grid):
    bad = tmp_path / "bad.csv"
    bad.write_text("a[m],b[m],v[-],feasible\n1,2,3\n")
    (tmp_path / "bad.meta.json").write_text(
        json.dumps(
            {
                "axes": [
                    {"name": "a", "unit": "m", "values": [1.0]},
                    {"name": "b", "unit": "m", "values": [2.0]},
                ],
                "quantity": "v",
            }
        )
    )
    with pytest.raises(GridFormatError):
        read_grid(bad)


def _independent_crossings(grid: Grid, level: float) -> list[tuple[float, float]]:
    """Recompute level crossings straight from the serialised values: scan
    every grid edge for a sign change and linearly interpolate."""
    x, y, v = grid.axes[0].values, grid.axes[1].values, grid.values
    pts = []
    for i in range(len(x)):
        for j in range(len(y)):
            if np.isnan(v[i, j]):
                continue
            if i + 1 < len(x) and not np.isnan(v[i + 1, j]):
                a, b = v[i, j] - level, v[i + 1, j] - level
                if a * b < 0:
                    t = a / (a - b)
                    pts.append((x[i] + t * (x[i + 1] - x[i]), y[j]))
            if j + 1 < len(y) and not np.isnan(v[i, j + 1]):
                a, b = v[i, j] - level, v[i, j + 1] - level
                if a * b < 0:
                    t = a / (a - b)
                    pts.append((x[i], y[j] + t * (y[j + 1] - y[j])))
    return pts


def test_contours_match_recomputed_crossings(clipping_grid):
    grid = read_grid(clipping_grid)
    level = 1e-6
    assert level_in_range(grid, level)
    segments = extract_contours(grid, level)
    assert segments
    crossings = _independent_crossings(grid, level)
    assert crossings
    cell = np.array(
        [np.diff(grid.axes[0].values).max(), np.diff(grid.axes[1].values).max()]
    )
    ends = np.array([p for seg in segments for p in seg])
    cross = np.array(crossings)
    # every extracted endpoint sits within one grid cell of an independently
    # recomputed crossing, and vice versa
    for p in ends:
        assert (np.abs(cross - p) <= cell).all(axis=1).any()
    for q in cross:
        assert (np.abs(ends - q) <= cell).all(axis=1).any()


def test_render_clipping_style_figure(tmp_path, clipping_grid):
    recipe = _write_recipe(
        tmp_path / "fig.recipe.json",
        {
            "grids": [str(clipping_grid)],
            "scale": "log",
            "contour_levels": [1e-6],
            "xlabel": "cavity length L (m)",
            "ylabel": "mirror curvature radius R (m)",
        },
    )
    out = render(load_recipe(recipe), tmp_path / "fig.png")
    assert out.exists() and out.stat().st_size > 10_000


def test_render_optimum_style_multipanel(tmp_path, optimum_grids):
    recipe = _write_recipe(
        tmp_path / "opt.recipe.json",
        {
            "grids": [str(p) for p in optimum_grids],
            "titles": ["extraction probability", "curvature radius"],
            "ylog": True,
        },
    )
    out = render(load_recipe(recipe), tmp_path / "opt.png")
    assert out.exists() and out.stat().st_size > 10_000


def test_render_robustness_style_figure(tmp_path, robustness_grid):
    recipe = _write_recipe(
        tmp_path / "rob.recipe.json",
        {
            "grids": [str(robustness_grid)],
            "contour_levels": "degradation",
            "marks": "design",
        },
    )
    grid = read_grid(robustness_grid)
    assert len(grid.fixed["degradation_levels"]) == 6
    out = render(load_recipe(recipe), tmp_path / "rob.png")
    assert out.exists() and out.stat().st_size > 10_000


def test_render_is_deterministic_and_does_not_touch_inputs(tmp_path, clipping_grid):
    before = hashlib.sha256(clipping_grid.read_bytes()).hexdigest()
    recipe = _write_recipe(
        tmp_path / "det.recipe.json",
        {"grids": [str(clipping_grid)], "scale": "log", "contour_levels": [1e-6]},
    )
    out1 = render(load_recipe(recipe), tmp_path / "det1.png")
    out2 = render(load_recipe(recipe), tmp_path / "det2.png")
    assert out1.read_bytes() == out2.read_bytes()
    assert hashlib.sha256(clipping_grid.read_bytes()).hexdigest() == before


def test_out_of_range_level_warns_but_renders(tmp_path, clipping_grid):
    recipe = _write_recipe(
        tmp_path / "warn.recipe.json",
        {"grids": [str(clipping_grid)], "scale": "log", "contour_levels": [1e6]},
    )
    with pytest.warns(UserWarning, match="outside the data range"):
        out = render(load_recipe(recipe), tmp_path / "warn.png")
    assert out.exists()


def test_empty_grid_errors_without_image(tmp_path):
    # a grid whose cells are all infeasible renders nothing
    meta = {
        "axes": [
            {"name": "l", "unit": "m", "values": [1e-4, 2e-4]},
            {"name": "r", "unit": "m", "values": [1e-4, 2e-4]},
        ],
        "quantity": "p_ext",
        "unit": "-",
        "fixed": {},
        "seed": 0,
    }
    csv = tmp_path / "empty.csv"
    csv.write_text(
        "l[m],r[m],p_ext[-],feasible\n"
        + "\n".join("0.0001,0.0001,,0" for _ in range(4))
        + "\n"
    )
    (tmp_path / "empty.meta.json").write_text(json.dumps(meta))
    recipe = _write_recipe(tmp_path / "empty.recipe.json", {"grids": [str(csv)]})
    out = tmp_path / "empty.png"
    with pytest.raises(RenderError):
        render(load_recipe(recipe), out)
    assert not out.exists()


def test_recipe_validation_errors(tmp_path, clipping_grid):
    with pytest.raises(RecipeError, match="not found"):
        load_recipe(tmp_path / "missing.recipe.json")
    bad = _write_recipe(tmp_path / "bad.recipe.json", {"grids": []})
    with pytest.raises(RecipeError, match="at least one grid"):
        load_recipe(bad)
    missing_grid = _write_recipe(
        tmp_path / "mg.recipe.json", {"grids": ["nonexistent.csv"]}
    )
    with pytest.raises(RecipeError, match="not found"):
        load_recipe(missing_grid)
    unknown_key = _write_recipe(
        tmp_path / "uk.recipe.json", {"grids": [str(clipping_grid)], "shiny": True}
    )
    with pytest.raises(RecipeError, match="shiny"):
        load_recipe(unknown_key)
    bad_scale = _write_recipe(
        tmp_path / "bs.recipe.json", {"grids": [str(clipping_grid)], "scale": "cubic"}
    )
    with pytest.raises(RecipeError, match="scale"):
        load_recipe(bad_scale)


def test_cli_entry_point(tmp_path, clipping_grid):
    recipe = _write_recipe(
        tmp_path / "cli.recipe.json",
        {"grids": [str(clipping_grid)], "scale": "log", "contour_levels": [1e-6]},
    )
    out = tmp_path / "cli.png"
    assert main(["--recipe", str(recipe), "--out", str(out)]) == 0
    assert out.exists()
    assert main(["--recipe", str(tmp_path / "missing.json"), "--out", str(out)]) == 1
