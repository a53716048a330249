import json
import subprocess
import sys

import pytest


def run_ioncavity(mode: str, parameters: dict, out_path, seed: int = 1) -> None:
    """Produce a grid through the primary CLI (external interface only)."""
    cfg = out_path.parent / f"{out_path.stem}.config.json"
    cfg.write_text(json.dumps({"mode": mode, "parameters": parameters, "seed": seed}))
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "ioncavity",
            mode,
            "--config",
            str(cfg),
            "--out",
            str(out_path),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr


@pytest.fixture(scope="session")
def clipping_grid(tmp_path_factory):
    """A clipping-loss map with a stability hole and a 1 ppm crossing."""
    out = tmp_path_factory.mktemp("grids") / "clip.csv"
    run_ioncavity(
        "sweep",
        {
            "axes": [
                {"name": "l", "start": "150um", "stop": "460um", "num": 24},
                {"name": "r", "start": "80um", "stop": "260um", "num": 20},
            ],
            "fixed": {"d": "200um", "m": "5um", "lambda": "854nm"},
            "quantity": "clipping_loss",
        },
        out,
    )
    return out


@pytest.fixture(scope="session")
def robustness_grid(tmp_path_factory):
    """A length-transmission robustness map with design point and levels."""
    out = tmp_path_factory.mktemp("grids") / "robust.csv"
    run_ioncavity(
        "robustness",
        {
            "scenario": "length-transmission",
            "constraints": {
                "l_min": "125um",
                "v_max": "10pL",
                "m": "5um",
                "l_scat": "100ppm",
            },
            "n_primary": 31,
            "n_secondary": 41,
        },
        out,
    )
    return out


@pytest.fixture(scope="session")
def optimum_grids(tmp_path_factory):
    """Small optimal-design field maps (each cell runs the optimiser)."""
    base = tmp_path_factory.mktemp("grids")
    axes = [
        {"name": "l_min", "start": "125um", "stop": "300um", "num": 2},
        {"name": "v_max", "start": "5pL", "stop": "20pL", "num": 2},
    ]
    fixed = {"m": "5um", "l_scat": "100ppm", "alpha": 0.05, "lambda": "854nm"}
    paths = []
    for quantity in ("optimal_p_ext", "optimal_r"):
        out = base / f"{quantity}.csv"
        run_ioncavity(
            "sweep", {"axes": axes, "fixed": fixed, "quantity": quantity}, out
        )
        paths.append(out)
    return paths
