#!/usr/bin/env python3
"""Optimised extraction probability and the matching outcoupler transmission
as a function of mode divergence and mirror scattering loss."""

import argparse
import json
from pathlib import Path

from ioncavity.cli import RunConfig, run


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results/extraction_vs_scatter")
    ap.add_argument("--num", type=int, default=81)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    axes = [
        {"name": "theta", "start": 0.01, "stop": 0.35, "num": args.num},
        {"name": "l_scat", "start": "5ppm", "stop": "1000ppm", "num": args.num, "scale": "log"},
    ]
    grids, titles = [], []
    for quantity in ("p_ext", "t_opt"):
        out = outdir / f"{quantity}_map.csv"
        params = {"axes": axes, "fixed": {"alpha": args.alpha}, "quantity": quantity}
        run(RunConfig("sweep", params, seed=args.seed, out=out, fmt="csv"))
        grids.append(out.name)
        titles.append("extraction probability" if quantity == "p_ext" else "optimal transmission")
        print(f"wrote {out}")

    recipe = {
        "grids": grids,
        "titles": titles,
        "scale": "linear",
        "xlabel": "divergence half-angle theta (rad)",
        "ylabel": "scattering loss (round trip)",
        "ylog": True,
    }
    recipe_path = outdir / "extraction_vs_scatter.recipe.json"
    recipe_path.write_text(json.dumps(recipe, indent=2, sort_keys=True) + "\n")
    print(f"wrote {recipe_path}")


if __name__ == "__main__":
    main()
