#!/usr/bin/env python3
"""Divergence half-angle of the (misaligned) mode over (L, R): the geometric
factor of the cooperativity grows toward the concentric limit."""

import argparse
import json
from pathlib import Path

from ioncavity.cli import RunConfig, run

MISALIGNMENTS_UM = (0, 2, 5)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results/divergence_maps")
    ap.add_argument("--num", type=int, default=61)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    grids, titles = [], []
    for m_um in MISALIGNMENTS_UM:
        out = outdir / f"theta_m{m_um}.csv"
        params = {
            "axes": [
                {"name": "l", "start": "50um", "stop": "600um", "num": args.num},
                {"name": "r", "start": "40um", "stop": "320um", "num": args.num},
            ],
            "fixed": {"m": f"{m_um}um", "lambda": "854nm"},
            "quantity": "theta_eff",
        }
        run(RunConfig("sweep", params, seed=args.seed, out=out, fmt="csv",
                      threads=args.threads))
        grids.append(out.name)
        titles.append(f"M = {m_um} um")
        print(f"wrote {out}")

    recipe = {
        "grids": grids,
        "titles": titles,
        "scale": "linear",
        "xlabel": "cavity length L (m)",
        "ylabel": "mirror curvature radius R (m)",
    }
    recipe_path = outdir / "divergence_maps.recipe.json"
    recipe_path.write_text(json.dumps(recipe, indent=2, sort_keys=True) + "\n")
    print(f"wrote {recipe_path}")


if __name__ == "__main__":
    main()
