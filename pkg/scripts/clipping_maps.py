#!/usr/bin/env python3
"""Clipping-loss maps over (L, R) for a matrix of mirror diameters and
misalignments, with the 1 ppm contour. Writes grid CSVs plus a plot recipe
consumable by the cavityplots package."""

import argparse
import json
from pathlib import Path

from ioncavity.cli import RunConfig, run

DIAMETERS_UM = (100, 200)
MISALIGNMENTS_UM = (2, 5)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results/clipping_maps")
    ap.add_argument("--num", type=int, default=61, help="grid points per axis")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    grids = []
    titles = []
    for m_um in MISALIGNMENTS_UM:
        for d_um in DIAMETERS_UM:
            out = outdir / f"clip_d{d_um}_m{m_um}.csv"
            params = {
                "axes": [
                    {"name": "l", "start": "50um", "stop": "600um", "num": args.num},
                    {"name": "r", "start": "40um", "stop": "320um", "num": args.num},
                ],
                "fixed": {"d": f"{d_um}um", "m": f"{m_um}um", "lambda": "854nm"},
                "quantity": "clipping_loss",
            }
            run(RunConfig("sweep", params, seed=args.seed, out=out, fmt="csv",
                          threads=args.threads))
            grids.append(out.name)
            titles.append(f"D = {d_um} um, M = {m_um} um")
            print(f"wrote {out}")

    recipe = {
        "grids": grids,
        "titles": titles,
        "scale": "log",
        "contour_levels": [1e-6],
        "xlabel": "cavity length L (m)",
        "ylabel": "mirror curvature radius R (m)",
    }
    recipe_path = outdir / "clipping_maps.recipe.json"
    recipe_path.write_text(json.dumps(recipe, indent=2, sort_keys=True) + "\n")
    print(f"wrote {recipe_path}")


if __name__ == "__main__":
    main()
