#!/usr/bin/env python3
"""Regenerate all figure bundles and print the final-MSE summary table.

Runs every built-in figure recipe through the CLI (so the output is exactly
what `paofed figures` produces), then reads the manifests back and prints
mean final MSE per curve. Expect a few minutes of compute at the default
ten seeds.
"""

import argparse
import json
import sys
from pathlib import Path

from paofed.cli import FIGURE_RECIPES, main


def run(out_dir: Path, seeds: str | None) -> int:
    args = ["figures", "--out", str(out_dir)]
    if seeds:
        args += ["--seeds", seeds]
    status = main(args)
    if status != 0:
        return status

    for name in FIGURE_RECIPES:
        manifest = json.loads((out_dir / name / "manifest.json").read_text())
        print(f"\n{manifest['figure']['title']}  [{name}]")
        for label in manifest["curve_order"]:
            curve = manifest["curves"][label]
            print(f"  {label:<18} {curve['final_mse_db_mean']:8.3f} dB")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/figures", type=Path)
    parser.add_argument("--seeds", default=None, help="seed count or comma list")
    opts = parser.parse_args()
    sys.exit(run(opts.out, opts.seeds))
