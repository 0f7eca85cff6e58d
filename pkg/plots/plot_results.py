#!/usr/bin/env python3
"""Render satisfaction / L1 convergence grids from refinement-run CSVs.

Consumes the run CSVs written by the experiment harness (columns
instance_id, method, tnorm, alpha, target, iteration, satisfaction,
l1_delta, converged, wall_ms, seed) and draws, per target value, a grid
with one column per operator family and two rows: mean satisfaction and
mean L1 distance against iteration, one curve per (method, alpha).
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

REQUIRED_COLUMNS = [
    "instance_id",
    "method",
    "tnorm",
    "alpha",
    "target",
    "iteration",
    "satisfaction",
    "l1_delta",
    "seed",
]

FAMILY_ORDER = ["godel", "goedel", "minimum", "luk", "lukasiewicz", "product", "prod"]
FAMILY_LABELS = {
    "godel": "Godel",
    "goedel": "Godel",
    "minimum": "Godel",
    "luk": "Lukasiewicz",
    "lukasiewicz": "Lukasiewicz",
    "product": "Product",
    "prod": "Product",
}

# deterministic SVG output: fixed hash salt, no embedded creation date
matplotlib.rcParams["svg.hashsalt"] = "refinement-plots"


@dataclass
class PlotSpec:
    csv_paths: list[Path]
    out_dir: Path
    fmt: str = "svg"
    group_keys: tuple[str, ...] = ("tnorm", "method", "alpha")
    band: bool = False  # draw +-1 standard deviation around each mean curve
    prefix: str = "refinement_curves"

    def __post_init__(self):
        self.csv_paths = [Path(p) for p in self.csv_paths]
        self.out_dir = Path(self.out_dir)
        if self.fmt not in ("png", "svg"):
            raise ValueError(f"unsupported format {self.fmt!r}")


def load_runs(paths: list[Path]) -> pd.DataFrame:
    frames = []
    for path in paths:
        frame = pd.read_csv(path)
        missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
        frames.append(frame)
    data = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    return data


def mean_curves(data: pd.DataFrame, band: bool) -> pd.DataFrame:
    """Mean satisfaction/L1 per (target, tnorm, method, alpha, iteration).

    Runs that stopped early hold their last value so every iteration of a
    group averages over all of its runs.
    """
    run_keys = ["target", "tnorm", "method", "alpha", "instance_id", "seed"]
    padded = []
    for group_key, group in data.groupby(["target", "tnorm", "method", "alpha"], sort=True):
        horizon = int(group["iteration"].max())
        for _, run in group.groupby(["instance_id", "seed"], sort=True):
            run = run.sort_values("iteration").set_index("iteration")
            run = run.reindex(range(horizon + 1)).ffill()
            run = run[["satisfaction", "l1_delta"]].reset_index()
            for column, value in zip(["target", "tnorm", "method", "alpha"], group_key):
                run[column] = value
            padded.append(run)
    full = pd.concat(padded, ignore_index=True)
    stats = (
        full.groupby(["target", "tnorm", "method", "alpha", "iteration"], sort=True)
        .agg(
            satisfaction=("satisfaction", "mean"),
            satisfaction_std=("satisfaction", "std"),
            l1_delta=("l1_delta", "mean"),
            l1_delta_std=("l1_delta", "std"),
            runs=("satisfaction", "size"),
        )
        .reset_index()
    )
    return stats.fillna(0.0)


def family_columns(present: set[str]) -> list[str]:
    ordered = [f for f in FAMILY_ORDER if f in present]
    extra = sorted(present - set(FAMILY_ORDER))
    if extra:
        warnings.warn(f"unknown operator families plotted last: {extra}", stacklevel=2)
    return ordered + extra


def build_figure(curves: pd.DataFrame, target: float, band: bool) -> plt.Figure:
    """One grid for a single target: two metric rows, one column per family."""
    families = family_columns(set(curves["tnorm"]))
    ncols = max(len(families), 1)
    fig, axes = plt.subplots(2, ncols, figsize=(4.0 * ncols, 6.0), squeeze=False, sharex="col")
    metrics = [("satisfaction", "formula value"), ("l1_delta", "L1 distance")]
    for col, family in enumerate(families):
        block = curves[curves["tnorm"] == family]
        for row, (metric, label) in enumerate(metrics):
            ax = axes[row][col]
            for (method, alpha), curve in block.groupby(["method", "alpha"], sort=True):
                curve = curve.sort_values("iteration")
                name = f"{method} (alpha={alpha})" if method == "ilr" else method
                ax.plot(curve["iteration"], curve[metric], label=name, linewidth=1.5)
                if band:
                    std = curve[f"{metric}_std"]
                    ax.fill_between(
                        curve["iteration"],
                        curve[metric] - std,
                        curve[metric] + std,
                        alpha=0.15,
                    )
            if row == 0:
                ax.set_title(FAMILY_LABELS.get(family, family))
                ax.set_ylim(-0.02, 1.02)
                ax.axhline(target, color="grey", linewidth=0.8, linestyle=":")
            if col == 0:
                ax.set_ylabel(label)
            ax.set_xlabel("iteration")
            ax.set_xscale("symlog")
    handles, labels = axes[0][0].get_legend_handles_labels()
    if handles:
        fig.legend(handles, labels, loc="lower center", ncol=min(len(labels), 4))
    fig.suptitle(f"Refinement toward target {target:g}")
    fig.tight_layout(rect=(0, 0.06, 1, 0.97))
    return fig


def render(spec: PlotSpec) -> list[Path]:
    """Write one grid image per target value found in the input CSVs."""
    data = load_runs(spec.csv_paths)
    if data.empty:
        print("no rows to plot; nothing written")
        return []
    for key in spec.group_keys:
        if key not in data.columns:
            raise ValueError(f"missing column(s) {key}")
    curves = mean_curves(data, spec.band)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for target, block in curves.groupby("target", sort=True):
        fig = build_figure(block, float(target), spec.band)
        out = spec.out_dir / f"{spec.prefix}_target{target:g}.{spec.fmt}"
        metadata = {"Date": None} if spec.fmt == "svg" else None
        fig.savefig(out, format=spec.fmt, metadata=metadata)
        plt.close(fig)
        written.append(out)
        print(f"wrote {out}")
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", nargs="+", required=True, help="harness run CSV file(s)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=["png", "svg"], default="svg")
    parser.add_argument("--band", action="store_true", help="draw +-1 s.d. bands")
    args = parser.parse_args(argv)
    spec = PlotSpec(csv_paths=args.csv, out_dir=args.out, fmt=args.format, band=args.band)
    render(spec)
    return 0


if __name__ == "__main__":
    sys.exit(main())
