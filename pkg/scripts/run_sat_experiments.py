#!/usr/bin/env python3
"""Run the full SAT refinement grid and write one CSV per (target, clause limit).

Covers both methods, the three operator families, and both scheduling factors
over a bank of generated 20-variable / 91-clause instances.  Outputs feed
plots/plot_results.py directly.
"""

import argparse
import itertools
from pathlib import Path

from fuzzyrefine.graddesc import AdamConfig
from fuzzyrefine.harness import (
    ExperimentConfig,
    generate_3sat,
    generate_satisfiable_3sat,
    run_experiment,
    write_records,
    write_summary,
)
from fuzzyrefine.ilr import IlrConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--instances", type=int, default=100)
    parser.add_argument("--seeds", type=int, default=1)
    parser.add_argument("--targets", type=float, nargs="+", default=[1.0, 0.5, 0.3])
    parser.add_argument("--alphas", type=float, nargs="+", default=[1.0, 0.1])
    parser.add_argument(
        "--gen-mode",
        choices=["planted", "filtered"],
        default="planted",
        help="filtered rejection-samples uniform instances through the exact SAT check",
    )
    parser.add_argument("--quick", action="store_true", help="5 instances, target 1.0 only")
    args = parser.parse_args()

    if args.quick:
        args.instances, args.targets, args.alphas = 5, [1.0], [1.0]

    gen = generate_satisfiable_3sat if args.gen_mode == "filtered" else generate_3sat
    instances = [(f"gen20-91-{i:03d}", gen(20, 91, seed=i)) for i in range(args.instances)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for target, clause_limit in itertools.product(args.targets, [None, 20]):
        tag = f"target{target}_clauses{clause_limit or 'all'}"
        out = out_dir / f"sat_{tag}.csv"
        records = []
        for k, alpha in enumerate(args.alphas):
            # ILR reruns per scheduling factor; the schedule-free ADAM baseline
            # only needs one pass
            methods = ("ilr", "adam") if k == 0 else ("ilr",)
            config = ExperimentConfig(
                instances=instances,
                tnorms=("godel", "luk", "product"),
                methods=methods,
                alpha=alpha,
                target=target,
                clause_limit=clause_limit,
                seeds=tuple(range(args.seeds)),
                ilr=IlrConfig(),
                adam=AdamConfig(),
            )
            records.extend(run_experiment(config))
        write_records(records, out)
        write_summary(records, out.with_name(out.stem + "_summary.csv"))
        print(f"{tag}: {len(records)} rows -> {out}")


if __name__ == "__main__":
    main()
