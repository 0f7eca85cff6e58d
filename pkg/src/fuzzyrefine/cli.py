"""Command line front end: SAT experiment runs, one-off formula refinement, addition demo."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .formula import parse_formula_with_names
from .graddesc import AdamConfig
from .harness import (
    ExperimentConfig,
    generate_3sat,
    generate_satisfiable_3sat,
    load_instances,
    mnist_addition_demo,
    run_experiment,
)
from .ilr import IlrConfig, ilr_run
from .semantics import Logic, evaluate


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.replace(",", " ").split()]


def _add_sat(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("sat", help="run refinement methods over CNF instances")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instances", help="directory of DIMACS .cnf files")
    src.add_argument("--generate", type=int, metavar="N", help="generate N random 3SAT instances")
    p.add_argument("--gen-vars", type=int, default=20)
    p.add_argument("--gen-clauses", type=int, default=91)
    p.add_argument("--gen-mode", choices=["planted", "filtered"], default="planted")
    p.add_argument("--gen-seed", type=int, default=0)
    p.add_argument(
        "--tnorm",
        choices=["godel", "luk", "product"],
        nargs="+",
        default=["godel"],
    )
    p.add_argument("--method", choices=["ilr", "adam", "both"], default="ilr")
    p.add_argument("--alpha", type=float, default=1.0, help="ILR scheduling factor")
    p.add_argument("--target", type=float, default=1.0)
    p.add_argument("--clauses", default="all", help="'all' or a clause count such as 20")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds (0..N-1) per instance")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--ilr-max-iters", type=int, default=100)
    p.add_argument("--adam-iters", type=int, default=500)
    p.add_argument("--adam-lr", type=float, default=0.1)
    p.add_argument("--adam-reg", type=float, default=0.1)


def _cmd_sat(args: argparse.Namespace) -> int:
    if args.instances is not None:
        instances = load_instances(args.instances)
        if not instances:
            print(f"no .cnf instances found in {args.instances}", file=sys.stderr)
            return 1
    else:
        gen = generate_satisfiable_3sat if args.gen_mode == "filtered" else generate_3sat
        instances = [
            (
                f"gen{args.gen_vars}-{args.gen_clauses}-{i:03d}",
                gen(args.gen_vars, args.gen_clauses, seed=args.gen_seed + i),
            )
            for i in range(args.generate)
        ]
    methods = ("ilr", "adam") if args.method == "both" else (args.method,)
    clause_limit = None if args.clauses == "all" else int(args.clauses)
    config = ExperimentConfig(
        instances=instances,
        tnorms=tuple(args.tnorm),
        methods=methods,
        alpha=args.alpha,
        target=args.target,
        clause_limit=clause_limit,
        seeds=tuple(range(args.seeds)),
        ilr=IlrConfig(max_iters=args.ilr_max_iters),
        adam=AdamConfig(
            learning_rate=args.adam_lr, alpha_reg=args.adam_reg, max_iters=args.adam_iters
        ),
        out_path=args.out,
    )
    records = run_experiment(config)
    runs = {(r.instance_id, r.seed, r.method, r.tnorm) for r in records}
    print(f"wrote {len(records)} rows from {len(runs)} runs to {args.out}")
    return 0


def _add_formula(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("formula", help="refine a truth vector against a DSL formula")
    p.add_argument("--dsl", required=True)
    p.add_argument("--t0", required=True, help="comma separated initial truth values")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--tnorm", choices=["godel", "luk", "product"], default="godel")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=100)


def _cmd_formula(args: argparse.Namespace) -> int:
    formula, names = parse_formula_with_names(args.dsl)
    t0 = np.array(_float_list(args.t0))
    if len(names) > t0.size:
        print(f"formula uses {len(names)} propositions, t0 has {t0.size}", file=sys.stderr)
        return 1
    logic = Logic.from_name(args.tnorm)
    f0, _ = evaluate(formula, t0, logic)
    outcome = ilr_run(
        formula, t0, args.target, logic, IlrConfig(alpha=args.alpha, max_iters=args.max_iters)
    )
    f1, _ = evaluate(formula, outcome.refined, logic)
    print(f"propositions: {', '.join(names)}")
    print(f"initial value {f0:.6f} -> refined value {f1:.6f} (target {args.target})")
    print(f"converged={outcome.converged} iterations={outcome.iterations_run}")
    print("refined:", np.array2string(outcome.refined, precision=6))
    return 0


def _add_demo(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("demo-addition", help="digit-addition knowledge demo")
    p.add_argument("--px", required=True, help="10 comma separated digit beliefs for x")
    p.add_argument("--py", required=True, help="10 comma separated digit beliefs for y")


def _cmd_demo(args: argparse.Namespace) -> int:
    px, py = _float_list(args.px), _float_list(args.py)
    sums = mnist_addition_demo(px, py)
    for s, value in enumerate(sums):
        if value > 0:
            print(f"sum {s:2d}: {value:.4f}")
    if not np.any(sums > 0):
        print("no sum receives positive belief")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="refine",
        description="Refine fuzzy truth assignments toward formula targets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_sat(sub)
    _add_formula(sub)
    _add_demo(sub)
    args = parser.parse_args(argv)
    if args.command == "sat":
        return _cmd_sat(args)
    if args.command == "formula":
        return _cmd_formula(args)
    return _cmd_demo(args)


if __name__ == "__main__":
    sys.exit(main())
