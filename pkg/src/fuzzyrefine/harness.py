"""Experiment driver: SAT refinement runs, instance generation, CSV emission.

A run takes one CNF instance, draws a uniform initial truth vector per seed,
feeds the identical vector to every method, and records one row per
iteration.  A digit-addition demo shows single-step inference over an
addition knowledge base.
"""

from __future__ import annotations

import csv
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .formula import And, CnfInstance, Const, Formula, Implies, Prop, cnf_to_formula, parse_dimacs
from .graddesc import AdamConfig, adam_run
from .ilr import IlrConfig, IlrOutcome, ilr_run
from .oracle import exhaustive_sat_check
from .semantics import Logic, evaluate

__all__ = [
    "RunRecord",
    "ExperimentConfig",
    "run_experiment",
    "write_records",
    "read_records",
    "write_summary",
    "load_instances",
    "generate_3sat",
    "generate_satisfiable_3sat",
    "addition_knowledge_base",
    "mnist_addition_demo",
    "CSV_FIELDS",
]

CSV_FIELDS = [
    "instance_id",
    "method",
    "tnorm",
    "alpha",
    "target",
    "iteration",
    "satisfaction",
    "l1_delta",
    "converged",
    "wall_ms",
    "seed",
]


@dataclass
class RunRecord:
    instance_id: str
    method: str
    tnorm: str
    alpha: float
    target: float
    iteration: int
    satisfaction: float
    l1_delta: float
    converged: bool
    wall_ms: float
    seed: int

    def to_row(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "method": self.method,
            "tnorm": self.tnorm,
            "alpha": self.alpha,
            "target": self.target,
            "iteration": self.iteration,
            "satisfaction": repr(self.satisfaction),
            "l1_delta": repr(self.l1_delta),
            "converged": int(self.converged),
            "wall_ms": f"{self.wall_ms:.3f}",
            "seed": self.seed,
        }

    @classmethod
    def from_row(cls, row: dict) -> "RunRecord":
        return cls(
            instance_id=row["instance_id"],
            method=row["method"],
            tnorm=row["tnorm"],
            alpha=float(row["alpha"]),
            target=float(row["target"]),
            iteration=int(row["iteration"]),
            satisfaction=float(row["satisfaction"]),
            l1_delta=float(row["l1_delta"]),
            converged=bool(int(row["converged"])),
            wall_ms=float(row["wall_ms"]),
            seed=int(row["seed"]),
        )


@dataclass
class ExperimentConfig:
    instances: list[tuple[str, CnfInstance]]
    tnorms: tuple[str, ...] = ("godel",)
    methods: tuple[str, ...] = ("ilr",)
    alpha: float = 1.0
    target: float = 1.0
    clause_limit: int | None = None  # None = all clauses
    seeds: tuple[int, ...] = (0,)
    ilr: IlrConfig = field(default_factory=IlrConfig)
    adam: AdamConfig = field(default_factory=AdamConfig)
    out_path: str | Path | None = None

    def __post_init__(self):
        if not self.instances:
            raise ValueError("at least one instance is required")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if not 0.0 <= self.target <= 1.0:
            raise ValueError("target outside [0, 1]")
        for method in self.methods:
            if method not in ("ilr", "adam"):
                raise ValueError(f"unknown method {method!r}")
        if self.clause_limit is not None:
            shortest = min(inst.num_clauses for _, inst in self.instances)
            if self.clause_limit > shortest:
                raise ValueError(
                    f"clause_limit {self.clause_limit} exceeds shortest instance ({shortest})"
                )


def _run_method(
    method: str,
    formula: Formula,
    t0: np.ndarray,
    config: ExperimentConfig,
    logic: Logic,
) -> tuple[IlrOutcome, float]:
    start = time.perf_counter()
    if method == "ilr":
        outcome = ilr_run(formula, t0, config.target, logic, replace(config.ilr, alpha=config.alpha))
    else:
        outcome = adam_run(formula, t0, config.target, logic, config.adam)
    return outcome, (time.perf_counter() - start) * 1e3


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Run every (instance, seed, tnorm, method) cell and optionally write CSVs.

    The initial truth vector depends only on (instance, seed) so all methods
    and operator families start from the same point.
    """
    records: list[RunRecord] = []
    for idx, (name, instance) in enumerate(config.instances):
        formula = cnf_to_formula(instance, config.clause_limit)
        for seed in config.seeds:
            t0 = np.random.default_rng([seed, idx]).uniform(size=instance.num_vars)
            for tnorm in config.tnorms:
                logic = Logic.from_name(tnorm)
                f0, _ = evaluate(formula, t0, logic)
                for method in config.methods:
                    outcome, wall = _run_method(method, formula, t0, config, logic)
                    base = dict(
                        instance_id=name,
                        method=method,
                        tnorm=tnorm,
                        alpha=config.alpha,
                        target=config.target,
                        converged=outcome.converged,
                        wall_ms=wall,
                        seed=seed,
                    )
                    records.append(
                        RunRecord(iteration=0, satisfaction=f0, l1_delta=0.0, **base)
                    )
                    for iteration, sat, l1 in outcome.trace:
                        records.append(
                            RunRecord(iteration=iteration, satisfaction=sat, l1_delta=l1, **base)
                        )
    if config.out_path is not None:
        out = Path(config.out_path)
        write_records(records, out)
        write_summary(records, out.with_name(out.stem + "_summary" + out.suffix))
    return records


def write_records(records: Iterable[RunRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_row())


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        return [RunRecord.from_row(row) for row in csv.DictReader(fh)]


def _run_key(r: RunRecord) -> tuple:
    return (r.instance_id, r.seed, r.method, r.tnorm, r.alpha, r.target)


def summarize(records: Sequence[RunRecord]) -> list[dict]:
    """Mean satisfaction/L1 curves per (method, tnorm, alpha, target, iteration).

    Runs that end early hold their final value so every mean covers all runs.
    """
    runs: dict[tuple, list[RunRecord]] = {}
    for r in records:
        runs.setdefault(_run_key(r), []).append(r)
    groups: dict[tuple, list[tuple[np.ndarray, np.ndarray]]] = {}
    for key, rows in runs.items():
        rows = sorted(rows, key=lambda r: r.iteration)
        sat = np.array([r.satisfaction for r in rows])
        l1 = np.array([r.l1_delta for r in rows])
        groups.setdefault(key[2:], []).append((sat, l1))
    out = []
    for gkey in sorted(groups):
        curves = groups[gkey]
        horizon = max(len(sat) for sat, _ in curves)
        sat_mat = np.stack(
            [np.concatenate([sat, np.full(horizon - len(sat), sat[-1])]) for sat, _ in curves]
        )
        l1_mat = np.stack(
            [np.concatenate([l1, np.full(horizon - len(l1), l1[-1])]) for _, l1 in curves]
        )
        method, tnorm, alpha, target = gkey
        for iteration in range(horizon):
            out.append(
                {
                    "method": method,
                    "tnorm": tnorm,
                    "alpha": alpha,
                    "target": target,
                    "iteration": iteration,
                    "mean_satisfaction": float(sat_mat[:, iteration].mean()),
                    "mean_l1": float(l1_mat[:, iteration].mean()),
                    "runs": len(curves),
                }
            )
    return out


def write_summary(records: Sequence[RunRecord], path: str | Path) -> None:
    rows = summarize(records)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = ["method", "tnorm", "alpha", "target", "iteration", "mean_satisfaction", "mean_l1", "runs"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def load_instances(directory: str | Path, pattern: str = "*.cnf") -> list[tuple[str, CnfInstance]]:
    """Parse every matching DIMACS file; unreadable files warn and are skipped."""
    out = []
    for path in sorted(Path(directory).glob(pattern)):
        try:
            out.append((path.stem, parse_dimacs(path.read_text(), strict=False)))
        except (OSError, ValueError) as exc:
            warnings.warn(f"skipping {path}: {exc}", stacklevel=2)
    return out


def generate_3sat(
    n: int = 20,
    c: int = 91,
    seed: int = 0,
    planted: bool = True,
) -> CnfInstance:
    """Uniform random 3SAT; `planted` resamples clauses until a hidden assignment satisfies them."""
    if n < 3:
        raise ValueError("need at least 3 variables for 3-literal clauses")
    if c < 1:
        raise ValueError("need at least one clause")
    rng = np.random.default_rng(seed)
    assignment = rng.integers(0, 2, size=n).astype(bool) if planted else None
    clauses = []
    for _ in range(c):
        while True:
            variables = rng.choice(n, size=3, replace=False)
            signs = rng.integers(0, 2, size=3).astype(bool)
            if assignment is None or np.any(assignment[variables] == signs):
                break
        clauses.append(
            tuple(int(v) + 1 if s else -(int(v) + 1) for v, s in zip(variables, signs))
        )
    return CnfInstance(n, tuple(clauses))


def generate_satisfiable_3sat(
    n: int = 20,
    c: int = 91,
    seed: int = 0,
    max_tries: int = 200,
) -> CnfInstance:
    """Uniform random 3SAT conditioned on satisfiability by rejection sampling."""
    for attempt in range(max_tries):
        instance = generate_3sat(n, c, seed=(seed, attempt), planted=False)
        satisfiable, _ = exhaustive_sat_check(instance)
        if satisfiable:
            return instance
    raise RuntimeError(f"no satisfiable instance found in {max_tries} tries")


def addition_knowledge_base(px: Sequence[float], py: Sequence[float]) -> Formula:
    """Conjunction of the 100 digit-addition rules with the digit beliefs as constants.

    Propositions 0..18 are the possible sums; rule (d1, d2) reads
    "digit x is d1 and digit y is d2 implies the sum is d1 + d2".
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    if px.shape != (10,) or py.shape != (10,):
        raise ValueError("digit distributions must have length 10")
    rules = []
    for d1 in range(10):
        for d2 in range(10):
            antecedent = And((Const(float(px[d1])), Const(float(py[d2]))))
            rules.append(Implies(antecedent, Prop(d1 + d2)))
    return And(tuple(rules))


def mnist_addition_demo(
    px: Sequence[float],
    py: Sequence[float],
    logic: Logic | None = None,
) -> np.ndarray:
    """Single-step inference of sum truth values from two digit distributions.

    The 19 sum propositions start at zero and one refinement step with target
    1 fills them in; under the Godel operators entry s equals
    max over d1 + d2 = s of min(px[d1], py[d2]).
    """
    logic = logic or Logic.godel()
    formula = addition_knowledge_base(px, py)
    outcome = ilr_run(formula, np.zeros(19), 1.0, logic, IlrConfig(alpha=1.0, max_iters=1))
    return outcome.refined
