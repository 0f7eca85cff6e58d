"""Brute-force oracles: grid search over refinement targets and exhaustive SAT checks.

These are deliberately independent of the analytical refinement code paths so
they can act as ground truth in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .formula import And, CnfInstance, Const, Formula, Implies, Not, Or, Prop, lit_var
from .semantics import Family, ImplicationKind, Logic

__all__ = [
    "OracleResult",
    "grid_min_refine",
    "operator_fn",
    "formula_fn",
    "exhaustive_sat_check",
]


@dataclass
class OracleResult:
    best_vector: np.ndarray | None
    best_distance: float
    feasible_count: int


def _batch_tnorm(family: Family, parts: list[np.ndarray]) -> np.ndarray:
    stack = np.stack(parts, axis=0)
    if family is Family.GODEL:
        return stack.min(axis=0)
    if family is Family.LUKASIEWICZ:
        return np.maximum(stack.sum(axis=0) - (len(parts) - 1), 0.0)
    return stack.prod(axis=0)


def _batch_tconorm(family: Family, parts: list[np.ndarray]) -> np.ndarray:
    stack = np.stack(parts, axis=0)
    if family is Family.GODEL:
        return stack.max(axis=0)
    if family is Family.LUKASIEWICZ:
        return np.minimum(stack.sum(axis=0), 1.0)
    return 1.0 - (1.0 - stack).prod(axis=0)


def _batch_implication(logic: Logic, a: np.ndarray, c: np.ndarray) -> np.ndarray:
    if logic.implication_kind is ImplicationKind.S_IMPLICATION:
        return _batch_tconorm(logic.family, [1.0 - a, c])
    if logic.family is Family.GODEL:
        return np.where(a <= c, 1.0, c)
    if logic.family is Family.LUKASIEWICZ:
        return np.minimum(1.0 - a + c, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(a > 0, c / np.where(a > 0, a, 1.0), 1.0)
    return np.where(a <= c, 1.0, ratio)


def operator_fn(
    logic: Logic,
    op: str,
    constants: Sequence[float] = (),
) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluator for a single operator applied to candidate rows.

    `op` is one of "tnorm", "tconorm", "implication".  For the implication the
    candidate rows are (antecedent, consequent) pairs and constants are not
    allowed.
    """
    c = np.asarray(constants, dtype=float)

    if op == "tnorm":

        def f(candidates: np.ndarray) -> np.ndarray:
            parts = [candidates[:, i] for i in range(candidates.shape[1])]
            parts += [np.full(candidates.shape[0], v) for v in c]
            return _batch_tnorm(logic.family, parts)

        return f
    if op == "tconorm":

        def f(candidates: np.ndarray) -> np.ndarray:
            parts = [candidates[:, i] for i in range(candidates.shape[1])]
            parts += [np.full(candidates.shape[0], v) for v in c]
            return _batch_tconorm(logic.family, parts)

        return f
    if op == "implication":
        if len(c):
            raise ValueError("implication oracle takes no constants")

        def f(candidates: np.ndarray) -> np.ndarray:
            return _batch_implication(logic, candidates[:, 0], candidates[:, 1])

        return f
    raise ValueError(f"unknown operator {op!r}")


def formula_fn(formula: Formula, logic: Logic) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized fuzzy evaluation of a whole formula over candidate rows."""

    def go(node: Formula, rows: np.ndarray) -> np.ndarray:
        match node:
            case Prop(index=i):
                return rows[:, i]
            case Const(value=v):
                return np.full(rows.shape[0], v)
            case Not(child=ch):
                return 1.0 - go(ch, rows)
            case And(children=cs):
                return _batch_tnorm(logic.family, [go(ch, rows) for ch in cs])
            case Or(children=cs):
                return _batch_tconorm(logic.family, [go(ch, rows) for ch in cs])
            case Implies(antecedent=a, consequent=c):
                return _batch_implication(logic, go(a, rows), go(c, rows))
        raise TypeError(f"not a formula node: {node!r}")

    return lambda rows: go(formula, rows)


def grid_min_refine(
    f: Callable[[np.ndarray], np.ndarray],
    t: Sequence[float],
    v_hat: float,
    grid_step: float = 0.02,
    norm: str = "l1",
    feas_tol: float = 0.02,
) -> OracleResult:
    """Exhaustive grid search for the norm-closest feasible refined vector.

    Enumerates the full grid over [0, 1]^n at `grid_step`, keeps candidates
    with |f(candidate) - v_hat| <= feas_tol, and returns the one closest to
    `t` under the requested norm.  Exponential in n; n <= 4 is enforced.
    """
    t = np.asarray(t, dtype=float)
    n = t.size
    if n > 4:
        raise ValueError(f"grid oracle limited to n <= 4, got {n}")
    if norm not in ("l1", "l2"):
        raise ValueError(f"unknown norm {norm!r}")
    axis = np.round(np.arange(0.0, 1.0 + grid_step / 2, grid_step), 12)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    candidates = np.stack([g.ravel() for g in grids], axis=1)
    values = f(candidates)
    feasible = np.abs(values - v_hat) <= feas_tol
    count = int(feasible.sum())
    if count == 0:
        return OracleResult(None, float("inf"), 0)
    rows = candidates[feasible]
    if norm == "l1":
        dists = np.abs(rows - t).sum(axis=1)
    else:
        dists = np.sqrt(((rows - t) ** 2).sum(axis=1))
    best = int(np.argmin(dists))
    return OracleResult(rows[best].copy(), float(dists[best]), count)


def exhaustive_sat_check(
    instance: CnfInstance, chunk_bits: int = 18
) -> tuple[bool, list[bool] | None]:
    """Enumerate all assignments (n <= 24) and return (satisfiable, witness)."""
    n = instance.num_vars
    if n > 24:
        raise ValueError(f"exhaustive check limited to 24 variables, got {n}")
    clause_vars = [np.array([lit_var(l) for l in cl]) for cl in instance.clauses]
    clause_pos = [np.array([l > 0 for l in cl]) for cl in instance.clauses]
    total = 1 << n
    chunk = 1 << min(chunk_bits, n)
    var_bits = np.arange(n, dtype=np.uint64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        assigns = (idx[:, None] >> var_bits[None, :]) & 1  # (chunk, n) in {0,1}
        sat = np.ones(idx.size, dtype=bool)
        for vars_, pos in zip(clause_vars, clause_pos):
            lits = assigns[:, vars_].astype(bool)
            clause_sat = (lits == pos[None, :]).any(axis=1)
            sat &= clause_sat
            if not sat.any():
                break
        hits = np.flatnonzero(sat)
        if hits.size:
            witness = assigns[hits[0]].astype(bool).tolist()
            return True, witness
    return False, None
