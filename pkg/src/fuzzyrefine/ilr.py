"""Iterative local refinement of a truth vector toward a formula target.

Each iteration evaluates the formula bottom-up, schedules an intermediate
target, then walks the tree top-down replacing every operator with its
minimal refinement function.  Propositions constrained by several branches
keep the candidate that moves them furthest from the current iterate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .formula import And, Const, Formula, Implies, Not, Or, Prop, max_prop_index, prop_indices
from .refine import refine_implication, refine_tconorm, refine_tnorm
from .semantics import EvalTrace, Logic, evaluate

__all__ = ["IlrConfig", "IlrOutcome", "ilr_run", "backward"]


@dataclass(frozen=True)
class IlrConfig:
    alpha: float = 1.0
    max_iters: int = 100
    patience: int = 3
    tolerance: float = 1e-9
    tie_break: str = "lowest"  # "lowest" | "random"
    seed: int | None = None
    epsilon: float = 1e-6  # Godel residuum bump
    literal_combine: bool = False  # zero-initialized |value| combination (A/B variant)

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.patience < 0:
            raise ValueError("patience must be non-negative")
        if self.tie_break not in ("lowest", "random"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    def make_rng(self) -> np.random.Generator | None:
        if self.tie_break == "random":
            return np.random.default_rng(self.seed)
        return None


@dataclass
class IlrOutcome:
    refined: np.ndarray
    trace: list[tuple[int, float, float]]  # (iteration, satisfaction, l1 from t0)
    converged: bool
    iterations_run: int


@dataclass
class _Pass:
    logic: Logic
    config: IlrConfig
    rng: np.random.Generator | None
    trace: EvalTrace
    current: np.ndarray
    scopes: dict[int, frozenset] = field(default_factory=dict)

    def scope(self, node: Formula) -> frozenset:
        key = id(node)
        if key not in self.scopes:
            self.scopes[key] = prop_indices(node)
        return self.scopes[key]


def _combine(state: _Pass, acc: np.ndarray, candidate: np.ndarray) -> np.ndarray:
    if state.config.literal_combine:
        take = np.abs(candidate) > np.abs(acc)
    else:
        take = np.abs(candidate - state.current) > np.abs(acc - state.current)
    acc[take] = candidate[take]
    return acc


def _backward(node: Formula, target: float, state: _Pass) -> np.ndarray:
    match node:
        case Prop(index=i):
            out = state.current.copy()
            out[i] = min(max(float(target), 0.0), 1.0)
            return out
        case Const():
            return state.current.copy()
        case Not(child=child):
            return _backward(child, 1.0 - target, state)
        case Implies(antecedent=ante, consequent=cons):
            new_a, new_c = refine_implication(
                state.logic,
                state.trace[ante],
                state.trace[cons],
                target,
                epsilon=state.config.epsilon,
                rng=state.rng,
            )
            branches = []
            if state.scope(ante):
                branches.append(_backward(ante, new_a, state))
            if state.scope(cons):
                branches.append(_backward(cons, new_c, state))
            if not branches:
                return state.current.copy()
            acc = (
                np.zeros_like(state.current)
                if state.config.literal_combine
                else state.current.copy()
            )
            for cand in branches:
                acc = _combine(state, acc, cand)
            return acc
        case And(children=children) | Or(children=children):
            refinable = [ch for ch in children if state.scope(ch)]
            if not refinable:
                return state.current.copy()
            fixed = [state.trace[ch] for ch in children if not state.scope(ch)]
            values = np.array([state.trace[ch] for ch in refinable])
            refine = refine_tnorm if isinstance(node, And) else refine_tconorm
            component_targets = refine(
                state.logic, values, target, constants=fixed, rng=state.rng
            )
            acc = (
                np.zeros_like(state.current)
                if state.config.literal_combine
                else state.current.copy()
            )
            for child, child_target in zip(refinable, component_targets):
                acc = _combine(state, acc, _backward(child, float(child_target), state))
            return acc
    raise TypeError(f"not a formula node: {node!r}")


def backward(
    node: Formula,
    target: float,
    trace: EvalTrace,
    current: np.ndarray,
    logic: Logic,
    config: IlrConfig | None = None,
) -> np.ndarray:
    """One top-down refinement pass below `node` against its cached forward trace.

    Returns a full-length vector: propositions in the node's scope carry their
    refined values, all others the current values.
    """
    config = config or IlrConfig()
    state = _Pass(logic, config, config.make_rng(), trace, np.asarray(current, dtype=float))
    return _backward(node, float(target), state)


def ilr_run(
    formula: Formula,
    t0,
    v_hat: float,
    logic: Logic,
    config: IlrConfig | None = None,
) -> IlrOutcome:
    """Iterate forward evaluation and backward refinement until convergence.

    Convergence means the target distance |f(t) - v_hat| dropped below the
    tolerance, the iterates settled into a fixed point or a two-cycle, or the
    distance stopped improving for `patience` consecutive iterations.
    """
    config = config or IlrConfig()
    t0 = np.asarray(t0, dtype=float)
    if t0.ndim != 1:
        raise ValueError("t0 must be a flat vector")
    if not np.all(np.isfinite(t0)):
        raise ValueError("t0 contains NaN or infinity")
    t0 = np.clip(t0, 0.0, 1.0)
    if not 0.0 <= v_hat <= 1.0:
        raise ValueError(f"target {v_hat} outside [0, 1]")
    top = max_prop_index(formula)
    if top >= t0.size:
        raise IndexError(f"formula references proposition {top}, t0 has length {t0.size}")

    rng = config.make_rng()
    state = _Pass(logic, config, rng, EvalTrace(), t0.copy())

    current = t0.copy()
    f_cur, trace = evaluate(formula, current, logic)
    if abs(f_cur - v_hat) <= config.tolerance:
        return IlrOutcome(current, [], True, 0)

    history: list[tuple[int, float, float]] = []
    best = abs(f_cur - v_hat)
    stall = 0
    previous = None  # iterate two steps back, for two-cycle detection
    converged = False
    iterations = 0
    for iteration in range(1, config.max_iters + 1):
        iterations = iteration
        scheduled = f_cur + (v_hat - f_cur) * config.alpha
        state.trace = trace
        state.current = current
        new = _backward(formula, scheduled, state)
        f_new, new_trace = evaluate(formula, new, logic)
        history.append((iteration, f_new, float(np.abs(new - t0).sum())))
        dist = abs(f_new - v_hat)
        if dist <= config.tolerance:
            converged = True
            current = new
            break
        cycled = np.allclose(new, current, atol=1e-12) or (
            previous is not None and np.allclose(new, previous, atol=1e-12)
        )
        if cycled:
            converged = True
            current = new
            break
        if dist > best - config.tolerance:
            stall += 1
        else:
            stall = 0
        best = min(best, dist)
        previous = current
        current = new
        f_cur, trace = f_new, new_trace
        # patience = 0 stops at the first non-improving iteration
        if stall > 0 and stall >= config.patience:
            converged = True
            break
    return IlrOutcome(current, history, converged, iterations)
