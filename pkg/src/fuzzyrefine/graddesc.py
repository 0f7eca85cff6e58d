"""Gradient-descent baseline: reverse-mode differentiation of fuzzy evaluation plus ADAM.

Truth values are parameterized as sigmoid(z) so the optimizer is
unconstrained.  The loss is squared target error plus a distance
regularizer; for the product family on conjunctions the satisfaction term
optimizes the log of the product, and for Lukasiewicz conjunctions the
root max(. , 0) clamp is dropped inside the loss so gradients do not vanish.
Reported satisfaction always uses the true, unmodified semantics.

CNF-shaped formulas (a conjunction of literal disjunctions of uniform width)
run on a vectorized numpy path; everything else uses a scalar operation tape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .formula import And, Const, Formula, Implies, Not, Or, Prop, max_prop_index
from .ilr import IlrOutcome
from .semantics import Family, ImplicationKind, Logic

__all__ = ["AdamConfig", "GradTape", "eval_with_grad", "adam_run", "sigmoid", "logit"]


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    # 0.001 keeps the regularizer's constant L1 subgradient small enough that
    # the optimizer can actually close the last 1e-3 of target error on
    # satisfiable instances; larger weights stall short of feasibility.
    alpha_reg: float = 0.001
    reg_norm_p: int = 1
    max_iters: int = 500
    seed: int | None = None

    def __post_init__(self):
        if self.learning_rate <= 0 or self.eps_hat <= 0:
            raise ValueError("rates must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")
        if self.reg_norm_p not in (1, 2):
            raise ValueError("reg_norm_p must be 1 or 2")


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logit(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.log(t) - np.log1p(-t)


# --------------------------------------------------------------------------
# Scalar operation tape
# --------------------------------------------------------------------------


@dataclass
class TapeNode:
    op: str
    value: float
    parents: tuple[int, ...] = ()
    payload: object = None
    adjoint: float = 0.0


@dataclass
class GradTape:
    """Topologically ordered record of the elementary operations of one evaluation."""

    nodes: list[TapeNode] = field(default_factory=list)

    def append(self, node: TapeNode) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def value(self, idx: int) -> float:
        return self.nodes[idx].value

    def backward(self, seeds: dict[int, float]) -> None:
        """Accumulate adjoints from seed nodes down to the leaves, each node once."""
        for node in self.nodes:
            node.adjoint = 0.0
        for idx, seed in seeds.items():
            self.nodes[idx].adjoint += seed
        for idx in range(len(self.nodes) - 1, -1, -1):
            node = self.nodes[idx]
            if node.adjoint == 0.0 or not node.parents:
                continue
            adj = node.adjoint
            if node.op == "not":
                self.nodes[node.parents[0]].adjoint -= adj
            elif node.op in ("min", "max"):
                # subgradient routed to the first extremal argument
                self.nodes[node.parents[node.payload]].adjoint += adj
            elif node.op == "sum_shift":
                if node.payload:  # active side of the clamp
                    for p in node.parents:
                        self.nodes[p].adjoint += adj
            elif node.op == "prod":
                vals = np.array([self.nodes[p].value for p in node.parents])
                _, partials = _prod_partials(vals)
                for p, d in zip(node.parents, partials):
                    self.nodes[p].adjoint += adj * d
            elif node.op == "godel_imp":
                a, c = (self.nodes[p].value for p in node.parents)
                if a > c:
                    self.nodes[node.parents[1]].adjoint += adj
            elif node.op == "goguen_imp":
                a, c = (self.nodes[p].value for p in node.parents)
                if a > c:
                    self.nodes[node.parents[0]].adjoint += adj * (-c / (a * a))
                    self.nodes[node.parents[1]].adjoint += adj / a
            else:
                raise ValueError(f"cannot backpropagate through op {node.op!r}")

    def grad_wrt_props(self, n: int) -> np.ndarray:
        grad = np.zeros(n)
        for node in self.nodes:
            if node.op == "prop":
                grad[node.payload] += node.adjoint
        return grad


def _prod_partials(vals: np.ndarray) -> tuple[float, np.ndarray]:
    """Product and its partial derivatives, stable around zero factors."""
    zero = vals == 0.0
    nzero = int(zero.sum())
    safe = np.where(zero, 1.0, vals)
    nz_prod = float(np.prod(safe))
    if nzero == 0:
        return nz_prod, nz_prod / safe
    if nzero == 1:
        partials = np.where(zero, nz_prod, 0.0)
        return 0.0, partials
    return 0.0, np.zeros_like(vals)


def trace_formula(formula: Formula, t: np.ndarray, logic: Logic) -> tuple[GradTape, int]:
    """Record the fuzzy evaluation of `formula` at `t` onto a fresh tape."""
    tape = GradTape()

    def lift_conorm(indices: list[int]) -> int:
        vals = [tape.value(i) for i in indices]
        if logic.family is Family.GODEL:
            pos = int(np.argmax(vals))
            return tape.append(TapeNode("max", max(vals), tuple(indices), pos))
        if logic.family is Family.LUKASIEWICZ:
            s = sum(vals)
            return tape.append(
                TapeNode("sum_shift", min(s, 1.0), tuple(indices), s <= 1.0)
            )
        comp = [tape.append(TapeNode("not", 1.0 - tape.value(i), (i,))) for i in indices]
        prod = tape.append(
            TapeNode("prod", float(np.prod([tape.value(i) for i in comp])), tuple(comp))
        )
        return tape.append(TapeNode("not", 1.0 - tape.value(prod), (prod,)))

    def go(node: Formula) -> int:
        match node:
            case Prop(index=i):
                return tape.append(TapeNode("prop", float(t[i]), (), i))
            case Const(value=v):
                return tape.append(TapeNode("const", float(v)))
            case Not(child=c):
                ci = go(c)
                return tape.append(TapeNode("not", 1.0 - tape.value(ci), (ci,)))
            case And(children=cs):
                idxs = [go(c) for c in cs]
                vals = [tape.value(i) for i in idxs]
                if logic.family is Family.GODEL:
                    pos = int(np.argmin(vals))
                    return tape.append(TapeNode("min", min(vals), tuple(idxs), pos))
                if logic.family is Family.LUKASIEWICZ:
                    raw = sum(vals) - (len(vals) - 1)
                    return tape.append(
                        TapeNode("sum_shift", max(raw, 0.0), tuple(idxs), raw >= 0.0)
                    )
                return tape.append(TapeNode("prod", float(np.prod(vals)), tuple(idxs)))
            case Or(children=cs):
                return lift_conorm([go(c) for c in cs])
            case Implies(antecedent=a, consequent=c):
                ai, ci = go(a), go(c)
                if logic.implication_kind is ImplicationKind.S_IMPLICATION:
                    na = tape.append(TapeNode("not", 1.0 - tape.value(ai), (ai,)))
                    return lift_conorm([na, ci])
                av, cv = tape.value(ai), tape.value(ci)
                if logic.family is Family.GODEL:
                    return tape.append(
                        TapeNode("godel_imp", 1.0 if av <= cv else cv, (ai, ci))
                    )
                if logic.family is Family.LUKASIEWICZ:
                    na = tape.append(TapeNode("not", 1.0 - av, (ai,)))
                    return lift_conorm([na, ci])
                return tape.append(
                    TapeNode("goguen_imp", 1.0 if av <= cv else cv / av, (ai, ci))
                )
        raise TypeError(f"not a formula node: {node!r}")

    root = go(formula)
    return tape, root


def eval_with_grad(formula: Formula, z: np.ndarray, logic: Logic) -> tuple[float, np.ndarray]:
    """Value of f(sigmoid(z)) and its exact gradient with respect to z.

    Min/max subgradients are routed to the first extremal argument.
    """
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("z contains NaN or infinity")
    t = sigmoid(z)
    tape, root = trace_formula(formula, t, logic)
    tape.backward({root: 1.0})
    grad_t = tape.grad_wrt_props(z.size)
    return tape.value(root), grad_t * t * (1.0 - t)


# --------------------------------------------------------------------------
# Loss engines
# --------------------------------------------------------------------------

_CLAUSE_FLOOR = 1e-30  # log-loss guard against log(0); ADAM normalizes the magnitude


class _TapeEngine:
    """Loss evaluation through the scalar tape for arbitrary formulas."""

    def __init__(self, formula: Formula, n: int, logic: Logic, v_hat: float):
        self.formula = formula
        self.n = n
        self.logic = logic
        self.variant = _loss_variant(formula, logic, v_hat)
        self.v_hat = v_hat

    def sat_and_grad(self, t: np.ndarray) -> tuple[float, np.ndarray]:
        tape, root = trace_formula(self.formula, t, self.logic)
        true_sat = tape.value(root)
        if self.variant == "log_product":
            children = tape.nodes[root].parents
            vals = np.array([max(tape.value(i), _CLAUSE_FLOOR) for i in children])
            residual = float(np.log(vals).sum()) - math.log(self.v_hat)
            seeds = {i: 2.0 * residual / v for i, v in zip(children, vals)}
            tape.backward(seeds)
        elif self.variant == "luk_linear":
            children = tape.nodes[root].parents
            raw = sum(tape.value(i) for i in children) - (len(children) - 1)
            residual = raw - self.v_hat
            tape.backward({i: 2.0 * residual for i in children})
        else:
            residual = true_sat - self.v_hat
            tape.backward({root: 2.0 * residual})
        return true_sat, tape.grad_wrt_props(self.n)

    def satisfaction(self, t: np.ndarray) -> float:
        tape, root = trace_formula(self.formula, t, self.logic)
        return tape.value(root)


def _loss_variant(formula: Formula, logic: Logic, v_hat: float) -> str:
    if not isinstance(formula, And):
        return "plain"
    if logic.family is Family.PRODUCT and v_hat > 0.0:
        return "log_product"
    if logic.family is Family.LUKASIEWICZ:
        return "luk_linear"
    return "plain"


def _as_cnf_arrays(formula: Formula) -> tuple[np.ndarray, np.ndarray] | None:
    """Clause variable/sign matrices when the formula is a uniform-width CNF."""
    if not isinstance(formula, And):
        return None
    rows_vars, rows_pos = [], []
    width = None
    for clause in formula.children:
        if not isinstance(clause, Or):
            return None
        cvars, cpos = [], []
        for lit in clause.children:
            match lit:
                case Prop(index=i):
                    cvars.append(i)
                    cpos.append(True)
                case Not(child=Prop(index=i)):
                    cvars.append(i)
                    cpos.append(False)
                case _:
                    return None
        if width is None:
            width = len(cvars)
        elif width != len(cvars):
            return None
        rows_vars.append(cvars)
        rows_pos.append(cpos)
    return np.array(rows_vars, dtype=int), np.array(rows_pos, dtype=bool)


class _CnfEngine:
    """Vectorized loss evaluation for CNF formulas."""

    def __init__(self, clause_vars, clause_pos, n: int, logic: Logic, v_hat: float):
        self.vars = clause_vars
        self.pos = clause_pos
        self.n = n
        self.family = logic.family
        self.num_clauses = clause_vars.shape[0]
        if self.family is Family.PRODUCT and v_hat > 0.0:
            self.variant = "log_product"
        elif self.family is Family.LUKASIEWICZ:
            self.variant = "luk_linear"
        else:
            self.variant = "plain"
        self.v_hat = v_hat

    def _literals(self, t: np.ndarray) -> np.ndarray:
        vals = t[self.vars]
        return np.where(self.pos, vals, 1.0 - vals)

    def _scatter(self, dloss_dlit: np.ndarray) -> np.ndarray:
        grad = np.zeros(self.n)
        signed = np.where(self.pos, dloss_dlit, -dloss_dlit)
        np.add.at(grad, self.vars.ravel(), signed.ravel())
        return grad

    def _clause_values(self, lits: np.ndarray) -> np.ndarray:
        if self.family is Family.GODEL:
            return lits.max(axis=1)
        if self.family is Family.LUKASIEWICZ:
            return np.minimum(lits.sum(axis=1), 1.0)
        return 1.0 - (1.0 - lits).prod(axis=1)

    def _root(self, clauses: np.ndarray) -> float:
        if self.family is Family.GODEL:
            return float(clauses.min())
        if self.family is Family.LUKASIEWICZ:
            return float(max(clauses.sum() - (self.num_clauses - 1), 0.0))
        if np.any(clauses == 0.0):
            return 0.0
        return float(math.exp(np.log(clauses).sum()))

    def satisfaction(self, t: np.ndarray) -> float:
        return self._root(self._clause_values(self._literals(t)))

    def sat_and_grad(self, t: np.ndarray) -> tuple[float, np.ndarray]:
        lits = self._literals(t)
        clauses = self._clause_values(lits)
        true_sat = self._root(clauses)

        if self.family is Family.GODEL:
            residual = true_sat - self.v_hat
            i = int(np.argmin(clauses))
            j = int(np.argmax(lits[i]))
            grad = np.zeros(self.n)
            sign = 1.0 if self.pos[i, j] else -1.0
            grad[self.vars[i, j]] += 2.0 * residual * sign
            return true_sat, grad

        if self.family is Family.LUKASIEWICZ:
            if self.variant == "luk_linear":
                raw = clauses.sum() - (self.num_clauses - 1)
                residual = raw - self.v_hat
                dclause = np.full(self.num_clauses, 2.0 * residual)
            else:
                residual = true_sat - self.v_hat
                active_root = clauses.sum() - (self.num_clauses - 1) >= 0.0
                dclause = np.full(self.num_clauses, 2.0 * residual if active_root else 0.0)
            active = (lits.sum(axis=1) <= 1.0).astype(float)
            dlit = (dclause * active)[:, None] * np.ones_like(lits)
            return true_sat, self._scatter(dlit)

        # product family
        comp = 1.0 - lits
        zero = comp == 0.0
        safe = np.where(zero, 1.0, comp)
        nz_prod = safe.prod(axis=1)
        zero_cnt = zero.sum(axis=1)
        # d clause / d lit: product of the other complements
        dcl_dcomp = np.where(
            zero_cnt[:, None] == 0,
            nz_prod[:, None] / safe,
            np.where((zero_cnt[:, None] == 1) & zero, nz_prod[:, None], 0.0),
        )
        dcl_dlit = dcl_dcomp  # clause = 1 - prod(comp), d comp/d lit = -1
        if self.variant == "log_product":
            cl = np.maximum(clauses, _CLAUSE_FLOOR)
            residual = float(np.log(cl).sum()) - math.log(self.v_hat)
            dclause = 2.0 * residual / cl
        else:
            residual = true_sat - self.v_hat
            _, droot = _prod_partials(clauses)
            dclause = 2.0 * residual * droot
        dlit = dclause[:, None] * dcl_dlit
        return true_sat, self._scatter(dlit)


def adam_run(
    formula: Formula,
    t0,
    v_hat: float,
    logic: Logic,
    config: AdamConfig | None = None,
    engine: str = "auto",
) -> IlrOutcome:
    """Minimize squared target error plus a distance regularizer with ADAM.

    Returns the same outcome shape as ilr_run; the trace records the true
    (unmodified) satisfaction after each update.  The converged flag marks
    whether the final satisfaction is within 1e-3 of the target.
    """
    config = config or AdamConfig()
    t0 = np.clip(np.asarray(t0, dtype=float), 0.0, 1.0)
    if not np.all(np.isfinite(t0)):
        raise ValueError("t0 contains NaN or infinity")
    if not 0.0 <= v_hat <= 1.0:
        raise ValueError(f"target {v_hat} outside [0, 1]")
    top = max_prop_index(formula)
    if top >= t0.size:
        raise IndexError(f"formula references proposition {top}, t0 has length {t0.size}")

    if engine not in ("auto", "tape", "cnf"):
        raise ValueError(f"unknown engine {engine!r}")
    arrays = _as_cnf_arrays(formula) if engine in ("auto", "cnf") else None
    if engine == "cnf" and arrays is None:
        raise ValueError("formula is not CNF-shaped")
    if arrays is not None:
        loss_engine = _CnfEngine(arrays[0], arrays[1], t0.size, logic, v_hat)
    else:
        loss_engine = _TapeEngine(formula, t0.size, logic, v_hat)

    z = logit(np.clip(t0, 1e-6, 1.0 - 1e-6))
    m = np.zeros_like(z)
    v = np.zeros_like(z)
    alpha = config.alpha_reg
    history: list[tuple[int, float, float]] = []
    t = sigmoid(z)
    for step in range(1, config.max_iters + 1):
        _, grad_sat = loss_engine.sat_and_grad(t)
        diff = t - t0
        if config.reg_norm_p == 1:
            grad_reg = alpha * np.sign(diff)
        else:
            grad_reg = alpha * diff / max(float(np.sqrt((diff**2).sum())), 1e-12)
        grad_z = (grad_sat + grad_reg) * t * (1.0 - t)
        m = config.beta1 * m + (1.0 - config.beta1) * grad_z
        v = config.beta2 * v + (1.0 - config.beta2) * grad_z**2
        m_hat = m / (1.0 - config.beta1**step)
        v_hat_state = v / (1.0 - config.beta2**step)
        z = z - config.learning_rate * m_hat / (np.sqrt(v_hat_state) + config.eps_hat)
        t = sigmoid(z)
        sat = loss_engine.satisfaction(t)
        history.append((step, sat, float(np.abs(t - t0).sum())))
    final_sat = history[-1][1] if history else loss_engine.satisfaction(t)
    return IlrOutcome(t, history, abs(final_sat - v_hat) <= 1e-3, len(history))
