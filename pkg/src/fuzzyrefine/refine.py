"""Analytical minimal-change refinement of fuzzy operator arguments.

Each function takes the free truth values t, an optional vector of fixed
constants, and a target value for the operator, and returns new truth values
for which the operator evaluates to the (range-clamped) target while moving
as little as possible from t in the L1 sense.

Closed forms per family:

* Godel t-norm: raise every entry below the target (increase) or lower only
  the smallest entry (decrease).
* Lukasiewicz t-norm: add a common increment to the K* smallest entries and
  saturate the rest at 1 (increase); subtract a common decrement everywhere
  (decrease).
* Product t-norm: lift all entries below a threshold computed through the
  additive generator -ln (increase); lower only the smallest entry
  (decrease).

T-conorms mirror these through duality, implications through the residuum
results or the S-implication transform.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .semantics import (
    Family,
    ImplicationKind,
    Logic,
    additive_generator,
    implication,
    t_conorm,
    t_norm,
)

__all__ = [
    "RefinementError",
    "refine_tnorm",
    "refine_tconorm",
    "refine_implication",
    "refine_schur_additive",
    "dual_transform",
    "negation_transform",
    "refine_product_l2",
    "solve_product_l2_lambda",
]

_EDGE_TOL = 1e-9


class RefinementError(RuntimeError):
    """Numerical pathology inside a refinement computation."""


def _checked(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinity")
    return np.clip(arr, 0.0, 1.0)


def _checked_scalar(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} is not finite")
    return value


def _pick(indices: np.ndarray, rng: np.random.Generator | None) -> int:
    # lowest index by default; seeded-random tie-breaking on request
    return int(indices[0]) if rng is None else int(rng.choice(indices))


def _argmin(values: np.ndarray, rng) -> int:
    return _pick(np.flatnonzero(values == values.min()), rng)


def _argmax(values: np.ndarray, rng) -> int:
    return _pick(np.flatnonzero(values == values.max()), rng)


def _schur_lift(
    g: Callable,
    g_inverse: Callable,
    t: np.ndarray,
    g_target: float,
    gc_total: float,
) -> np.ndarray:
    """Raise the entries below a generator-derived threshold to that threshold.

    The target is given in generator space (g_target = g(v_hat), with the
    constants' contribution gc_total = sum g(c_i)) so that clamp boundaries
    can be represented exactly; near-1 targets lose too much precision on a
    1 - (1 - x) round trip.  Scans K = 0..n-1 kept entries for the threshold
    lambda_K with t_desc[K-1] >= lambda_K > t_desc[K]; the lifted vector then
    satisfies T(out, constants) = v_hat for the t-norm generated by g.
    """
    n = t.size
    t_desc = np.sort(t)[::-1]
    with np.errstate(divide="ignore"):
        g_desc = np.asarray(g(t_desc), dtype=float)
    prefix = np.concatenate(([0.0], np.cumsum(g_desc)))
    for kept in range(n):
        arg = (g_target - prefix[kept] - gc_total) / (n - kept)
        if arg < -_EDGE_TOL:
            continue  # threshold above 1, keep fewer entries
        lam = float(g_inverse(max(arg, 0.0)))
        left_ok = kept == 0 or t_desc[kept - 1] >= lam - _EDGE_TOL
        right_ok = lam > t_desc[kept] - _EDGE_TOL
        if left_ok and right_ok:
            return np.clip(np.maximum(t, min(lam, 1.0)), 0.0, 1.0)
    raise RefinementError("no consistent lift threshold found")


def _generator_sums(g: Callable, values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.sum(g(values)))


def _luk_tnorm_increase(t: np.ndarray, v: float, c: np.ndarray) -> np.ndarray:
    n, m = t.size, c.size
    order = np.argsort(t, kind="stable")
    t_asc = t[order]
    csum = float(c.sum())
    prefix = np.concatenate(([0.0], np.cumsum(t_asc)))
    for k in range(n, 0, -1):  # largest valid K first
        lam = (v + m + k - 1 - csum - prefix[k]) / k
        if lam <= 1.0 - t_asc[k - 1] + _EDGE_TOL:
            out = np.ones(n)
            out[order[:k]] = t_asc[:k] + lam
            return np.clip(out, 0.0, 1.0)
    raise RefinementError("no consistent increment count found")


def _luk_tconorm_decrease(t: np.ndarray, v: float, c: np.ndarray) -> np.ndarray:
    n = t.size
    order = np.argsort(-t, kind="stable")
    t_desc = t[order]
    total = float(t.sum() + c.sum())
    prefix = np.concatenate(([0.0], np.cumsum(t_desc)))
    for k in range(n, 0, -1):  # subtract equally from the k largest
        lam = (total - v) / k
        if lam <= t_desc[k - 1] + _EDGE_TOL:
            out = t.copy()
            out[order[:k]] = t_desc[:k] - lam
            return np.clip(out, 0.0, 1.0)
    # Target sum is below what equal subtraction can reach without going
    # negative (e.g. exact-zero targets): lower the largest entries to a
    # common level and clamp the rest at 0.
    target_sum = max(v - float(c.sum()), 0.0)
    for k in range(n, 0, -1):
        delta = (prefix[k] - target_sum) / k
        below = t_desc[k] if k < n else 0.0
        if t_desc[k - 1] >= delta - _EDGE_TOL and delta >= below - _EDGE_TOL:
            return np.clip(np.maximum(t - delta, 0.0), 0.0, 1.0)
    raise RefinementError("no consistent decrement count found")


def refine_tnorm(
    logic: Logic,
    t,
    v_hat: float,
    constants: Sequence[float] = (),
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """L1-minimal refined arguments for the family t-norm.

    The target is clamped into [0, T(constants)]; when it already equals
    T(t, constants) the input is returned unchanged.
    """
    t = _checked(t, "t")
    c = _checked(constants, "constants")
    v_hat = _checked_scalar(v_hat, "target")
    if t.size == 0:
        raise ValueError("refinement of an empty argument vector")
    cur = t_norm(logic, np.concatenate((t, c))) if c.size else t_norm(logic, t)
    if v_hat == cur:
        return t.copy()
    v_max = t_norm(logic, c) if c.size else 1.0
    v = min(max(v_hat, 0.0), v_max)
    if v == cur:
        return t.copy()

    if logic.family is Family.GODEL:
        if v > cur:
            return np.maximum(t, v)
        out = t.copy()
        out[_argmin(t, rng)] = v
        return out

    if logic.family is Family.LUKASIEWICZ:
        if v > cur:
            return _luk_tnorm_increase(t, v, c)
        delta = max(t.sum() + c.sum() + 1.0 - (t.size + c.size) - v, 0.0) / t.size
        return np.clip(t - delta, 0.0, 1.0)

    # product
    if v > cur:
        g, g_inverse = additive_generator(logic)
        gc_total = _generator_sums(g, c)
        with np.errstate(divide="ignore"):
            g_target = gc_total if v == v_max else float(g(v))
        return _schur_lift(g, g_inverse, t, g_target, gc_total)
    i = _argmin(t, rng)
    out = t.copy()
    if v == 0.0:
        out[i] = 0.0
        return out
    # cur > v > 0 means every argument is positive
    log_target = math.log(v) - float(np.sum(np.log(np.delete(t, i)))) - float(np.sum(np.log(c)))
    out[i] = min(math.exp(log_target), 1.0)
    return out


def refine_tconorm(
    logic: Logic,
    t,
    v_hat: float,
    constants: Sequence[float] = (),
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """L1-minimal refined arguments for the dual t-conorm.

    The target is clamped into [S(constants), 1].
    """
    t = _checked(t, "t")
    c = _checked(constants, "constants")
    v_hat = _checked_scalar(v_hat, "target")
    if t.size == 0:
        raise ValueError("refinement of an empty argument vector")
    cur = t_conorm(logic, np.concatenate((t, c))) if c.size else t_conorm(logic, t)
    if v_hat == cur:
        return t.copy()
    v_min = t_conorm(logic, c) if c.size else 0.0
    v = min(max(v_hat, v_min), 1.0)
    if v == cur:
        return t.copy()

    if logic.family is Family.GODEL:
        if v > cur:
            out = t.copy()
            out[_argmax(t, rng)] = v
            return out
        return np.minimum(t, v)

    if logic.family is Family.LUKASIEWICZ:
        if v > cur:
            delta = max(v - t.sum() - c.sum(), 0.0) / t.size
            return np.clip(t + delta, 0.0, 1.0)
        return _luk_tconorm_decrease(t, v, c)

    # product
    if v > cur:
        j = _argmax(t, rng)
        comp_others = 1.0 - np.delete(t, j)
        comp_c = 1.0 - c
        if v == 1.0:
            new = 1.0
        else:
            log_comp = (
                math.log(1.0 - v)
                - float(np.sum(np.log(comp_others)))
                - float(np.sum(np.log(comp_c)))
            )
            new = 1.0 - math.exp(log_comp)
        out = t.copy()
        out[j] = min(max(new, 0.0), 1.0)
        return out
    # decrease: dual transform of the t-norm lift, computed in complement
    # space with the target expressed in generator space (the clamp boundary
    # v == S(c) maps to the constants' exact g-sum)
    g, g_inverse = additive_generator(logic)
    comp_c = 1.0 - c if c.size else c
    gc_total = _generator_sums(g, comp_c)
    with np.errstate(divide="ignore"):
        g_target = gc_total if v == v_min else float(g(1.0 - v))
    return 1.0 - _schur_lift(g, g_inverse, 1.0 - t, g_target, gc_total)


def refine_implication(
    logic: Logic,
    a: float,
    c_val: float,
    v_hat: float,
    kind: ImplicationKind | None = None,
    epsilon: float = 1e-6,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Refined (antecedent, consequent) pair for the implication.

    Residuum targets below 1 are met exactly; for the Godel residuum the
    antecedent is bumped by `epsilon` only when it does not already exceed
    the target.
    """
    a = float(np.clip(_checked_scalar(a, "antecedent"), 0.0, 1.0))
    c_val = float(np.clip(_checked_scalar(c_val, "consequent"), 0.0, 1.0))
    v = float(np.clip(_checked_scalar(v_hat, "target"), 0.0, 1.0))
    kind = kind if kind is not None else logic.implication_kind
    effective = Logic(logic.family, kind)
    cur = implication(effective, a, c_val)
    if v == cur:
        return a, c_val

    if kind is ImplicationKind.S_IMPLICATION or logic.family is Family.LUKASIEWICZ:
        # I(a, c) = S(1 - a, c); refine the t-conorm and map back
        u = refine_tconorm(logic, np.array([1.0 - a, c_val]), v, rng=rng)
        return 1.0 - float(u[0]), float(u[1])

    if logic.family is Family.GODEL:
        if v == 1.0:
            return a, max(a, c_val)
        new_a = a if a > v else min(v + epsilon, 1.0)
        return new_a, v

    # product residuum
    if v == 1.0:
        return (a, c_val) if a <= c_val else (a, a)
    base = a if a > 0.0 else min(epsilon, 1.0)
    return base, v * base


def refine_schur_additive(
    g: Callable,
    g_inverse: Callable,
    t,
    v_hat: float,
    constants: Sequence[float] = (),
) -> np.ndarray:
    """Generic increase-side refinement for a Schur-concave t-norm with additive generator g.

    Lifts the entries below the threshold lambda_K selected so that
    t_desc[K] >= lambda_K > t_desc[K+1]; the result evaluates to the target
    under the generated t-norm.  Targets below the current value clamp to it.
    """
    t = _checked(t, "t")
    c = _checked(constants, "constants")
    v_hat = _checked_scalar(v_hat, "target")
    if t.size == 0:
        raise ValueError("refinement of an empty argument vector")
    gc_total = _generator_sums(g, c)
    with np.errstate(divide="ignore"):
        cur = float(g_inverse(_generator_sums(g, t) + gc_total))
        v_max = float(g_inverse(gc_total))
    v = min(max(v_hat, cur), v_max)
    if v == cur:
        return t.copy()
    with np.errstate(divide="ignore"):
        g_target = gc_total if v == v_max else float(g(v))
    return _schur_lift(g, g_inverse, t, g_target, gc_total)


def dual_transform(refine_fn: Callable) -> Callable:
    """Turn a t-norm refinement function into one for the dual t-conorm.

    `refine_fn(t, v_hat, constants=...)` must be a minimal refinement function
    for a t-norm; the returned function computes
    1 - refine_fn(1 - t, 1 - v_hat, 1 - constants).
    """

    def dual(t, v_hat, constants=(), **kwargs):
        t = np.asarray(t, dtype=float)
        c = np.asarray(constants, dtype=float)
        return 1.0 - refine_fn(1.0 - t, 1.0 - float(v_hat), constants=1.0 - c, **kwargs)

    return dual


def negation_transform(v_hat: float) -> float:
    """Target seen by the child of a negation node."""
    return 1.0 - float(v_hat)


def refine_product_l2(t, lam: float) -> np.ndarray:
    """One member of the L2-minimal family for increasing the product t-norm.

    Entries whose cap constraint is inactive (lam > 2 t_i - 2) move to
    (t_i + sqrt(t_i^2 - 2 lam)) / 2, the rest saturate at 1.  lam = 0 is the
    identity; decreasing lam increases the product monotonically.
    """
    t = _checked(t, "t")
    lam = _checked_scalar(lam, "lam")
    lo = float(np.min(2.0 * t - 2.0))
    if lam > _EDGE_TOL or lam < lo - _EDGE_TOL:
        raise ValueError(f"lam {lam} outside [{lo}, 0]")
    lam = min(lam, 0.0)
    free = (2.0 * t - 2.0) < lam
    lifted = 0.5 * (t + np.sqrt(np.maximum(t * t - 2.0 * lam, 0.0)))
    return np.clip(np.where(free, lifted, 1.0), 0.0, 1.0)


def solve_product_l2_lambda(
    t,
    v_hat: float,
    tol: float = 1e-9,
    max_iters: int = 200,
) -> tuple[float, bool]:
    """Bisection for the lam with prod(refine_product_l2(t, lam)) = v_hat.

    Returns (lam, clamped); clamped is True when v_hat lies outside
    [prod(t), 1] and the nearest boundary was used instead.
    """
    t = _checked(t, "t")
    v_hat = _checked_scalar(v_hat, "target")
    lo = float(np.min(2.0 * t - 2.0))

    def value(lam: float) -> float:
        return float(np.prod(refine_product_l2(t, lam)))

    base = value(0.0)
    if v_hat <= base:
        return 0.0, v_hat < base - tol
    if v_hat >= 1.0:
        return lo, v_hat > 1.0 + tol
    hi_lam, lo_lam = 0.0, lo  # value(hi_lam) = base <= v_hat <= 1 = value(lo_lam)
    mid = 0.5 * (lo_lam + hi_lam)
    for _ in range(max_iters):
        mid = 0.5 * (lo_lam + hi_lam)
        val = value(mid)
        if abs(val - v_hat) <= tol:
            return mid, False
        if val > v_hat:
            lo_lam = mid
        else:
            hi_lam = mid
    return mid, False
