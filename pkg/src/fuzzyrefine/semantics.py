"""Fuzzy evaluation of formulas under the Godel, Lukasiewicz, and product operator families.

Conjunction uses the family t-norm, disjunction its dual t-conorm, negation is
1 - x, and implication is either the residuum induced by the t-norm or the
S-implication S(1 - a, c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .formula import And, Const, Formula, Implies, Not, Or, Prop, max_prop_index

__all__ = [
    "Family",
    "ImplicationKind",
    "Logic",
    "EvalTrace",
    "UnsupportedFamilyError",
    "t_norm",
    "t_conorm",
    "implication",
    "evaluate",
    "additive_generator",
]


class Family(Enum):
    GODEL = "godel"
    LUKASIEWICZ = "lukasiewicz"
    PRODUCT = "product"


class ImplicationKind(Enum):
    RESIDUUM = "residuum"
    S_IMPLICATION = "s_implication"


class UnsupportedFamilyError(ValueError):
    pass


# The Lukasiewicz residuum min(1 - a + c, 1) coincides with its S-implication,
# so S_IMPLICATION is the natural default there; Godel and product default to
# their residua.
_DEFAULT_IMPLICATION = {
    Family.GODEL: ImplicationKind.RESIDUUM,
    Family.LUKASIEWICZ: ImplicationKind.S_IMPLICATION,
    Family.PRODUCT: ImplicationKind.RESIDUUM,
}

_FAMILY_ALIASES = {
    "godel": Family.GODEL,
    "goedel": Family.GODEL,
    "minimum": Family.GODEL,
    "lukasiewicz": Family.LUKASIEWICZ,
    "luk": Family.LUKASIEWICZ,
    "product": Family.PRODUCT,
    "prod": Family.PRODUCT,
}


@dataclass(frozen=True)
class Logic:
    family: Family
    implication_kind: ImplicationKind | None = None

    def __post_init__(self):
        if self.implication_kind is None:
            object.__setattr__(self, "implication_kind", _DEFAULT_IMPLICATION[self.family])

    @classmethod
    def godel(cls, implication_kind: ImplicationKind | None = None) -> "Logic":
        return cls(Family.GODEL, implication_kind)

    @classmethod
    def lukasiewicz(cls, implication_kind: ImplicationKind | None = None) -> "Logic":
        return cls(Family.LUKASIEWICZ, implication_kind)

    @classmethod
    def product(cls, implication_kind: ImplicationKind | None = None) -> "Logic":
        return cls(Family.PRODUCT, implication_kind)

    @classmethod
    def from_name(cls, name: str) -> "Logic":
        key = name.strip().lower()
        if key not in _FAMILY_ALIASES:
            raise ValueError(f"unknown logic family {name!r}")
        return cls(_FAMILY_ALIASES[key])


def _as_values(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a flat list of truth values")
    if arr.size == 0:
        raise ValueError("aggregation over an empty list of truth values")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite truth value")
    return arr


def t_norm(logic: Logic, values: Iterable[float]) -> float:
    """Any-arity t-norm: min / product / max(sum - (n-1), 0)."""
    arr = _as_values(values)
    match logic.family:
        case Family.GODEL:
            return float(arr.min())
        case Family.LUKASIEWICZ:
            return float(max(arr.sum() - (arr.size - 1), 0.0))
        case Family.PRODUCT:
            # log-space keeps long conjunctions (91 clauses and up) from
            # losing precision; an exact zero short-circuits.
            if np.any(arr == 0.0):
                return 0.0
            return float(math.exp(np.log(arr).sum()))
    raise UnsupportedFamilyError(str(logic.family))


def t_conorm(logic: Logic, values: Iterable[float]) -> float:
    """Dual t-conorm S(v) = 1 - T(1 - v): max / probabilistic sum / min(sum, 1)."""
    arr = _as_values(values)
    match logic.family:
        case Family.GODEL:
            return float(arr.max())
        case Family.LUKASIEWICZ:
            return float(min(arr.sum(), 1.0))
        case Family.PRODUCT:
            comp = 1.0 - arr
            if np.any(comp == 0.0):
                return 1.0
            return float(1.0 - math.exp(np.log(comp).sum()))
    raise UnsupportedFamilyError(str(logic.family))


def implication(logic: Logic, a: float, c: float) -> float:
    """Implication value I(a, c) for the logic's implication kind."""
    if not (math.isfinite(a) and math.isfinite(c)):
        raise ValueError("non-finite implication argument")
    if logic.implication_kind is ImplicationKind.S_IMPLICATION:
        return t_conorm(logic, (1.0 - a, c))
    match logic.family:
        case Family.GODEL:
            return 1.0 if a <= c else c
        case Family.LUKASIEWICZ:
            return min(1.0 - a + c, 1.0)
        case Family.PRODUCT:
            return 1.0 if a <= c else c / a
    raise UnsupportedFamilyError(str(logic.family))


@dataclass
class EvalTrace:
    """Truth degree of every subformula from one bottom-up evaluation."""

    values: dict[Formula, float] = field(default_factory=dict)

    def __getitem__(self, node: Formula) -> float:
        return self.values[node]

    def __contains__(self, node: Formula) -> bool:
        return node in self.values

    def __len__(self) -> int:
        return len(self.values)


def evaluate(formula: Formula, t: np.ndarray | Iterable[float], logic: Logic) -> tuple[float, EvalTrace]:
    """Bottom-up fuzzy evaluation; returns the root value and the full trace."""
    t = np.asarray(t, dtype=float)
    top = max_prop_index(formula)
    if top >= t.size:
        raise IndexError(f"formula references proposition {top}, truth vector has length {t.size}")
    trace = EvalTrace()

    def go(node: Formula) -> float:
        if node in trace:
            return trace[node]
        match node:
            case Prop(index=i):
                value = float(t[i])
            case Const(value=v):
                value = float(v)
            case Not(child=c):
                value = 1.0 - go(c)
            case And(children=cs):
                value = t_norm(logic, [go(c) for c in cs])
            case Or(children=cs):
                value = t_conorm(logic, [go(c) for c in cs])
            case Implies(antecedent=a, consequent=c):
                value = implication(logic, go(a), go(c))
            case _:
                raise TypeError(f"not a formula node: {node!r}")
        trace.values[node] = value
        return value

    return go(formula), trace


def additive_generator(logic: Logic) -> tuple[Callable, Callable]:
    """Additive generator g and its inverse for strict/nilpotent families.

    Product: g = -ln with g(0) = inf; Lukasiewicz: g = 1 - t.  Both satisfy
    g(1) = 0 and reconstruct the t-norm via g_inverse(min(g(0+), sum g(t_i))).
    The Godel family has no additive generator.
    """
    match logic.family:
        case Family.PRODUCT:

            def g(x):
                with np.errstate(divide="ignore"):
                    return -np.log(x)

            def g_inverse(y):
                return np.exp(-np.asarray(y, dtype=float))

            return g, g_inverse
        case Family.LUKASIEWICZ:

            def g(x):
                return 1.0 - np.asarray(x, dtype=float)

            def g_inverse(y):
                return 1.0 - np.minimum(np.asarray(y, dtype=float), 1.0)

            return g, g_inverse
    raise UnsupportedFamilyError(f"{logic.family} has no additive generator")
