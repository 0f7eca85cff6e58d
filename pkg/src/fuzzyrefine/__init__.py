"""Fuzzy truth-value refinement: analytical minimal-change operators and iterative algorithms."""

from .formula import (
    And,
    CnfInstance,
    Const,
    Formula,
    Implies,
    Not,
    Or,
    Prop,
    cnf_to_formula,
    parse_dimacs,
    parse_formula,
)
from .graddesc import AdamConfig, adam_run, eval_with_grad
from .harness import generate_3sat, mnist_addition_demo, run_experiment
from .ilr import IlrConfig, IlrOutcome, ilr_run
from .refine import (
    refine_implication,
    refine_schur_additive,
    refine_tconorm,
    refine_tnorm,
)
from .semantics import Family, ImplicationKind, Logic, evaluate, t_conorm, t_norm

__all__ = [
    "And",
    "CnfInstance",
    "Const",
    "Formula",
    "Implies",
    "Not",
    "Or",
    "Prop",
    "cnf_to_formula",
    "parse_dimacs",
    "parse_formula",
    "AdamConfig",
    "adam_run",
    "eval_with_grad",
    "generate_3sat",
    "mnist_addition_demo",
    "run_experiment",
    "IlrConfig",
    "IlrOutcome",
    "ilr_run",
    "refine_implication",
    "refine_schur_additive",
    "refine_tconorm",
    "refine_tnorm",
    "Family",
    "ImplicationKind",
    "Logic",
    "evaluate",
    "t_conorm",
    "t_norm",
]
