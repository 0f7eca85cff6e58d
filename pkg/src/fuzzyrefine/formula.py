"""Propositional formulas over unit-interval truth values.

Formulas are immutable trees built from propositions (referenced by a dense
0-based index), constants in [0, 1], negation, n-ary conjunction and
disjunction, and binary implication.  A small infix DSL and a DIMACS CNF
loader produce them.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

__all__ = [
    "Formula",
    "Prop",
    "Const",
    "Not",
    "And",
    "Or",
    "Implies",
    "CnfInstance",
    "FormulaSyntaxError",
    "DimacsError",
    "parse_formula",
    "parse_formula_with_names",
    "render",
    "prop_indices",
    "max_prop_index",
    "depth",
    "parse_dimacs",
    "cnf_to_formula",
]


class FormulaSyntaxError(ValueError):
    """DSL parse failure; carries the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DimacsError(ValueError):
    pass


@dataclass(frozen=True)
class Prop:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"proposition index must be >= 0, got {self.index}")


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"constant {self.value} outside [0, 1]")


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 1:
            raise ValueError("zero-arity conjunction")


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 1:
            raise ValueError("zero-arity disjunction")


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"


Formula = Prop | Const | Not | And | Or | Implies


def prop_indices(formula: Formula) -> frozenset[int]:
    """Set of proposition indices occurring in the formula."""
    match formula:
        case Prop(index=i):
            return frozenset((i,))
        case Const():
            return frozenset()
        case Not(child=c):
            return prop_indices(c)
        case And(children=cs) | Or(children=cs):
            out: frozenset[int] = frozenset()
            for c in cs:
                out |= prop_indices(c)
            return out
        case Implies(antecedent=a, consequent=c):
            return prop_indices(a) | prop_indices(c)
    raise TypeError(f"not a formula node: {formula!r}")


def max_prop_index(formula: Formula) -> int:
    """Largest proposition index, or -1 if the formula has none."""
    idx = prop_indices(formula)
    return max(idx) if idx else -1


def depth(formula: Formula) -> int:
    match formula:
        case Prop() | Const():
            return 1
        case Not(child=c):
            return 1 + depth(c)
        case And(children=cs) | Or(children=cs):
            return 1 + max(depth(c) for c in cs)
        case Implies(antecedent=a, consequent=c):
            return 1 + max(depth(a), depth(c))
    raise TypeError(f"not a formula node: {formula!r}")


# --------------------------------------------------------------------------
# DSL parser
#
# formula := impl
# impl    := or ("->" impl)?          right-associative
# or      := and ("|" and)*           flattened to one n-ary Or
# and     := unary ("&" unary)*       flattened to one n-ary And
# unary   := "~" unary | "(" formula ")" | IDENT | NUMBER
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<arrow>->)"
    r"|(?P<op>[~&|()])"
    r"|(?P<number>\d+\.\d*|\.\d+|\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: list[str] | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.fixed_names = names is not None
        self.name_to_index: dict[str, int] = (
            {n: i for i, n in enumerate(names)} if names is not None else {}
        )

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, text, offset = self.peek()
        if text != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", offset)
        return self.advance()

    def parse(self) -> Formula:
        node = self.impl()
        kind, text, offset = self.peek()
        if kind != "eof":
            raise FormulaSyntaxError(f"trailing input {text!r}", offset)
        return node

    def impl(self) -> Formula:
        left = self.or_()
        if self.peek()[0] == "arrow":
            self.advance()
            right = self.impl()
            return Implies(left, right)
        return left

    def or_(self) -> Formula:
        parts = [self.and_()]
        while self.peek()[1] == "|":
            self.advance()
            parts.append(self.and_())
        if len(parts) == 1:
            return parts[0]
        flat: list[Formula] = []
        for p in parts:
            flat.extend(p.children if isinstance(p, Or) else (p,))
        return Or(tuple(flat))

    def and_(self) -> Formula:
        parts = [self.unary()]
        while self.peek()[1] == "&":
            self.advance()
            parts.append(self.unary())
        if len(parts) == 1:
            return parts[0]
        flat: list[Formula] = []
        for p in parts:
            flat.extend(p.children if isinstance(p, And) else (p,))
        return And(tuple(flat))

    def unary(self) -> Formula:
        kind, text, offset = self.peek()
        if text == "~":
            self.advance()
            return Not(self.unary())
        if text == "(":
            self.advance()
            node = self.impl()
            self.expect(")")
            return node
        if kind == "number":
            self.advance()
            value = float(text)
            if not 0.0 <= value <= 1.0:
                raise FormulaSyntaxError(f"constant {text} outside [0, 1]", offset)
            return Const(value)
        if kind == "ident":
            self.advance()
            if text not in self.name_to_index:
                if self.fixed_names:
                    raise FormulaSyntaxError(f"unknown proposition {text!r}", offset)
                self.name_to_index[text] = len(self.name_to_index)
            return Prop(self.name_to_index[text])
        raise FormulaSyntaxError(f"expected a formula, found {text or 'end of input'!r}", offset)


def parse_formula(text: str, names: list[str] | None = None) -> Formula:
    """Parse the DSL.

    Proposition indices follow `names` when given, otherwise they are assigned
    in order of first occurrence.  `&` and `|` chains collapse into a single
    n-ary node; `->` is right-associative; precedence is ~ > & > | > ->.
    """
    return _Parser(text, names).parse()


def parse_formula_with_names(text: str) -> tuple[Formula, list[str]]:
    """Like parse_formula, also returning the names in index order."""
    parser = _Parser(text, None)
    node = parser.parse()
    names = [None] * len(parser.name_to_index)
    for name, i in parser.name_to_index.items():
        names[i] = name
    return node, names


def render(formula: Formula, names: list[str] | None = None) -> str:
    """Render back to DSL text; reparses to a structurally identical tree."""

    def name(i: int) -> str:
        if names is not None:
            return names[i]
        return f"p{i}"

    def go(node: Formula, parent_level: int) -> str:
        # levels: 0 impl, 1 or, 2 and, 3 unary; parenthesize when looser than context
        match node:
            case Prop(index=i):
                return name(i)
            case Const(value=v):
                return repr(v)
            case Not(child=c):
                return "~" + go(c, 3)
            case And(children=cs):
                text = " & ".join(go(c, 3) for c in cs)
                return f"({text})" if parent_level > 2 else text
            case Or(children=cs):
                text = " | ".join(go(c, 2) for c in cs)
                return f"({text})" if parent_level > 1 else text
            case Implies(antecedent=a, consequent=c):
                text = f"{go(a, 1)} -> {go(c, 0)}"
                return f"({text})" if parent_level > 0 else text
        raise TypeError(f"not a formula node: {node!r}")

    return go(formula, 0)


# --------------------------------------------------------------------------
# DIMACS CNF
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CnfInstance:
    """A CNF instance with DIMACS-style signed literals.

    Literals keep the 1-based DIMACS sign convention; the internal variable
    index of a literal is abs(lit) - 1.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars <= 0:
            raise ValueError("num_vars must be positive")
        if len(self.clauses) == 0:
            raise ValueError("clause list is empty")
        for clause in self.clauses:
            if len(clause) == 0:
                raise ValueError("empty clause")
            for lit in clause:
                if lit == 0:
                    raise ValueError("literal 0 is not allowed")
                if abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def lit_var(lit: int) -> int:
    """0-based variable index of a signed DIMACS literal."""
    return abs(lit) - 1


def parse_dimacs(text: str, strict: bool = True) -> CnfInstance:
    """Parse DIMACS CNF file contents.

    Comment lines (`c ...`) are skipped, clauses may span lines and are
    terminated by 0, and the SATLIB `%` / trailing `0` footer is tolerated.
    A clause-count mismatch with the header raises in strict mode and warns
    otherwise.
    """
    num_vars = num_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    done = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            done = True
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed problem line: {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise DimacsError("clause data before 'p cnf' header")
        if done:
            # SATLIB footer: a lone 0 after '%'
            if line != "0":
                raise DimacsError(f"unexpected content after '%' footer: {line!r}")
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if current:
                    clauses.append(tuple(current))
                    current = []
            else:
                if abs(lit) > num_vars:
                    raise DimacsError(f"literal {lit} out of range for {num_vars} variables")
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if num_clauses is not None and len(clauses) != num_clauses:
        msg = f"header declares {num_clauses} clauses, found {len(clauses)}"
        if strict:
            raise DimacsError(msg)
        warnings.warn(msg, stacklevel=2)
    return CnfInstance(num_vars, tuple(clauses))


def cnf_to_formula(instance: CnfInstance, max_clauses: int | None = None) -> Formula:
    """Conjunction over the first `max_clauses` clauses (all when omitted).

    Output depth is always 3: And over Or over (possibly negated) Prop.
    """
    if max_clauses is not None:
        if not 1 <= max_clauses <= instance.num_clauses:
            raise ValueError(
                f"max_clauses {max_clauses} outside [1, {instance.num_clauses}]"
            )
        clauses = instance.clauses[:max_clauses]
    else:
        clauses = instance.clauses

    def literal(lit: int) -> Formula:
        p = Prop(lit_var(lit))
        return p if lit > 0 else Not(p)

    return And(tuple(Or(tuple(literal(l) for l in clause)) for clause in clauses))
