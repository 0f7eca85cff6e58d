import numpy as np
import pytest
from hypothesis import strategies as st

from fuzzyrefine.formula import And, Const, Implies, Not, Or, Prop
from fuzzyrefine.semantics import Logic

ALL_LOGICS = [Logic.godel(), Logic.lukasiewicz(), Logic.product()]


@pytest.fixture(params=ALL_LOGICS, ids=lambda l: l.family.value)
def logic(request):
    return request.param


def unit_floats(**kw):
    return st.floats(min_value=0.0, max_value=1.0, allow_nan=False, **kw)


def truth_vectors(min_size=1, max_size=5):
    return st.lists(unit_floats(), min_size=min_size, max_size=max_size).map(np.array)


def formulas(max_props=4, max_depth=4, allow_const=True, distinct_props=False):
    """Recursive formula strategy; distinct_props makes each proposition occur once."""
    if distinct_props:
        # assign leaves unique indices post hoc via a counter wrapper
        def relabel(f):
            counter = [0]

            def go(node):
                match node:
                    case Prop():
                        idx = counter[0]
                        counter[0] += 1
                        return Prop(idx)
                    case Const():
                        return node
                    case Not(child=c):
                        return Not(go(c))
                    case And(children=cs):
                        return And(tuple(go(c) for c in cs))
                    case Or(children=cs):
                        return Or(tuple(go(c) for c in cs))
                    case Implies(antecedent=a, consequent=c):
                        return Implies(go(a), go(c))

            return go(f)

    leaves = [st.integers(min_value=0, max_value=max_props - 1).map(Prop)]
    if allow_const:
        leaves.append(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
            .map(lambda v: round(v, 3))
            .map(Const)
        )
    base = st.one_of(*leaves)

    def nary(cls):
        # parser-shaped chains: at least two operands, same-operator children flattened
        def build(parts):
            flat = []
            for p in parts:
                flat.extend(p.children if isinstance(p, cls) else (p,))
            return cls(tuple(flat))

        return build

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.lists(children, min_size=2, max_size=3).map(nary(And)),
            st.lists(children, min_size=2, max_size=3).map(nary(Or)),
            st.tuples(children, children).map(lambda ac: Implies(*ac)),
        )

    strat = st.recursive(base, extend, max_leaves=2**max_depth)
    if distinct_props:
        strat = strat.map(relabel)
    return strat


def num_props(formula) -> int:
    from fuzzyrefine.formula import max_prop_index

    return max_prop_index(formula) + 1
