"""Shared builders for the test suite."""

from qecsp.model import EXISTS, FORALL, ConstraintLanguage, ExtendedConstraint, QuantifiedFormula, Relation


def rel(name, arity, tuples):
    return Relation.of(name, arity, tuples)


def ec(guard, relation, head):
    return ExtendedConstraint(tuple(guard), relation, tuple(head))


def formula(domain, blocks, constraints):
    return QuantifiedFormula(domain, tuple(blocks), tuple(constraints))


R0 = rel("R0", 1, [(0,)])
R1 = rel("R1", 1, [(1,)])
EQ2 = rel("EQ", 2, [(0, 0), (1, 1)])
NEQ = rel("NEQ", 2, [(0, 1), (1, 0)])


def copy_formula():
    """forall y exists x: (y=0)=>R0(x), (y=1)=>R1(x) — true by copying."""
    return formula(
        2,
        [(EXISTS, ()), (FORALL, ("y",)), (EXISTS, ("x",))],
        [ec([("y", 0)], R0, ["x"]), ec([("y", 1)], R1, ["x"])],
    )


def contradictory_formula():
    """exists x: R0(x) and R1(x) — false."""
    return formula(2, [(EXISTS, ("x",))], [ec([], R0, ["x"]), ec([], R1, ["x"])])
