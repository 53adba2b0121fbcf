import random
from itertools import product

import pytest

from qecsp.model import EXISTS, FORALL, check_winning_strategy, instantiate_universals
from qecsp.oracle import brute_force_truth, find_winning_strategy, pin_first_block
from qecsp.testing import random_instance

from helpers import R0, R1, contradictory_formula, copy_formula, ec, formula, rel


def test_contradictory_constants_false():
    assert brute_force_truth(contradictory_formula()) is False


def test_copy_strategy_true():
    assert brute_force_truth(copy_formula()) is True


def test_empty_constraint_set_true():
    phi = formula(2, [(EXISTS, ("x",))], [])
    assert brute_force_truth(phi) is True


def test_arity_zero_heads():
    t = rel("T", 0, [()])
    f = rel("F", 0, [])
    assert brute_force_truth(formula(2, [(EXISTS, ("x",))], [ec([], t, [])]))
    assert not brute_force_truth(formula(2, [(EXISTS, ("x",))], [ec([], f, [])]))


def test_guarded_arity_zero_false_head():
    # forall y: (y=1) => FALSE()  — refutable by setting y=1
    f = rel("F", 0, [])
    phi = formula(
        2,
        [(EXISTS, ()), (FORALL, ("y",)), (EXISTS, ("x",))],
        [ec([("y", 1)], f, [])],
    )
    assert brute_force_truth(phi) is False


def test_backends_agree_on_random_instances():
    rng = random.Random(7)
    for _ in range(60):
        phi, _lang, _scheme = random_instance(rng)
        assert brute_force_truth(phi, backend="numba") == brute_force_truth(
            phi, backend="numpy"
        )


def test_game_semantics_decomposition():
    """truth(phi) = OR over X1 of AND over g of truth(phi[g] pinned)."""
    rng = random.Random(21)
    checked = 0
    while checked < 25:
        phi, _lang, _scheme = random_instance(rng)
        if phi.num_existential_blocks < 2:
            continue
        checked += 1
        x1 = phi.first_existential_block
        y1 = phi.first_universal_block
        d = phi.domain_size
        outer = []
        for xvals in product(range(d), repeat=len(x1)):
            pinned = pin_first_block(phi, dict(zip(x1, xvals)))
            inner = all(
                brute_force_truth(instantiate_universals(pinned, dict(zip(y1, g))))
                for g in product(range(d), repeat=len(y1))
            )
            outer.append(inner)
        assert brute_force_truth(phi) == any(outer)


def test_strategy_extraction_matches_truth():
    rng = random.Random(5)
    for _ in range(40):
        phi, _lang, _scheme = random_instance(rng)
        truth = brute_force_truth(phi)
        strategy = find_winning_strategy(phi)
        assert (strategy is not None) == truth
        if strategy is not None:
            assert check_winning_strategy(phi, strategy)
