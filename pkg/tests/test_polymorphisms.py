import random
from itertools import product

import pytest

from qecsp.errors import SchemeError
from qecsp.model import ConstraintLanguage, Relation, RelationalStructure
from qecsp.polymorphisms import (
    Operation,
    SetFunction,
    affine_maltsev,
    boolean_and,
    boolean_majority,
    boolean_xor3,
    classify_set_function,
    is_polymorphism,
    is_set_function_polymorphism,
    mask_of,
    max_set_function,
    min_set_function,
    power_structure,
    recognize_operation_class,
    semilattice_to_set_function,
)
from qecsp.reductions import gamma_horn, gamma_two

from helpers import rel


def unary_identity(domain):
    return Operation.from_callable("id", domain, 1, lambda x: x)


class TestIsPolymorphism:
    def test_majority_preserves_gamma_two(self):
        assert is_polymorphism(boolean_majority(), gamma_two())

    def test_and_preserves_gamma_horn(self):
        assert is_polymorphism(boolean_and(), gamma_horn())

    def test_identity_preserves_anything(self):
        rng = random.Random(3)
        for _ in range(20):
            d = rng.choice((2, 3))
            arity = rng.randint(1, 3)
            tuples = {
                tuple(rng.randrange(d) for _ in range(arity)) for _ in range(rng.randint(0, 5))
            }
            lang = ConstraintLanguage.of(d, [rel("R", arity, tuples)])
            assert is_polymorphism(unary_identity(d), lang)

    def test_domain_mismatch_rejected(self):
        with pytest.raises(Exception):
            is_polymorphism(boolean_and(), ConstraintLanguage.of(3, [rel("R", 1, [(2,)])]))

    def test_agrees_with_definition_unrolling(self):
        """Cross-check against a direct definition-unrolling oracle."""
        rng = random.Random(11)
        for _ in range(60):
            d = rng.choice((2, 3))
            k = rng.randint(1, 3)
            op = Operation(
                "r", d, k, tuple(rng.randrange(d) for _ in range(d**k))
            )
            arity = rng.randint(1, 2)
            tuples = [
                tuple(rng.randrange(d) for _ in range(arity)) for _ in range(rng.randint(0, 4))
            ]
            r = rel("R", arity, tuples)
            naive = all(
                tuple(op.apply(col) for col in zip(*choice)) in r.tuples
                for choice in product(sorted(r.tuples), repeat=k)
            )
            assert is_polymorphism(op, ConstraintLanguage.of(d, [r])) == naive


class TestPowerStructure:
    def test_singleton_universe(self):
        b = RelationalStructure(1, {"R": rel("R", 1, [(0,)])})
        wp = power_structure(b)
        assert wp.universe_size == 1
        assert wp.interpretations["R"].tuples == frozenset({(0,)})  # {0} is mask 1 -> element 0

    def test_single_pair_forced(self):
        b = RelationalStructure(2, {"R": rel("R", 2, [(0, 1)])})
        wp = power_structure(b)
        assert wp.interpretations["R"].tuples == frozenset({(mask_of([0]) - 1, mask_of([1]) - 1)})

    def test_diagonal_exactly_three(self):
        b = RelationalStructure(2, {"R": rel("R", 2, [(0, 0), (1, 1)])})
        wp = power_structure(b)
        expected = {
            (mask_of([0]) - 1, mask_of([0]) - 1),
            (mask_of([1]) - 1, mask_of([1]) - 1),
            (mask_of([0, 1]) - 1, mask_of([0, 1]) - 1),
        }
        assert wp.interpretations["R"].tuples == expected

    def test_matches_subset_enumeration(self):
        rng = random.Random(4)
        for _ in range(20):
            d = rng.choice((2, 3))
            arity = rng.randint(1, 2)
            tuples = [
                tuple(rng.randrange(d) for _ in range(arity)) for _ in range(rng.randint(1, 5))
            ]
            b = RelationalStructure(d, {"R": rel("R", arity, tuples)})
            wp = power_structure(b)
            ts = sorted(set(map(tuple, tuples)))
            expected = set()
            for bits in range(1, 2 ** len(ts)):
                chosen = [ts[i] for i in range(len(ts)) if (bits >> i) & 1]
                expected.add(tuple(mask_of(col) - 1 for col in zip(*chosen)))
            assert wp.interpretations["R"].tuples == expected


class TestSetFunctionPolymorphism:
    def test_min_preserves_gamma_horn(self):
        assert is_set_function_polymorphism(min_set_function(2), gamma_horn())

    def test_min_fails_on_neq(self):
        neq = ConstraintLanguage.of(2, [rel("NEQ", 2, [(0, 1), (1, 0)])])
        assert not is_set_function_polymorphism(min_set_function(2), neq)

    def test_empty_relations_always_fine(self):
        lang = ConstraintLanguage.of(2, [rel("E", 2, [])])
        for table in product((0, 1), repeat=3):
            assert is_set_function_polymorphism(SetFunction("f", 2, table), lang)

    def test_equivalent_to_all_derived_ops(self):
        rng = random.Random(9)
        for _ in range(40):
            d = rng.choice((2, 3))
            f = SetFunction("f", d, tuple(rng.randrange(d) for _ in range(2**d - 1)))
            arity = rng.randint(1, 2)
            tuples = [
                tuple(rng.randrange(d) for _ in range(arity)) for _ in range(rng.randint(1, 5))
            ]
            lang = ConstraintLanguage.of(d, [rel("R", arity, tuples)])
            # hom-check equivalent to all f_i up to the covering bound arity*|D|
            bound = arity * d
            via_ops = all(is_polymorphism(f.derived(i), lang) for i in range(1, bound + 1))
            assert is_set_function_polymorphism(f, lang) == via_ops

    def test_checking_only_up_to_domain_size_is_not_enough(self):
        """Pinned counterexample: f_1..f_3 pass but f_4 fails (|D| = 3)."""
        r = rel("R", 2, [(1, 0), (2, 0), (0, 1), (0, 2), (0, 0)])
        lang = ConstraintLanguage.of(3, [r])
        table = {}
        for m in range(1, 8):
            values = [v for v in range(3) if (m >> v) & 1]
            if len(values) == 1:
                table[m] = values[0]
            elif set(values) == {0, 1} or set(values) == {0, 2}:
                table[m] = 0
            else:  # {1,2} and {0,1,2}
                table[m] = 1
        f = SetFunction("cx", 3, tuple(table[m] for m in range(1, 8)))
        assert all(is_polymorphism(f.derived(i), lang) for i in (1, 2, 3))
        assert not is_polymorphism(f.derived(4), lang)
        assert not is_set_function_polymorphism(f, lang)


class TestRecognizeOperationClass:
    def test_and_is_semilattice(self):
        c = recognize_operation_class(boolean_and())
        assert c.idempotent and c.semilattice
        assert not c.majority and c.near_unanimity is None and not c.maltsev

    def test_majority_flags(self):
        c = recognize_operation_class(boolean_majority())
        assert c.idempotent and c.majority and c.near_unanimity == 3
        assert not c.semilattice

    def test_xor3_is_maltsev(self):
        c = recognize_operation_class(boolean_xor3())
        assert c.maltsev and not c.majority and c.near_unanimity is None

    def test_affine_is_maltsev_on_three_elements(self):
        assert recognize_operation_class(affine_maltsev(3)).maltsev

    def test_nu_checked_at_own_arity(self):
        op = Operation.from_callable("nu4", 2, 4, lambda a, b, c, d: (a + b + c + d) >= 2)
        # returns the repeated value when three of four agree
        assert recognize_operation_class(op).near_unanimity == 4


class TestSemilatticeToSetFunction:
    def test_and_fold(self):
        f = semilattice_to_set_function(boolean_and())
        assert f.apply({0, 1}) == 0
        assert f.apply({1}) == 1

    def test_max_on_three(self):
        op = Operation.from_callable("max", 3, 2, max)
        f = semilattice_to_set_function(op)
        assert f.apply({0, 2}) == 2

    def test_singleton_identity(self):
        for op in (boolean_and(), Operation.from_callable("max", 3, 2, max)):
            f = semilattice_to_set_function(op)
            for v in range(op.domain_size):
                assert f.apply({v}) == v

    def test_non_semilattice_rejected(self):
        with pytest.raises(SchemeError):
            semilattice_to_set_function(boolean_xor3())

    def test_result_is_polymorphism_with_constants(self):
        op = boolean_and()
        f = semilattice_to_set_function(op)
        lang = ConstraintLanguage.of(
            2, [rel("K0", 1, [(0,)]), rel("K1", 1, [(1,)]), rel("LE", 2, [(0, 0), (0, 1), (1, 1)])]
        )
        assert is_polymorphism(op, lang)
        assert is_set_function_polymorphism(f, lang)


class TestClassifySetFunction:
    def test_min_is_easy(self):
        report = classify_set_function(min_set_function(2))
        assert report.verdict == "easy"
        assert set(report.coherent_sets) == {frozenset({1}), frozenset({0, 1})}

    def test_three_element_witness_hard(self):
        f = SetFunction.from_callable(
            "w", 3, lambda s: next(iter(s)) if len(s) == 1 else 2
        )
        report = classify_set_function(f)
        assert report.verdict == "hard"
        assert report.witness_pair == (frozenset({0}), frozenset({1}))

    def test_full_domain_always_coherent(self):
        rng = random.Random(2)
        for _ in range(30):
            d = rng.choice((2, 3))
            table = list(range(d))  # idempotent on singletons
            f_table = []
            for m in range(1, 2**d):
                values = [v for v in range(d) if (m >> v) & 1]
                f_table.append(values[0] if len(values) == 1 else rng.randrange(d))
            report = classify_set_function(SetFunction("r", d, tuple(f_table)))
            assert frozenset(range(d)) in set(report.coherent_sets)

    def test_non_idempotent_rejected(self):
        with pytest.raises(SchemeError):
            classify_set_function(SetFunction("bad", 2, (1, 1, 1)))

    def test_verdict_matches_witness(self):
        rng = random.Random(8)
        for _ in range(40):
            d = 3
            f_table = []
            for m in range(1, 2**d):
                values = [v for v in range(d) if (m >> v) & 1]
                f_table.append(values[0] if len(values) == 1 else rng.randrange(d))
            report = classify_set_function(SetFunction("r", d, tuple(f_table)))
            if report.verdict == "hard":
                c0, c1 = report.witness_pair
                assert not (c0 & c1)
                assert c0 in set(report.coherent_sets) and c1 in set(report.coherent_sets)
            else:
                assert report.witness_pair is None
                sets = list(report.coherent_sets)
                assert all(a & b for a in sets for b in sets)
