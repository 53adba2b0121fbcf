import random
from itertools import combinations_with_replacement, product

import pytest

from qecsp.advanced import MaltsevScheme, NUScheme
from qecsp.errors import SchemeError
from qecsp.fingerprints import (
    ConstantScheme,
    PowersetFingerprint,
    PowersetScheme,
    scheme_for_language,
    scheme_from_id,
)
from qecsp.model import ConstraintLanguage
from qecsp.polymorphisms import SetFunction, mask_of, min_set_function
from qecsp.reductions import gamma_horn, gamma_two

from helpers import EQ2, NEQ, rel


def constant_scheme(d=1, domain=2):
    return ConstantScheme(domain, d)


def powerset_scheme(domain=2):
    return PowersetScheme(domain, min_set_function(domain))


def all_constant_fps(scheme, arity):
    return [scheme.bottom(arity), scheme.project(scheme.infer(scheme.top(), [], arity), arity)]


def all_powerset_fps(scheme, arity):
    full = range(1, 2**scheme.domain_size)
    fps = [PowersetFingerprint(arity, masks) for masks in product(full, repeat=arity)]
    fps.append(scheme.bottom(arity))
    return fps


class TestConstantScheme:
    def test_infer_top(self):
        s = constant_scheme(d=1)
        r = rel("R", 2, [(1, 1), (0, 1)])
        out = s.infer(s.top(), [(r, (0, 1))], 2)
        assert not s.is_empty(out) and out.arity == 2

    def test_infer_bottom_propagates(self):
        s = constant_scheme(d=1)
        out = s.infer(s.bottom(1), [], 3)
        assert s.is_empty(out) and out.arity == 3

    def test_infer_empty_relation(self):
        s = constant_scheme(d=1)
        out = s.infer(s.top(), [(rel("E", 1, []), (0,))], 2)
        assert s.is_empty(out)

    def test_non_valid_relation_is_misuse(self):
        s = constant_scheme(d=1)
        with pytest.raises(SchemeError):
            s.infer(s.top(), [(rel("R", 1, [(0,)]), (0,))], 1)

    def test_cons(self):
        s = constant_scheme(d=1)
        assert s.cons(s.infer(s.top(), [], 1)) == 1
        assert s.cons(s.infer(s.top(), [], 5)) == 1
        with pytest.raises(SchemeError):
            s.cons(s.bottom(1))

    def test_encoding_roundtrip(self):
        s = constant_scheme()
        for fp in (s.top(), s.bottom(4), s.infer(s.top(), [], 2)):
            assert s.decode(s.encode(fp)) == fp


class TestPowersetScheme:
    def test_ac_equality_example(self):
        s = powerset_scheme()
        start = PowersetFingerprint(1, (mask_of([0]),))
        out = s.infer(start, [(EQ2, (0, 1))], 2)
        assert out.masks == (mask_of([0]), mask_of([0]))

    def test_ac_no_support_bottom(self):
        s = powerset_scheme()
        start = PowersetFingerprint(1, (mask_of([1]),))
        out = s.infer(start, [(rel("R", 2, [(0, 1)]), (0, 1))], 2)
        assert s.is_empty(out) and out.arity == 2

    def test_ac_empty_prefix_nothing_pruned(self):
        s = powerset_scheme()
        out = s.infer(s.top(), [], 1)
        assert out.masks == (mask_of([0, 1]),)

    def test_ac_repeated_variable_support(self):
        # R(x,x) with R = {(0,1),(1,1)}: only the diagonal tuple (1,1) supports x
        s = powerset_scheme()
        out = s.infer(s.top(), [(rel("R", 2, [(0, 1), (1, 1)]), (0, 0))], 1)
        assert out.masks == (mask_of([1]),)

    def test_cons_examples(self):
        s = powerset_scheme()
        f = s.f
        assert s.cons(PowersetFingerprint(1, (mask_of([0, 1]),))) == 0
        assert s.cons(PowersetFingerprint(2, (mask_of([0, 1]), mask_of([1])))) == 1
        assert (
            s.cons(PowersetFingerprint(3, (mask_of([1]), mask_of([0, 1]), mask_of([0])))) == 0
        )
        with pytest.raises(SchemeError):
            s.cons(s.bottom(2))

    def test_encoding_roundtrip(self):
        s = powerset_scheme(3)
        fps = [
            s.top(),
            s.bottom(3),
            PowersetFingerprint(2, (0b101, 0b011)),
        ]
        for fp in fps:
            assert s.decode(s.encode(fp)) == fp
        with pytest.raises(SchemeError):
            s.decode("P 2 0 1")  # empty candidate set is not a valid mask


SCHEMES = {
    "constant": (constant_scheme, all_constant_fps),
    "powerset": (powerset_scheme, all_powerset_fps),
}


@pytest.mark.parametrize("name", sorted(SCHEMES))
class TestCollectionLaws:
    """Projection/pre-order laws, exhaustively at small arity (both domains)."""

    def _fps(self, name, domain, arity):
        make, enum = SCHEMES[name]
        scheme = make(domain=domain) if name == "powerset" else ConstantScheme(domain, domain - 1)
        return scheme, enum(scheme, arity)

    @pytest.mark.parametrize("domain", [2, 3])
    def test_projection_is_relation_projection(self, name, domain):
        for arity in range(0, 5):
            scheme, fps = self._fps(name, domain, arity)
            for fp in fps:
                full = scheme.relation_of(fp)
                for k in range(arity + 1):
                    projected = scheme.relation_of(scheme.project(fp, k))
                    assert projected == {t[:k] for t in full}

    @pytest.mark.parametrize("domain", [2, 3])
    def test_projection_composes(self, name, domain):
        for arity in range(0, 5):
            scheme, fps = self._fps(name, domain, arity)
            for fp in fps:
                for l in range(arity + 1):
                    for k in range(l + 1):
                        assert scheme.project(scheme.project(fp, l), k) == scheme.project(fp, k)

    @pytest.mark.parametrize("domain", [2])
    def test_leq_containment_and_projection_monotone(self, name, domain):
        for arity in range(0, 4):
            scheme, fps = self._fps(name, domain, arity)
            for fa, fb in product(fps, repeat=2):
                if scheme.leq(fa, fb):
                    assert scheme.relation_of(fa) <= scheme.relation_of(fb)
                    for k in range(arity + 1):
                        assert scheme.leq(scheme.project(fa, k), scheme.project(fb, k))


class TestPowersetChains:
    def longest_chain_steps(self, scheme, arity):
        """Greedy maximal strictly-decreasing chain, verified step by step."""
        full = (1 << scheme.domain_size) - 1
        fp = PowersetFingerprint(arity, (full,) * arity)
        steps = 0
        masks = list(fp.masks)
        for i in range(arity):
            while masks[i] & (masks[i] - 1):  # more than one bit
                lower = list(masks)
                lower[i] &= lower[i] - 1
                nxt = PowersetFingerprint(arity, tuple(lower))
                assert scheme.leq(nxt, fp) and not scheme.leq(fp, nxt)
                fp, masks = nxt, lower
                steps += 1
        bottom = scheme.bottom(arity)
        assert scheme.leq(bottom, fp) and not scheme.leq(fp, bottom)
        return steps + 1

    @pytest.mark.parametrize("domain", [2, 3])
    def test_chain_bound(self, domain):
        scheme = powerset_scheme(domain)
        for arity in range(1, 6):
            steps = self.longest_chain_steps(scheme, arity)
            assert steps == scheme.chain_bound(arity)
            assert steps <= arity * domain


class TestInferenceContracts:
    def random_system(self, rng, scheme, lang):
        n = rng.randint(1, 4)
        k = rng.randint(0, n)
        rels = list(lang)
        constraints = []
        for _ in range(rng.randint(0, 3)):
            r = rng.choice(rels)
            constraints.append((r, tuple(rng.randrange(n) for _ in range(r.arity))))
        if scheme.domain_size == 2 and isinstance(scheme, PowersetScheme):
            masks = tuple(rng.randint(1, 3) for _ in range(k))
            fp = PowersetFingerprint(k, masks)
        else:
            fp = scheme.project(scheme.infer(scheme.top(), [], k), k)
        return fp, constraints, n

    def test_soundness_and_progress_powerset(self):
        rng = random.Random(13)
        scheme = powerset_scheme()
        lang = gamma_horn()
        for _ in range(150):
            fp, constraints, n = self.random_system(rng, scheme, lang)
            out = scheme.infer(fp, constraints, n)
            # progress
            assert scheme.leq(scheme.project(out, fp.arity), fp)
            # soundness: satisfying extensions of fp survive
            for t in product((0, 1), repeat=n):
                if t[: fp.arity] not in scheme.relation_of(fp):
                    continue
                if all(tuple(t[p] for p in pos) in r.tuples for r, pos in constraints):
                    assert t in scheme.relation_of(out)

    def test_construction_mapping_contract(self):
        """cons(pi_i F) satisfies the constraints whenever F = infer(...) is nonempty."""
        rng = random.Random(29)
        scheme = powerset_scheme()
        lang = gamma_horn()
        hits = 0
        for _ in range(300):
            fp, constraints, n = self.random_system(rng, scheme, lang)
            out = scheme.infer(fp, constraints, n)
            if scheme.is_empty(out) or n == 0:
                continue
            hits += 1
            assignment = scheme.assignment_from(out)
            for r, pos in constraints:
                assert tuple(assignment[p] for p in pos) in r.tuples
        assert hits > 50


class TestSchemeSelection:
    def test_gamma_horn_finds_min(self):
        scheme = scheme_for_language(gamma_horn())
        assert isinstance(scheme, PowersetScheme)
        assert scheme.f.table == min_set_function(2).table

    def test_gamma_two_finds_majority_nu(self):
        scheme = scheme_for_language(gamma_two())
        assert isinstance(scheme, NUScheme)
        assert scheme.k == 3

    def test_neq_has_xor3_polymorphism_via_hint(self):
        from qecsp.polymorphisms import boolean_xor3

        lang = ConstraintLanguage.of(2, [NEQ])
        scheme = scheme_for_language(lang, hint=boolean_xor3())
        assert isinstance(scheme, MaltsevScheme)

    def test_neq_auto_detects_nu(self):
        # majority also preserves NEQ, and the NU search runs first
        lang = ConstraintLanguage.of(2, [NEQ])
        assert isinstance(scheme_for_language(lang), NUScheme)

    def test_parity_language_finds_maltsev(self):
        # NEQ rules out every set function; odd parity rules out majority
        odd3 = rel("ODD3", 3, [t for t in product((0, 1), repeat=3) if sum(t) % 2 == 1])
        scheme = scheme_for_language(ConstraintLanguage.of(2, [NEQ, odd3]))
        assert isinstance(scheme, MaltsevScheme)

    def test_no_scheme_is_none(self):
        nae = rel("NAE", 3, [t for t in product((0, 1), repeat=3) if len(set(t)) == 2])
        k0, k1 = rel("K0", 1, [(0,)]), rel("K1", 1, [(1,)])
        assert scheme_for_language(ConstraintLanguage.of(2, [nae, k0, k1])) is None

    def test_hint_verified(self):
        with pytest.raises(SchemeError):
            scheme_for_language(
                ConstraintLanguage.of(2, [NEQ]), hint=min_set_function(2)
            )

    def test_scheme_id_roundtrip(self):
        for scheme in (
            constant_scheme(),
            powerset_scheme(3),
            scheme_for_language(gamma_two()),
            scheme_for_language(ConstraintLanguage.of(2, [NEQ])),
        ):
            clone = scheme_from_id(scheme.scheme_id, scheme.domain_size)
            assert clone.scheme_id == scheme.scheme_id
