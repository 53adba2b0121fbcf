"""Randomized instance generation and proof mutation, used by the test suite.

Languages are generated closed under the target scheme's polymorphism (by
explicit closure, not rejection sampling), so the per-scheme agreement suites
exercise the solver on admissible instances only.
"""

from __future__ import annotations

import random
from itertools import product
from typing import Optional

from .advanced import MaltsevScheme, NUScheme, maltsev_closure
from .fingerprints import ConstantScheme, FingerprintScheme, PowersetScheme
from .model import EXISTS, FORALL, ConstraintLanguage, ExtendedConstraint, QuantifiedFormula, Relation
from .polymorphisms import (
    Operation,
    SetFunction,
    affine_maltsev,
    boolean_majority,
    boolean_xor3,
    max_set_function,
    min_set_function,
)

SCHEME_KINDS = ("constant", "setfn", "nu", "maltsev")


def close_under_op(tuples, op: Operation) -> frozenset:
    current = set(map(tuple, tuples))
    while True:
        fresh = set()
        for choice in product(sorted(current), repeat=op.arity):
            image = tuple(op.apply(col) for col in zip(*choice))
            if image not in current:
                fresh.add(image)
        if not fresh:
            return frozenset(current)
        current |= fresh


def close_under_setfn(tuples, f: SetFunction, arity: int) -> frozenset:
    from .polymorphisms import _column_profiles

    current = set(map(tuple, tuples))
    while True:
        rel = Relation.of("tmp", arity, current)
        fresh = set()
        for profile in _column_profiles(rel):
            image = tuple(f.apply_mask(m) for m in profile)
            if image not in current:
                fresh.add(image)
        if not fresh:
            return frozenset(current)
        current |= fresh


def _random_tuples(rng: random.Random, domain: int, arity: int, count: int):
    return {tuple(rng.randrange(domain) for _ in range(arity)) for _ in range(count)}


def random_language(rng: random.Random, kind: str) -> tuple[ConstraintLanguage, FingerprintScheme]:
    """A random small language together with a scheme whose polymorphism preserves it."""
    if kind == "constant":
        domain = rng.choice((2, 3))
        d = rng.randrange(domain)
        rels = []
        for i in range(rng.randint(2, 4)):
            arity = rng.randint(1, 3)
            if rng.random() < 0.12:
                tuples: set = set()
            else:
                tuples = _random_tuples(rng, domain, arity, rng.randint(1, 4))
                tuples.add((d,) * arity)
            rels.append(Relation.of(f"R{i}", arity, tuples))
        lang = ConstraintLanguage.of(domain, rels)
        return lang, ConstantScheme(domain, d)

    if kind == "setfn":
        domain = rng.choice((2, 3))
        f = rng.choice((min_set_function(domain), max_set_function(domain)))
        rels = []
        for i in range(rng.randint(2, 4)):
            arity = rng.randint(1, 3)
            seed = _random_tuples(rng, domain, arity, rng.randint(1, 4))
            rels.append(Relation.of(f"R{i}", arity, close_under_setfn(seed, f, arity)))
        return ConstraintLanguage.of(domain, rels), PowersetScheme(domain, f)

    if kind == "nu":
        op = boolean_majority()
        rels = []
        for i in range(rng.randint(2, 4)):
            arity = rng.randint(1, 3)
            seed = _random_tuples(rng, 2, arity, rng.randint(1, 4))
            rels.append(Relation.of(f"R{i}", arity, close_under_op(seed, op)))
        return ConstraintLanguage.of(2, rels), NUScheme(2, op)

    if kind == "maltsev":
        domain = 2 if rng.random() < 0.7 else 3
        op = boolean_xor3() if domain == 2 else affine_maltsev(3)
        rels = []
        for i in range(rng.randint(2, 4)):
            arity = rng.randint(1, 3)
            seed = _random_tuples(rng, domain, arity, rng.randint(1, 3))
            rels.append(Relation.of(f"R{i}", arity, maltsev_closure(seed, op)))
        return ConstraintLanguage.of(domain, rels), MaltsevScheme(domain, op)

    raise ValueError(f"unknown scheme kind {kind!r}")


def random_formula(
    rng: random.Random,
    lang: ConstraintLanguage,
    max_vars: int = 6,
    max_constraints: int = 5,
) -> QuantifiedFormula:
    """A random formula (<= 3 nonempty blocks) whose heads come from ``lang``."""
    shape = rng.choice(("E", "AE", "EAE"))
    n = rng.randint(2, max_vars)
    if shape == "E":
        blocks = ((EXISTS, tuple(f"x{i}" for i in range(n))),)
    elif shape == "AE":
        nu = rng.randint(1, max(1, n - 1))
        blocks = (
            (EXISTS, ()),
            (FORALL, tuple(f"y{i}" for i in range(nu))),
            (EXISTS, tuple(f"x{i}" for i in range(n - nu))),
        )
        if not blocks[2][1]:
            blocks = (blocks[0], blocks[1], (EXISTS, ("x0",)))
    else:
        n = max(n, 3)
        n1 = rng.randint(1, n - 2)
        nu = rng.randint(1, n - n1 - 1)
        rest = n - n1 - nu
        blocks = (
            (EXISTS, tuple(f"x{i}" for i in range(n1))),
            (FORALL, tuple(f"y{i}" for i in range(nu))),
            (EXISTS, tuple(f"x{i}" for i in range(n1, n1 + max(rest, 1)))),
        )
    evars = [v for kind, vs in blocks for v in vs if kind == EXISTS]
    uvars = [v for kind, vs in blocks for v in vs if kind == FORALL]
    rels = list(lang)
    ecs = []
    for _ in range(rng.randint(1, max_constraints)):
        rel = rng.choice(rels)
        head = tuple(rng.choice(evars) for _ in range(rel.arity))
        guard = []
        if uvars:
            for y in rng.sample(uvars, k=min(len(uvars), rng.randint(0, 2))):
                guard.append((y, rng.randrange(lang.domain_size)))
        ecs.append(ExtendedConstraint(tuple(guard), rel, head))
    return QuantifiedFormula(lang.domain_size, blocks, tuple(ecs))


def random_instance(rng: random.Random, kind: Optional[str] = None):
    kind = kind or rng.choice(SCHEME_KINDS)
    lang, scheme = random_language(rng, kind)
    # D=3 Mal'tsev closures are cubic in |D|^n: keep those instances smaller
    max_vars = 4 if (kind == "maltsev" and lang.domain_size == 3) else 6
    phi = random_formula(rng, lang, max_vars=max_vars)
    return phi, lang, scheme


# Proof mutation -----------------------------------------------------------


def _mutate_digit(rng: random.Random, token: str) -> Optional[str]:
    positions = [i for i, ch in enumerate(token) if ch.isdigit()]
    if not positions:
        return None
    i = rng.choice(positions)
    repl = rng.choice([d for d in "0123456789" if d != token[i]])
    return token[:i] + repl + token[i:][1:]


def mutate_proof_text(rng: random.Random, text: str) -> str:
    """One random single-token edit targeting a binding-relevant field.

    Candidate sites: header digest / scheme kind, fingerprint encodings, step
    rule tags, step references (in/out/a/b/sub), context and branch
    assignments, and the conclusion pointer.  Every class is rejected by the
    verifier (recomputation, chaining, context cross-checks, or parsing).
    """
    lines = text.splitlines()
    for _ in range(200):
        idx = rng.randrange(len(lines))
        parts = lines[idx].split()
        if not parts:
            continue
        if parts[0] == "proof":
            which = rng.choice(("digest", "scheme"))
            if which == "digest":
                mut = _mutate_digit(rng, parts[3])
                if mut is None or mut == parts[3]:
                    continue
                parts[3] = mut
            else:
                kind = parts[2][len("scheme="):].split(":", 1)[0]
                i = rng.randrange(len(kind))
                repl = rng.choice([c for c in "abcdefgh" if c != kind[i]])
                parts[2] = "scheme=" + kind[:i] + repl + kind[i + 1:] + parts[2][len("scheme=") + len(kind):]
        elif parts[0] == "fp":
            i = rng.randrange(2, len(parts))
            mut = _mutate_digit(rng, parts[i])
            if mut is None or mut == parts[i]:
                continue
            parts[i] = mut
        elif parts[0] == "step":
            editable = [i for i, tok in enumerate(parts) if "=" in tok or tok in ("R1", "R2", "R3")]
            i = rng.choice(editable)
            if parts[i] in ("R1", "R2", "R3"):
                parts[i] = rng.choice([r for r in ("R1", "R2", "R3") if r != parts[i]])
            else:
                key, _, val = parts[i].partition("=")
                if key in ("in", "out", "a", "b", "sub"):
                    bump = int(val) + rng.choice((-2, -1, 1, 2, 7))
                    if bump == int(val) or bump < 0:
                        continue
                    parts[i] = f"{key}={bump}"
                else:  # ctx= or g= assignment digits
                    mut = _mutate_digit(rng, parts[i])
                    if mut is None or mut == parts[i]:
                        continue
                    parts[i] = mut
        elif parts[0] == "conclude":
            bump = int(parts[1]) + rng.choice((-2, -1, 1, 2))
            if bump == int(parts[1]) or bump < 0:
                continue
            parts[1] = str(bump)
        else:
            continue
        mutated = list(lines)
        mutated[idx] = " ".join(parts)
        joined = "\n".join(mutated) + "\n"
        if joined != text:
            return joined
    raise RuntimeError("could not produce a mutation (proof too degenerate)")
