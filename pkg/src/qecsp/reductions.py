"""Instance transformations and hardness gadgets.

Clause-level front ends (extended 2-SAT and extended Horn encodings), the
standard-model embedding, hom-equivalence transfer, NAE normalization, the
criticality construction, the Horn-to-set-function reduction and the Pi2
hardness gadget.  Every transformation preserves truth exactly and never
increases the number of nonempty quantifier blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import ceil, log
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ReductionError
from .model import (
    EXISTS,
    FORALL,
    Block,
    ConstraintLanguage,
    ExtendedConstraint,
    QuantifiedFormula,
    Relation,
    RelationalStructure,
    is_homomorphism,
)
from .polymorphisms import SetFunction, classify_set_function, mask_of

Literal = tuple[str, bool]  # (variable, positive?)


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals over named variables."""

    literals: tuple[Literal, ...]

    def __post_init__(self):
        if not self.literals:
            raise ReductionError("empty clause")
        object.__setattr__(self, "literals", tuple((v, bool(p)) for v, p in self.literals))

    def variables(self) -> tuple[str, ...]:
        seen = []
        for v, _ in self.literals:
            if v not in seen:
                seen.append(v)
        return tuple(seen)

    def deduped(self) -> tuple[Literal, ...]:
        seen = []
        for lit in self.literals:
            if lit not in seen:
                seen.append(lit)
        return tuple(seen)

    def satisfied_by(self, assignment: Mapping[str, int]) -> bool:
        return any(bool(assignment[v]) == pos for v, pos in self.literals)


@dataclass(frozen=True)
class CNF:
    variables: tuple[str, ...]
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if not self.clauses:
            raise ReductionError("CNF must have at least one clause")
        for c in self.clauses:
            for v, _ in c.literals:
                if v not in self.variables:
                    raise ReductionError(f"clause variable {v!r} not declared")

    def is_satisfiable(self) -> bool:
        for bits in product((0, 1), repeat=len(self.variables)):
            a = dict(zip(self.variables, bits))
            if all(c.satisfied_by(a) for c in self.clauses):
                return True
        return False


@dataclass(frozen=True)
class ClausalFormula:
    """A boolean QBF in clausal form (prefix blocks plus clause matrix)."""

    blocks: tuple[Block, ...]
    clauses: tuple[Clause, ...]

    def kinds(self) -> dict[str, str]:
        return {v: kind for kind, vs in self.blocks for v in vs}

    def check_shapes(self, mode: str) -> None:
        kinds = self.kinds()
        for c in self.clauses:
            check_clause_shape(c, kinds, mode)


def check_clause_shape(clause: Clause, kinds: Mapping[str, str], mode: str) -> None:
    for v, _ in clause.literals:
        if v not in kinds:
            raise ReductionError(f"clause variable {v!r} not quantified")
    if mode == "twosat":
        occ = sum(1 for v, _ in clause.literals if kinds[v] == EXISTS)
        if occ > 2:
            raise ReductionError(f"not an extended 2-clause: {occ} existential occurrences")
    elif mode == "horn":
        pos = sum(1 for v, p in clause.deduped() if p and kinds[v] == EXISTS)
        if pos > 1:
            raise ReductionError(f"not an extended Horn clause: {pos} positive existential literals")
    else:
        raise ReductionError(f"unknown clause mode {mode!r}")


def _fresh_namer(used: Iterable[str]):
    taken = set(used)

    def fresh(stem: str) -> str:
        i = 0
        while True:
            name = f"{stem}{i}"
            if name not in taken:
                taken.add(name)
                return name
            i += 1

    return fresh


# Constraint conversion (section-2 machinery) -------------------------------


def constraint_to_extended(
    rel: Relation,
    args: Sequence[str],
    kinds: Mapping[str, str],
    domain_size: int,
) -> list[ExtendedConstraint]:
    """Split a mixed-quantifier constraint into |D|^j extended constraints.

    One per instantiation (d_1..d_j) of the universal positions, guarded by
    those equalities, with head the truncated relation R_[d_1..d_j] on the
    existential positions (stable order).  Vacuous entries (conflicting guard
    atoms from repeated universal arguments) are included in the count.
    """
    if len(args) != rel.arity:
        raise ReductionError(f"{rel.name}: got {len(args)} arguments for arity {rel.arity}")
    upos = [i for i, v in enumerate(args) if kinds[v] == FORALL]
    epos = [i for i, v in enumerate(args) if kinds[v] == EXISTS]
    out = []
    for dvec in product(range(domain_size), repeat=len(upos)):
        head_tuples = frozenset(
            tuple(t[i] for i in epos)
            for t in rel.tuples
            if all(t[upos[j]] == dvec[j] for j in range(len(upos)))
        )
        suffix = ",".join(str(d) for d in dvec)
        head = Relation(f"{rel.name}[{suffix}]" if upos else rel.name, len(epos), head_tuples)
        guard = tuple((args[upos[j]], dvec[j]) for j in range(len(upos)))
        out.append(ExtendedConstraint(guard, head, tuple(args[i] for i in epos)))
    return out


@dataclass(frozen=True)
class StandardFormula:
    """A standard-model instance: plain constraints over a mixed prefix."""

    domain_size: int
    blocks: tuple[Block, ...]
    constraints: tuple[tuple[Relation, tuple[str, ...]], ...]

    def kinds(self) -> dict[str, str]:
        return {v: kind for kind, vs in self.blocks for v in vs}


def standard_formula_truth(std: StandardFormula) -> QuantifiedFormula:
    """Exact extended-constraint form of a standard instance (for oracles)."""
    kinds = std.kinds()
    ecs = []
    for rel, args in std.constraints:
        ecs.extend(constraint_to_extended(rel, args, kinds, std.domain_size))
    return QuantifiedFormula(std.domain_size, std.blocks, tuple(ecs))


def standard_to_existential(std: StandardFormula, gamma: ConstraintLanguage) -> QuantifiedFormula:
    """Embed a standard instance into the existentially restricted model.

    Adds one pinned variable v_d per domain value and substitutes it for
    universal argument positions; heads stay in Gamma (which must contain
    every constant relation).  The nonempty block count is unchanged.
    """
    d = std.domain_size
    if gamma.domain_size != d:
        raise ReductionError("language domain mismatch")
    constants = {}
    for rel in gamma:
        if rel.arity == 1 and len(rel.tuples) == 1:
            constants.setdefault(next(iter(rel.tuples))[0], rel)
    missing = [v for v in range(d) if v not in constants]
    if missing:
        raise ReductionError(f"language lacks constant relations for {missing}")

    kinds = std.kinds()
    fresh = _fresh_namer(kinds)
    pinned = {v: fresh(f"_v{v}") for v in range(d)}
    ecs = [ExtendedConstraint((), constants[v], (pinned[v],)) for v in range(d)]
    for rel, args in std.constraints:
        upos = [i for i, a in enumerate(args) if kinds[a] == FORALL]
        for dvec in product(range(d), repeat=len(upos)):
            guard = tuple((args[upos[j]], dvec[j]) for j in range(len(upos)))
            head_vars = list(args)
            for j, i in enumerate(upos):
                head_vars[i] = pinned[dvec[j]]
            ecs.append(ExtendedConstraint(guard, rel, tuple(head_vars)))
    blocks = std.blocks[:-1] + (
        (EXISTS, std.blocks[-1][1] + tuple(pinned[v] for v in range(d))),
    )
    return QuantifiedFormula(d, blocks, tuple(ecs))


# Hom-equivalence transfer ---------------------------------------------------


def structure_of(phi: QuantifiedFormula) -> RelationalStructure:
    interp: dict[str, Relation] = {}
    for ec in phi.constraints:
        prev = interp.get(ec.relation.name)
        if prev is not None and prev.tuples != ec.relation.tuples:
            raise ReductionError(f"relation name {ec.relation.name!r} used inconsistently")
        interp[ec.relation.name] = ec.relation
    return RelationalStructure(phi.domain_size, interp)


def hom_equiv_transfer(
    phi: QuantifiedFormula,
    h: Mapping[int, int],
    h_back: Mapping[int, int],
    b_prime: RelationalStructure,
) -> QuantifiedFormula:
    """Move an instance to a homomorphically equivalent structure.

    Heads are swapped for the same-named relations of ``b_prime``; universal
    variables are re-coded (injectively when |B'| >= |B|, otherwise split into
    s variables with |B'|^s >= |B| using big-endian base-|B'| code words).
    """
    b = structure_of(phi)
    for name in b.interpretations:
        if name not in b_prime.interpretations:
            raise ReductionError(f"target structure lacks relation {name!r}")
    sub = RelationalStructure(
        b_prime.universe_size,
        {n: b_prime.interpretations[n] for n in b.interpretations},
    )
    if not is_homomorphism(h, b, sub):
        raise ReductionError("h is not a homomorphism from B to B'")
    if not is_homomorphism(h_back, sub, b):
        raise ReductionError("h' is not a homomorphism from B' to B")
    size_b, size_bp = phi.domain_size, b_prime.universe_size
    if size_bp < 2:
        raise ReductionError("|B'| must be >= 2 (size-1 structures are decided trivially)")

    def swapped(ec: ExtendedConstraint, guard) -> ExtendedConstraint:
        return ExtendedConstraint(guard, b_prime.interpretations[ec.relation.name], ec.head_vars)

    if size_bp >= size_b:
        # identity injection: guard values are already valid B' elements
        blocks = phi.blocks
        ecs = tuple(swapped(ec, ec.guard) for ec in phi.constraints)
        return QuantifiedFormula(size_bp, blocks, ecs)

    s = max(1, ceil(log(size_b) / log(size_bp)))
    while size_bp**s < size_b:
        s += 1
    fresh = _fresh_namer(phi.all_vars)
    split = {y: tuple(fresh(f"{y}_q") for _ in range(s)) for y in phi.universal_vars}

    def digits(value: int) -> tuple[int, ...]:
        out = []
        for i in range(s - 1, -1, -1):
            out.append((value // size_bp**i) % size_bp)
        return tuple(out)

    blocks = tuple(
        (kind, vs if kind == EXISTS else tuple(q for y in vs for q in split[y]))
        for kind, vs in phi.blocks
    )
    ecs = []
    for ec in phi.constraints:
        guard = []
        for y, dd in ec.guard:
            guard.extend(zip(split[y], digits(dd)))
        ecs.append(swapped(ec, tuple(guard)))
    return QuantifiedFormula(size_bp, blocks, tuple(ecs))


# NAE normalization -----------------------------------------------------------


def nae_relation() -> Relation:
    return Relation.of("NAE", 3, [t for t in product((0, 1), repeat=3) if len(set(t)) == 2])


def nae_normalize(phi: QuantifiedFormula) -> QuantifiedFormula:
    """Rewrite {NAE, {(0)}, {(1)}} heads into NAE-only via the c/c' gadget."""
    if phi.domain_size != 2:
        raise ReductionError("NAE normalization is a boolean reduction")
    nae = nae_relation()
    fresh = _fresh_namer(phi.all_vars)
    c, cp = fresh("_c"), fresh("_cp")
    ecs = [ExtendedConstraint((), nae, (c, c, cp))]
    for ec in phi.constraints:
        ts = ec.relation.tuples
        if ts == nae.tuples:
            ecs.append(ExtendedConstraint(ec.guard, nae, ec.head_vars))
        elif ts == frozenset({(0,)}):
            ecs.append(ExtendedConstraint(ec.guard, nae, (ec.head_vars[0], ec.head_vars[0], c)))
        elif ts == frozenset({(1,)}):
            ecs.append(ExtendedConstraint(ec.guard, nae, (ec.head_vars[0], ec.head_vars[0], cp)))
        else:
            raise ReductionError(f"head {ec.relation.name} is not NAE or a boolean constant")
    blocks = phi.blocks[:-1] + ((EXISTS, phi.blocks[-1][1] + (c, cp)),)
    return QuantifiedFormula(2, blocks, tuple(ecs))


# Criticality -----------------------------------------------------------------


def critical_family_eq_const(
    n: int, a: int, b: int, domain_size: Optional[int] = None
) -> list[list[tuple[Relation, tuple[str, ...]]]]:
    """The equality/constants critical family: jointly unsatisfiable, any
    single omission satisfiable."""
    if n < 2:
        raise ReductionError("critical families need n >= 2")
    if a == b:
        raise ReductionError("the two pinned constants must differ")
    d = domain_size if domain_size is not None else max(a, b) + 1
    if not (0 <= a < d and 0 <= b < d):
        raise ReductionError("constants outside the domain")
    eq = Relation.of("EQ", 2, [(v, v) for v in range(d)])
    ra = Relation.of(f"K{a}", 1, [(a,)])
    rb = Relation.of(f"K{b}", 1, [(b,)])
    v = [f"v{i}" for i in range(1, n + 1)]
    sets: list[list[tuple[Relation, tuple[str, ...]]]] = [
        [(eq, (v[0], v[1])), (ra, (v[0],))]
    ]
    for i in range(2, n):
        sets.append([(eq, (v[i - 1], v[i]))])
    sets.append([(rb, (v[n - 1],))])
    return sets


def critical_hardness_instance(
    cnf: CNF,
    family: Optional[list] = None,
    domain_size: int = 2,
    a0: int = 0,
    a1: int = 1,
) -> QuantifiedFormula:
    """forall-exists instance that is false iff the CNF is satisfiable.

    Clause i activates the family's i-th constraint set whenever one of its
    literals is satisfied by the universal assignment (read through a0/a1).
    Single-clause CNFs are padded by repeating the clause so the family
    indexing (which needs n >= 2) stays aligned.
    """
    clauses = list(cnf.clauses)
    while len(clauses) < 2:
        clauses.append(clauses[-1])
    if family is None:
        family = critical_family_eq_const(len(clauses), a0, a1, domain_size)
    if len(family) != len(clauses):
        raise ReductionError("family size must equal the clause count")
    ecs = []
    seen = set()
    for i, clause in enumerate(clauses):
        for rel, vars_ in family[i]:
            for v, positive in clause.literals:
                ec = ExtendedConstraint(((v, a1 if positive else a0),), rel, vars_)
                key = (ec.guard, rel.name, ec.head_vars)
                if key not in seen:
                    seen.add(key)
                    ecs.append(ec)
    xvars = []
    for constraints in family:
        for _rel, vars_ in constraints:
            for v in vars_:
                if v not in xvars:
                    xvars.append(v)
    blocks = ((EXISTS, ()), (FORALL, tuple(cnf.variables)), (EXISTS, tuple(xvars)))
    return QuantifiedFormula(domain_size, blocks, tuple(ecs))


# Clause encoders -------------------------------------------------------------


def horn_h_relation() -> Relation:
    return Relation.of("H", 3, [t for t in product((0, 1), repeat=3) if t != (1, 1, 0)])


def horn_constants() -> tuple[Relation, Relation]:
    return Relation.of("R0", 1, [(0,)]), Relation.of("R1", 1, [(1,)])


def twosat_head_relation(pattern: tuple[int, ...]) -> Relation:
    """R_(a_1..a_k): everything but the forbidden pattern."""
    name = "R" + "".join(str(a) for a in pattern) if pattern else "FALSE"
    tuples = [t for t in product((0, 1), repeat=len(pattern)) if t != pattern]
    return Relation.of(name, len(pattern), tuples)


def gamma_two() -> ConstraintLanguage:
    rels = [twosat_head_relation(p) for p in [(0,), (1,), (0, 0), (0, 1), (1, 1)]]
    return ConstraintLanguage.of(2, rels)


def gamma_horn() -> ConstraintLanguage:
    r0, r1 = horn_constants()
    return ConstraintLanguage.of(2, [horn_h_relation(), r0, r1])


def extended_clause_encode(
    clause: Clause,
    kinds: Mapping[str, str],
    mode: str,
    fresh=None,
) -> tuple[list[ExtendedConstraint], list[str]]:
    """Encode one clause as extended constraints over Gamma_2 or Gamma_H.

    twosat: a single head R_(a..) over the existential occurrences, guarded by
    the falsifying values of the universal literals.  horn: the H-chain with
    fresh existential helpers exactly following the worked translations.
    """
    check_clause_shape(clause, kinds, mode)
    fresh = fresh or _fresh_namer(kinds)
    guard = tuple(
        (v, 0 if positive else 1) for v, positive in clause.literals if kinds[v] == FORALL
    )
    if mode == "twosat":
        exist = [(v, p) for v, p in clause.literals if kinds[v] == EXISTS]
        pattern = tuple(0 if p else 1 for _, p in exist)
        head_vars = tuple(v for v, _ in exist)
        if pattern == (1, 0):  # canonicalize to the sorted Gamma_2 pattern
            pattern, head_vars = (0, 1), (head_vars[1], head_vars[0])
        return [ExtendedConstraint(guard, twosat_head_relation(pattern), head_vars)], []

    h = horn_h_relation()
    r0, r1 = horn_constants()
    lits = clause.deduped()
    positives = [v for v, p in lits if p and kinds[v] == EXISTS]
    negatives = [v for v, p in lits if not p and kinds[v] == EXISTS]
    ecs: list[ExtendedConstraint] = []
    new_vars: list[str] = []
    if positives:
        target = positives[0]
    else:
        target = fresh("_z")
        new_vars.append(target)
        ecs.append(ExtendedConstraint((), r0, (target,)))
    m = len(negatives)
    if m == 0:
        ecs.append(ExtendedConstraint(guard, r1, (target,)))
    elif m == 1:
        v = fresh("_t")
        new_vars.append(v)
        ecs.append(ExtendedConstraint((), r1, (v,)))
        ecs.append(ExtendedConstraint(guard, h, (v, negatives[0], target)))
    else:
        acc = negatives[0]
        for j in range(1, m - 1):
            v = fresh("_w")
            new_vars.append(v)
            ecs.append(ExtendedConstraint(guard, h, (acc, negatives[j], v)))
            acc = v
        ecs.append(ExtendedConstraint(guard, h, (acc, negatives[m - 1], target)))
    return ecs, new_vars


def _normalize_blocks(blocks: Sequence[Block], extra_exist: Sequence[str]) -> tuple[Block, ...]:
    """Formula-shape blocks: start existential, end existential, fresh vars last."""
    merged: list[list] = []
    for kind, vs in blocks:
        if merged and merged[-1][0] == kind:
            merged[-1][1].extend(vs)
        else:
            merged.append([kind, list(vs)])
    if not merged or merged[0][0] == FORALL:
        merged.insert(0, [EXISTS, []])
    if merged[-1][0] == FORALL:
        merged.append([EXISTS, []])
    merged[-1][1].extend(extra_exist)
    if not merged[-1][1] and len(merged) > 1:
        raise ReductionError("prefix ends universal and no existential variable was introduced")
    return tuple((kind, tuple(vs)) for kind, vs in merged)


def clausal_to_formula(clausal: ClausalFormula, mode: str) -> tuple[QuantifiedFormula, ConstraintLanguage]:
    """Encode a clausal QBF over Gamma_2 (twosat) or Gamma_H (horn)."""
    kinds = clausal.kinds()
    fresh = _fresh_namer(kinds)
    ecs: list[ExtendedConstraint] = []
    new_vars: list[str] = []
    for clause in clausal.clauses:
        out, added = extended_clause_encode(clause, kinds, mode, fresh)
        ecs.extend(out)
        new_vars.extend(added)
    blocks = _normalize_blocks(clausal.blocks, new_vars)
    phi = QuantifiedFormula(2, blocks, tuple(ecs))
    if mode == "horn":
        lang = gamma_horn()
    else:
        rels = {ec.relation.name: ec.relation for ec in phi.constraints}
        for rel in gamma_two():
            rels.setdefault(rel.name, rel)
        lang = ConstraintLanguage(2, rels)
    return phi, lang


def clausal_truth_formula(clausal: ClausalFormula) -> QuantifiedFormula:
    """Direct (encoder-free) semantics of a clausal QBF, for oracle pairs."""
    kinds = clausal.kinds()
    ecs = []
    for idx, clause in enumerate(clausal.clauses):
        vs = clause.variables()
        tuples = [
            t
            for t in product((0, 1), repeat=len(vs))
            if clause.satisfied_by(dict(zip(vs, t)))
        ]
        rel = Relation.of(f"CL{idx}", len(vs), tuples)
        ecs.extend(constraint_to_extended(rel, vs, kinds, 2))
    return QuantifiedFormula(2, _normalize_blocks(clausal.blocks, []), tuple(ecs))


# Horn -> hard set function ----------------------------------------------------


def split_wide_clauses(clausal: ClausalFormula, width: int = 3) -> ClausalFormula:
    """Resolution-style splitting until every clause has <= width literals.

    The two literals moved out are never the (unique) positive existential
    literal, so extended-Horn shape is preserved.
    """
    kinds = clausal.kinds()
    fresh = _fresh_namer(kinds)
    clauses = list(clausal.clauses)
    new_vars: list[str] = []
    out: list[Clause] = []
    while clauses:
        clause = clauses.pop(0)
        lits = clause.deduped()
        if len(lits) <= width:
            out.append(Clause(lits))
            continue
        movable = [
            lit for lit in lits if not (lit[1] and kinds.get(lit[0], EXISTS) == EXISTS)
        ]
        if len(movable) < 2:
            raise ReductionError("cannot split: too many positive existential literals")
        l1, l2 = movable[0], movable[1]
        rest = [lit for lit in lits if lit not in (l1, l2)]
        v = fresh("_s")
        new_vars.append(v)
        kinds[v] = EXISTS
        out.append(Clause((l1, l2, (v, True))))
        clauses.insert(0, Clause(((v, False),) + tuple(rest)))
    blocks = _normalize_blocks(clausal.blocks, new_vars)
    return ClausalFormula(blocks, tuple(out))


def horn_to_setfunction(
    clausal: ClausalFormula, f: SetFunction
) -> tuple[QuantifiedFormula, ConstraintLanguage]:
    """Reduce an extended quantified Horn formula to QCSP(f) for a hard f.

    Literals map to the coherent-set membership conditions (y not in C0 /
    y not in C1 / x = c_t / x not in C); each clause's disjunction is
    materialized as an explicit f-invariant relation and then split into
    extended constraints.
    """
    clausal.check_shapes("horn")
    report = classify_set_function(f)
    if report.verdict != "hard":
        raise ReductionError("the set function is easy; the reduction needs a hard one")
    c0, c1 = report.witness_pair
    d = f.domain_size
    full = frozenset(range(d))
    proper = [c for c in report.coherent_sets if c != full]
    if not proper:
        raise ReductionError("no proper coherent set exists")
    c_set = min(proper, key=lambda s: mask_of(s))
    c_t = min(c_set)

    clausal = split_wide_clauses(clausal)
    kinds = clausal.kinds()
    ecs: list[ExtendedConstraint] = []
    for idx, clause in enumerate(clausal.clauses):
        lits = clause.deduped()
        vs = clause.variables()

        def lit_holds(lit: Literal, value: int) -> bool:
            v, positive = lit
            if kinds[v] == FORALL:
                return value not in (c0 if positive else c1)
            return value == c_t if positive else value not in c_set

        tuples = [
            t
            for t in product(range(d), repeat=len(vs))
            if any(lit_holds(lit, t[vs.index(lit[0])]) for lit in lits)
        ]
        rel = Relation.of(f"M{idx}", len(vs), tuples)
        ecs.extend(constraint_to_extended(rel, vs, kinds, d))
    phi = QuantifiedFormula(d, clausal.blocks, tuple(ecs))
    heads = {}
    for ec in phi.constraints:
        heads[ec.relation.name] = ec.relation
    return phi, ConstraintLanguage(d, heads)


# Pi2 hardness gadget ----------------------------------------------------------


def pi2_gadget_clauses(cnf: CNF, universal_vars: Sequence[str] = ()) -> ClausalFormula:
    """The core-clause gadget as an extended quantified Horn clausal formula."""
    for c in cnf.clauses:
        if len(c.deduped()) > 3:
            raise ReductionError("gadget input clauses must have width <= 3")
    for w in universal_vars:
        if w not in cnf.variables:
            raise ReductionError(f"universal variable {w!r} not in the CNF")
    ys = [v for v in cnf.variables if v not in universal_vars]
    if not ys:
        raise ReductionError("at least one existentially chosen CNF variable is required")
    fresh = _fresh_namer(cnf.variables)
    x0 = {y: fresh(f"x0_{y}") for y in ys}
    x1 = {y: fresh(f"x1_{y}") for y in ys}
    dvar = fresh("d")

    blocks: list[Block] = []
    if universal_vars:
        blocks.append((FORALL, tuple(universal_vars)))
    for y in ys:
        blocks.append((EXISTS, (x0[y], x1[y])))
        blocks.append((FORALL, (y,)))
    blocks.append((EXISTS, (dvar,)))

    clauses = [Clause(((x0[ys[0]], False), (x1[ys[0]], False)))]
    for i in range(len(ys) - 1):
        yi, ynext = ys[i], ys[i + 1]
        clauses.append(
            Clause(((yi, False), (x0[ynext], False), (x1[ynext], False), (x1[yi], True)))
        )
        clauses.append(
            Clause(((yi, True), (x0[ynext], False), (x1[ynext], False), (x0[yi], True)))
        )
    yn = ys[-1]
    clauses.append(Clause(((yn, False), (dvar, False), (x1[yn], True))))
    clauses.append(Clause(((yn, True), (dvar, False), (x0[yn], True))))
    for c in cnf.clauses:
        clauses.append(Clause(tuple(c.literals) + ((dvar, True),)))
    return ClausalFormula(tuple(blocks), tuple(clauses))


def pi2_gadget(cnf: CNF, universal_vars: Sequence[str] = ()) -> tuple[QuantifiedFormula, ConstraintLanguage]:
    """Extended quantified Horn instance true iff the (Pi2) CNF input is true."""
    clausal = pi2_gadget_clauses(cnf, universal_vars)
    clausal.check_shapes("horn")
    return clausal_to_formula(clausal, "horn")
