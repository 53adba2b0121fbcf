"""Domains, relations, extended constraints and quantified formulas.

The central object is :class:`QuantifiedFormula`: an alternating quantifier
prefix ``exists X1 forall Y1 exists X2 ... exists Xt`` over a finite domain
``{0, ..., domain_size-1}`` together with a conjunction of *extended
constraints*.  An extended constraint

    ``(y1 = d1) and ... and (ym = dm)  =>  R(x1, ..., xk)``

guards a relational head on existential variables with equalities on
universal variables; it is satisfied whenever some guard atom fails or the
head tuple lies in ``R``.

Everything here is immutable after construction and safe to share across
threads.  Variable names are plain strings; domain values are ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Optional, Sequence

from .errors import FormulaError

EXISTS = "e"
FORALL = "a"

Block = tuple[str, tuple[str, ...]]


@dataclass(frozen=True)
class Relation:
    """A named finite relation: a set of ``arity``-length value tuples.

    Arity 0 is allowed; its tuple set is either empty or ``{()}`` (the unique
    empty tuple), matching the projection conventions used by fingerprints.
    """

    name: str
    arity: int
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self):
        if self.arity < 0:
            raise FormulaError(f"relation {self.name}: negative arity")
        object.__setattr__(self, "tuples", frozenset(tuple(t) for t in self.tuples))
        for t in self.tuples:
            if len(t) != self.arity:
                raise FormulaError(
                    f"relation {self.name}: tuple {t} has length {len(t)}, expected {self.arity}"
                )
            if any(not isinstance(v, int) or v < 0 for v in t):
                raise FormulaError(f"relation {self.name}: bad entry in tuple {t}")

    @staticmethod
    def of(name: str, arity: int, tuples: Iterable[Sequence[int]]) -> "Relation":
        return Relation(name, arity, frozenset(tuple(t) for t in tuples))

    @property
    def is_empty(self) -> bool:
        return not self.tuples

    def max_value(self) -> int:
        return max((v for t in self.tuples for v in t), default=-1)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def truncate(self, values: Sequence[int]) -> frozenset[tuple[int, ...]]:
        """Tuple set of ``R_[d1..dj]``: suffixes of tuples starting with ``values``."""
        j = len(values)
        v = tuple(values)
        return frozenset(t[j:] for t in self.tuples if t[:j] == v)

    def packed_mask(self, domain_size: int) -> int:
        """Tuple set as a bitmask over mixed-radix tuple indices (bitset fast path)."""
        mask = 0
        for t in self.tuples:
            idx = 0
            for v in t:
                idx = idx * domain_size + v
            mask |= 1 << idx
        return mask


@dataclass(frozen=True)
class ConstraintLanguage:
    """A name-indexed collection of relations over one domain."""

    domain_size: int
    relations: Mapping[str, Relation]

    def __post_init__(self):
        if self.domain_size < 1:
            raise FormulaError("domain size must be >= 1")
        rels = dict(self.relations)
        for name, rel in rels.items():
            if name != rel.name:
                raise FormulaError(f"relation indexed as {name} but named {rel.name}")
            if rel.max_value() >= self.domain_size:
                raise FormulaError(f"relation {name} has values outside the domain")
        object.__setattr__(self, "relations", rels)

    @staticmethod
    def of(domain_size: int, rels: Iterable[Relation]) -> "ConstraintLanguage":
        rels = list(rels)
        names = [r.name for r in rels]
        if len(set(names)) != len(names):
            raise FormulaError("duplicate relation names in language")
        return ConstraintLanguage(domain_size, {r.name: r for r in rels})

    def __iter__(self):
        return iter(self.relations.values())

    def __getitem__(self, name: str) -> Relation:
        return self.relations[name]


@dataclass(frozen=True)
class ExtendedConstraint:
    """Guarded constraint ``(y1=d1) & ... & (ym=dm) => R(x1,...,xk)``.

    The guard is normalized at construction: duplicate agreeing atoms are
    dropped, and atoms are sorted by variable name.  Conflicting atoms on the
    same variable make the constraint vacuously true (``vacuous`` is set);
    callers typically drop such constraints.
    """

    guard: tuple[tuple[str, int], ...]
    relation: Relation
    head_vars: tuple[str, ...]
    vacuous: bool = field(default=False, compare=False)

    def __post_init__(self):
        if len(self.head_vars) != self.relation.arity:
            raise FormulaError(
                f"head {self.relation.name}: {len(self.head_vars)} vars for arity {self.relation.arity}"
            )
        seen: dict[str, int] = {}
        vacuous = False
        for y, d in self.guard:
            if y in seen and seen[y] != d:
                vacuous = True
            seen.setdefault(y, d)
        norm = tuple(sorted(seen.items())) if not vacuous else tuple(self.guard)
        object.__setattr__(self, "guard", norm)
        object.__setattr__(self, "head_vars", tuple(self.head_vars))
        object.__setattr__(self, "vacuous", vacuous)

    def variables(self) -> set[str]:
        return {y for y, _ in self.guard} | set(self.head_vars)


def eval_extended_constraint(ec: ExtendedConstraint, assignment: Mapping[str, int]) -> bool:
    """True iff some guard atom is violated or the head tuple is in the relation."""
    for v in ec.variables():
        if v not in assignment:
            raise FormulaError(f"unbound variable {v!r} in constraint evaluation")
    if ec.vacuous:
        return True
    for y, d in ec.guard:
        if assignment[y] != d:
            return True
    return tuple(assignment[x] for x in ec.head_vars) in ec.relation


@dataclass(frozen=True)
class QuantifiedFormula:
    """Alternating-prefix formula over extended constraints.

    ``blocks`` alternates existential/universal, starts existential (the first
    block may be empty), and ends existential.  Vacuously-true constraints are
    dropped at construction.  The existential order is declaration order.
    """

    domain_size: int
    blocks: tuple[Block, ...]
    constraints: tuple[ExtendedConstraint, ...]

    def __post_init__(self):
        if self.domain_size < 1:
            raise FormulaError("domain size must be >= 1")
        blocks = tuple((kind, tuple(vs)) for kind, vs in self.blocks)
        if not blocks:
            raise FormulaError("formula needs at least one block")
        for i, (kind, vs) in enumerate(blocks):
            expect = EXISTS if i % 2 == 0 else FORALL
            if kind != expect:
                raise FormulaError("blocks must alternate, starting existential")
            if i > 0 and not vs:
                raise FormulaError("only the first existential block may be empty")
        if blocks[-1][0] != EXISTS:
            raise FormulaError("last block must be existential")
        allvars = [v for _, vs in blocks for v in vs]
        if len(set(allvars)) != len(allvars):
            raise FormulaError("blocks must be pairwise disjoint")
        object.__setattr__(self, "blocks", blocks)

        evars = set(self.existential_vars)
        uvars = set(self.universal_vars)
        kept = []
        for ec in self.constraints:
            if ec.relation.max_value() >= self.domain_size:
                raise FormulaError(f"relation {ec.relation.name} exceeds domain")
            for y, d in ec.guard:
                if y not in uvars:
                    raise FormulaError(f"guard variable {y!r} is not universally quantified")
                if not 0 <= d < self.domain_size:
                    raise FormulaError(f"guard value {d} out of domain")
            for x in ec.head_vars:
                if x not in evars:
                    raise FormulaError(f"head variable {x!r} is not existentially quantified")
            if not ec.vacuous:
                kept.append(ec)
        object.__setattr__(self, "constraints", tuple(kept))

    # Prefix structure ---------------------------------------------------

    @cached_property
    def existential_vars(self) -> tuple[str, ...]:
        """All existential variables in the total order <=phi."""
        return tuple(v for kind, vs in self.blocks if kind == EXISTS for v in vs)

    @cached_property
    def universal_vars(self) -> tuple[str, ...]:
        return tuple(v for kind, vs in self.blocks if kind == FORALL for v in vs)

    @cached_property
    def all_vars(self) -> tuple[str, ...]:
        return tuple(v for _, vs in self.blocks for v in vs)

    @property
    def num_existential_blocks(self) -> int:
        return (len(self.blocks) + 1) // 2

    @property
    def first_existential_block(self) -> tuple[str, ...]:
        return self.blocks[0][1]

    @property
    def first_universal_block(self) -> tuple[str, ...]:
        if len(self.blocks) < 2:
            raise FormulaError("formula has no universal block")
        return self.blocks[1][1]

    def nonempty_block_count(self) -> int:
        return sum(1 for _, vs in self.blocks if vs)

    def kind_of(self, var: str) -> str:
        for kind, vs in self.blocks:
            if var in vs:
                return kind
        raise FormulaError(f"unknown variable {var!r}")

    def universals_preceding(self, var: str) -> tuple[str, ...]:
        """The set Y_x: universal variables quantified before ``var``."""
        out: list[str] = []
        for kind, vs in self.blocks:
            if var in vs:
                if kind != EXISTS:
                    raise FormulaError(f"{var!r} is not existential")
                return tuple(out)
            if kind == FORALL:
                out.extend(vs)
        raise FormulaError(f"unknown variable {var!r}")


def prefix_vars(phi: QuantifiedFormula, k: int) -> tuple[str, ...]:
    """The first ``k`` existential variables under <=phi."""
    ev = phi.existential_vars
    if not 0 <= k <= len(ev):
        raise FormulaError(f"prefix length {k} out of range 0..{len(ev)}")
    return ev[:k]


def instantiate_universals(phi: QuantifiedFormula, g: Mapping[str, int]) -> QuantifiedFormula:
    """phi[g]: drop the first universal block, instantiating its guard atoms.

    X1 and X2 merge into the new first existential block.  Constraints whose
    Y1-guard atoms all agree with ``g`` keep only their remaining atoms;
    constraints with a contradicting atom are deleted (vacuously true).
    """
    if phi.num_existential_blocks < 2:
        raise FormulaError("instantiate_universals needs at least two existential blocks")
    y1 = phi.first_universal_block
    if set(g) != set(y1):
        missing = set(y1) - set(g)
        extra = set(g) - set(y1)
        raise FormulaError(f"assignment must bind exactly Y1 (missing={missing}, extra={extra})")
    for y, d in g.items():
        if not 0 <= d < phi.domain_size:
            raise FormulaError(f"value {d} for {y!r} out of domain")

    merged: Block = (EXISTS, phi.blocks[0][1] + phi.blocks[2][1])
    blocks = (merged,) + phi.blocks[3:]

    kept: list[ExtendedConstraint] = []
    gset = set(y1)
    for ec in phi.constraints:
        remaining = []
        contradicted = False
        for y, d in ec.guard:
            if y in gset:
                if g[y] != d:
                    contradicted = True
                    break
            else:
                remaining.append((y, d))
        if contradicted:
            continue
        kept.append(ExtendedConstraint(tuple(remaining), ec.relation, ec.head_vars))
    return QuantifiedFormula(phi.domain_size, blocks, tuple(kept))


# Strategies -------------------------------------------------------------

Strategy = Mapping[str, Mapping[tuple[int, ...], int]]
# strategy[x] maps the tuple of values of universals_preceding(x), in prefix
# order, to the value chosen for x.


def check_winning_strategy(phi: QuantifiedFormula, strategy: Strategy) -> bool:
    """True iff for every universal assignment the induced play satisfies phi."""
    for x in phi.existential_vars:
        if x not in strategy:
            raise FormulaError(f"strategy missing response map for {x!r}")
    uvars = phi.universal_vars
    preceding = {x: phi.universals_preceding(x) for x in phi.existential_vars}
    for tau in product(range(phi.domain_size), repeat=len(uvars)):
        a = dict(zip(uvars, tau))
        for x in phi.existential_vars:
            key = tuple(a[y] for y in preceding[x])
            try:
                a[x] = strategy[x][key]
            except KeyError:
                raise FormulaError(f"strategy for {x!r} undefined on {key}") from None
        if not all(eval_extended_constraint(ec, a) for ec in phi.constraints):
            return False
    return True


@dataclass(frozen=True)
class RelationalStructure:
    """Finite relational structure: a universe size plus named interpretations."""

    universe_size: int
    interpretations: Mapping[str, Relation]

    def __post_init__(self):
        if self.universe_size < 1:
            raise FormulaError("universe must be nonempty")
        interp = dict(self.interpretations)
        for name, rel in interp.items():
            if rel.max_value() >= self.universe_size:
                raise FormulaError(f"interpretation {name} exceeds the universe")
        object.__setattr__(self, "interpretations", interp)

    @property
    def vocabulary(self) -> dict[str, int]:
        return {name: rel.arity for name, rel in self.interpretations.items()}

    def language(self) -> ConstraintLanguage:
        return ConstraintLanguage(self.universe_size, self.interpretations)

    @staticmethod
    def from_language(gamma: ConstraintLanguage) -> "RelationalStructure":
        return RelationalStructure(gamma.domain_size, dict(gamma.relations))


def is_homomorphism(h: Mapping[int, int], a: RelationalStructure, b: RelationalStructure) -> bool:
    """Check that ``h`` maps every tuple of ``a`` into the same-named relation of ``b``."""
    if a.vocabulary != b.vocabulary:
        return False
    if any(u not in h for u in range(a.universe_size)):
        return False
    if any(not 0 <= h[u] < b.universe_size for u in range(a.universe_size)):
        return False
    for name, rel in a.interpretations.items():
        target = b.interpretations[name]
        for t in rel.tuples:
            if tuple(h[v] for v in t) not in target:
                return False
    return True
