"""Operation tables, set functions, polymorphism checks and coherence.

Subsets of the domain are encoded as bitmasks throughout (value ``v`` is in
mask ``m`` iff ``m >> v & 1``); set-function tables are indexed by
``mask - 1`` over the nonempty masks ``1 .. 2**|D|-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Iterable, Optional

from .errors import FormulaError, SchemeError
from .model import ConstraintLanguage, Relation, RelationalStructure


def mask_of(values: Iterable[int]) -> int:
    m = 0
    for v in values:
        m |= 1 << v
    return m


def mask_values(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


@dataclass(frozen=True)
class Operation:
    """A finite operation D^arity -> D, table in lexicographic argument order."""

    name: str
    domain_size: int
    arity: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise FormulaError("operation arity must be >= 1")
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if len(self.table) != self.domain_size**self.arity:
            raise FormulaError(
                f"operation {self.name}: table size {len(self.table)} != {self.domain_size ** self.arity}"
            )
        if any(not 0 <= v < self.domain_size for v in self.table):
            raise FormulaError(f"operation {self.name}: value out of domain")

    def apply(self, args) -> int:
        idx = 0
        for a in args:
            idx = idx * self.domain_size + a
        return self.table[idx]

    def __call__(self, *args) -> int:
        return self.apply(args)

    @staticmethod
    def from_callable(name: str, domain_size: int, arity: int, fn) -> "Operation":
        table = tuple(fn(*args) for args in product(range(domain_size), repeat=arity))
        return Operation(name, domain_size, arity, table)


@dataclass(frozen=True)
class SetFunction:
    """A map from nonempty subsets of D to D; table indexed by mask-1."""

    name: str
    domain_size: int
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if len(self.table) != 2**self.domain_size - 1:
            raise FormulaError(
                f"set function {self.name}: table size {len(self.table)} != {2 ** self.domain_size - 1}"
            )
        if any(not 0 <= v < self.domain_size for v in self.table):
            raise FormulaError(f"set function {self.name}: value out of domain")

    def apply_mask(self, mask: int) -> int:
        if not 0 < mask < 2**self.domain_size:
            raise FormulaError(f"set function {self.name}: bad mask {mask}")
        return self.table[mask - 1]

    def apply(self, values: Iterable[int]) -> int:
        return self.apply_mask(mask_of(values))

    def is_idempotent(self) -> bool:
        return all(self.apply_mask(1 << d) == d for d in range(self.domain_size))

    def derived(self, i: int) -> Operation:
        """The operation f_i(x1..xi) = f({x1..xi})."""
        return Operation.from_callable(
            f"{self.name}_{i}", self.domain_size, i, lambda *xs: self.apply(xs)
        )

    @staticmethod
    def from_callable(name: str, domain_size: int, fn) -> "SetFunction":
        table = tuple(fn(set(mask_values(m))) for m in range(1, 2**domain_size))
        return SetFunction(name, domain_size, table)


@dataclass(frozen=True)
class OperationClasses:
    idempotent: bool
    semilattice: bool
    majority: bool
    near_unanimity: Optional[int]  # the operation's arity if it is an NU, else None
    maltsev: bool


@dataclass(frozen=True)
class CoherenceReport:
    coherent_sets: tuple[frozenset[int], ...]
    verdict: str  # "hard" | "easy"
    witness_pair: Optional[tuple[frozenset[int], frozenset[int]]]


# Polymorphism checks -----------------------------------------------------


def _preserves_relation(op: Operation, rel: Relation) -> bool:
    if rel.is_empty or rel.arity == 0:
        return True
    tuples = rel.sorted_tuples()
    for choice in product(tuples, repeat=op.arity):
        image = tuple(op.apply(col) for col in zip(*choice))
        if image not in rel:
            return False
    return True


def is_polymorphism(op: Operation, gamma: ConstraintLanguage | Relation) -> bool:
    """True iff the coordinatewise image of every tuple choice stays in each relation."""
    if isinstance(gamma, Relation):
        return _preserves_relation(op, gamma)
    if op.domain_size != gamma.domain_size:
        raise FormulaError("operation and language have different domains")
    return all(_preserves_relation(op, rel) for rel in gamma)


def power_structure(b: RelationalStructure) -> RelationalStructure:
    """wp(B): universe = nonempty subsets of B, elements encoded as mask-1.

    For each symbol R and nonempty S subseteq R^B, the tuple of coordinate
    projections (S_1,...,S_k) is in the power interpretation.
    """
    interp = {}
    for name, rel in b.interpretations.items():
        tuples = set()
        if rel.arity == 0:
            if not rel.is_empty:
                tuples.add(())
        else:
            for profile in _column_profiles(rel):
                tuples.add(tuple(m - 1 for m in profile))
        interp[name] = Relation.of(name, rel.arity, tuples)
    return RelationalStructure(2**b.universe_size - 1, interp)


def _column_profiles(rel: Relation) -> set[tuple[int, ...]]:
    """All (mask_1,...,mask_k) column profiles of nonempty subsets of ``rel``.

    BFS over profiles: adding one tuple at a time reaches every subset's
    profile without enumerating 2^|R| subsets.
    """
    masks = [tuple(1 << v for v in t) for t in rel.sorted_tuples()]
    frontier = set(masks)
    seen: set[tuple[int, ...]] = set(frontier)
    while frontier:
        nxt = set()
        for prof in frontier:
            for tm in masks:
                merged = tuple(p | q for p, q in zip(prof, tm))
                if merged not in seen:
                    seen.add(merged)
                    nxt.add(merged)
        frontier = nxt
    return seen


def set_function_preserves(f: SetFunction, rel: Relation) -> bool:
    if rel.is_empty or rel.arity == 0:
        return True
    for profile in _column_profiles(rel):
        image = tuple(f.apply_mask(m) for m in profile)
        if image not in rel:
            return False
    return True


def is_set_function_polymorphism(f: SetFunction, gamma: ConstraintLanguage | Relation) -> bool:
    """Exact homomorphism check: f maps wp(B^Gamma) into B^Gamma.

    Equivalent to every derived f_i (i >= 1) being a polymorphism.  Checking
    only i <= |D| is not enough; see the regression test with a 3-element
    counterexample where f_4 fails although f_1..f_3 pass.
    """
    if isinstance(gamma, Relation):
        return set_function_preserves(f, gamma)
    if f.domain_size != gamma.domain_size:
        raise FormulaError("set function and language have different domains")
    return all(set_function_preserves(f, rel) for rel in gamma)


# Operation classification -------------------------------------------------


def recognize_operation_class(op: Operation) -> OperationClasses:
    d = op.domain_size
    rng = range(d)
    idempotent = all(op.apply((v,) * op.arity) == v for v in rng)

    semilattice = False
    if op.arity == 2:
        commutative = all(op(a, b) == op(b, a) for a in rng for b in rng)
        associative = all(
            op(op(a, b), c) == op(a, op(b, c)) for a in rng for b in rng for c in rng
        )
        semilattice = idempotent and commutative and associative

    nu = None
    if op.arity >= 3:
        ok = True
        for a in rng:
            for b in rng:
                for slot in range(op.arity):
                    args = [b] * op.arity
                    args[slot] = a
                    if op.apply(args) != b:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok and idempotent:
            nu = op.arity

    majority = nu == 3

    maltsev = False
    if op.arity == 3:
        maltsev = all(op(a, b, b) == a and op(b, b, a) == a for a in rng for b in rng)

    return OperationClasses(idempotent, semilattice, majority, nu, maltsev)


def semilattice_to_set_function(op: Operation) -> SetFunction:
    """Fold a semilattice operation over each subset (order-independent)."""
    if not recognize_operation_class(op).semilattice:
        raise SchemeError(f"{op.name} is not a semilattice operation")
    return SetFunction.from_callable(
        f"fold_{op.name}", op.domain_size, lambda s: reduce(op, sorted(s))
    )


# Coherence ---------------------------------------------------------------


def classify_set_function(f: SetFunction) -> CoherenceReport:
    """Enumerate coherent sets; hard iff two disjoint coherent sets exist."""
    if not f.is_idempotent():
        raise SchemeError("coherence classification requires an idempotent set function")
    d = f.domain_size
    all_masks = range(1, 2**d)
    coherent_masks = []
    for c in all_masks:
        ok = True
        for a in all_masks:
            if (1 << f.apply_mask(a)) & c and (a | c) != c:
                ok = False
                break
        if ok:
            coherent_masks.append(c)
    witness = None
    for i, c0 in enumerate(coherent_masks):
        for c1 in coherent_masks[i + 1 :]:
            if c0 & c1 == 0:
                witness = (frozenset(mask_values(c0)), frozenset(mask_values(c1)))
                break
        if witness:
            break
    return CoherenceReport(
        coherent_sets=tuple(frozenset(mask_values(c)) for c in coherent_masks),
        verdict="hard" if witness else "easy",
        witness_pair=witness,
    )


# Common operations --------------------------------------------------------


def boolean_and() -> Operation:
    return Operation.from_callable("and", 2, 2, lambda a, b: a & b)


def boolean_majority() -> Operation:
    return Operation.from_callable("majority", 2, 3, lambda a, b, c: (a + b + c) >= 2)


def boolean_xor3() -> Operation:
    return Operation.from_callable("xor3", 2, 3, lambda a, b, c: a ^ b ^ c)


def affine_maltsev(domain_size: int) -> Operation:
    """x - y + z mod |D|, a Mal'tsev operation on any finite domain."""
    return Operation.from_callable(
        "affine", domain_size, 3, lambda a, b, c: (a - b + c) % domain_size
    )


def min_set_function(domain_size: int) -> SetFunction:
    return SetFunction.from_callable("min", domain_size, min)


def max_set_function(domain_size: int) -> SetFunction:
    return SetFunction.from_callable("max", domain_size, max)
