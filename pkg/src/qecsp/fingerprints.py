"""Fingerprint schemes: the shared contract plus the two elementary schemes.

A fingerprint of arity n succinctly represents a relation over the first n
existential variables.  A scheme bundles, for one constraint language:

* projection onto shorter prefixes (``project``), composing correctly;
* a preorder ``leq`` implying relation containment, preserved by projection,
  with strictly decreasing chains of at most ``chain_bound(n)`` steps;
* a deterministic, sound, progress-making inference step ``infer`` taking a
  fingerprint over a prefix plus a constraint conjunction over n variables;
* a construction mapping ``cons`` recovering satisfying assignments from
  nonempty suitable fingerprints;
* a canonical text encoding (used verbatim in proof files, recomputed
  byte-exactly by the verifier).

Constraint conjunctions are passed as ``(Relation, positions)`` pairs, where
positions index the variables x_1..x_n (0-based).  ``relation_of`` enumerates
the represented relation and is exponential: it exists for tests only.

Concrete schemes here: the constant collection (d-valid languages) and the
powerset collection whose inference is arc consistency (set-function
polymorphisms).  The near-unanimity and Mal'tsev schemes live in
``qecsp.advanced``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .errors import SchemeError
from .model import ConstraintLanguage, Relation
from .polymorphisms import (
    Operation,
    SetFunction,
    boolean_majority,
    boolean_xor3,
    is_polymorphism,
    is_set_function_polymorphism,
    mask_values,
    recognize_operation_class,
    semilattice_to_set_function,
    set_function_preserves,
)

ConstraintAt = tuple[Relation, tuple[int, ...]]


def diagonal_tuples(rel: Relation, positions: Sequence[int]) -> list[tuple[int, ...]]:
    """Support tuples consistent with repeated variable positions."""
    pos = tuple(positions)
    if len(set(pos)) == len(pos):
        return rel.sorted_tuples()
    out = []
    for t in rel.sorted_tuples():
        values: dict[int, int] = {}
        ok = True
        for p, v in zip(pos, t):
            if values.setdefault(p, v) != v:
                ok = False
                break
        if ok:
            out.append(t)
    return out


class FingerprintScheme(ABC):
    """Capability bundle shared by all four schemes."""

    domain_size: int
    scheme_id: str

    @abstractmethod
    def top(self):
        """The nonempty arity-0 fingerprint."""

    @abstractmethod
    def bottom(self, arity: int):
        """The canonical empty fingerprint of the given arity."""

    @abstractmethod
    def project(self, fp, k: int):
        ...

    @abstractmethod
    def leq(self, fp, other) -> bool:
        ...

    def equiv(self, fp, other) -> bool:
        return self.leq(fp, other) and self.leq(other, fp)

    @abstractmethod
    def is_empty(self, fp) -> bool:
        ...

    @abstractmethod
    def infer(self, fp, constraints: Sequence[ConstraintAt], n: int):
        ...

    @abstractmethod
    def cons(self, fp) -> int:
        ...

    @abstractmethod
    def chain_bound(self, arity: int) -> int:
        """Max number of strict leq-steps among arity-n fingerprints."""

    @abstractmethod
    def encode(self, fp) -> str:
        ...

    @abstractmethod
    def decode(self, text: str):
        ...

    @abstractmethod
    def admits(self, rel: Relation) -> bool:
        """Whether the scheme's polymorphism preserves this relation."""

    @abstractmethod
    def relation_of(self, fp) -> frozenset[tuple[int, ...]]:
        ...

    def assignment_from(self, fp) -> tuple[int, ...]:
        """x_i -> cons(project(fp, i)) for i = 1..arity (the paper's mapping)."""
        return tuple(self.cons(self.project(fp, i)) for i in range(1, fp.arity + 1))


# Constant scheme ----------------------------------------------------------


@dataclass(frozen=True)
class ConstantFingerprint:
    arity: int
    empty: bool


class ConstantScheme(FingerprintScheme):
    """Fingerprints top_n / bot_n for d-valid languages; Cons is constantly d."""

    def __init__(self, domain_size: int, d: int):
        if not 0 <= d < domain_size:
            raise SchemeError(f"constant {d} outside domain of size {domain_size}")
        self.domain_size = domain_size
        self.d = d
        self.scheme_id = f"constant:{d}"

    def top(self):
        return ConstantFingerprint(0, False)

    def bottom(self, arity):
        return ConstantFingerprint(arity, True)

    def project(self, fp, k):
        if not 0 <= k <= fp.arity:
            raise SchemeError("projection index out of range")
        return ConstantFingerprint(k, fp.empty)

    def leq(self, fp, other):
        return fp.arity == other.arity and (fp.empty or not other.empty)

    def is_empty(self, fp):
        return fp.empty

    def infer(self, fp, constraints, n):
        if fp.arity > n:
            raise SchemeError("fingerprint wider than the constraint conjunction")
        empty = fp.empty
        for rel, _pos in constraints:
            if rel.is_empty:
                empty = True
            elif (self.d,) * rel.arity not in rel:
                raise SchemeError(f"relation {rel.name} is not {self.d}-valid")
        return ConstantFingerprint(n, empty)

    def cons(self, fp):
        if fp.empty:
            raise SchemeError("construction mapping on an empty fingerprint")
        return self.d

    def chain_bound(self, arity):
        return 1  # bot below top, nothing else

    def encode(self, fp):
        return f"K {fp.arity} {0 if fp.empty else 1}"

    def decode(self, text):
        parts = text.split()
        if len(parts) != 3 or parts[0] != "K":
            raise SchemeError(f"bad constant fingerprint encoding {text!r}")
        arity, bit = int(parts[1]), parts[2]
        if arity < 0 or bit not in ("0", "1"):
            raise SchemeError(f"bad constant fingerprint encoding {text!r}")
        return ConstantFingerprint(arity, bit == "0")

    def admits(self, rel):
        return rel.is_empty or (self.d,) * rel.arity in rel

    def relation_of(self, fp):
        if fp.empty:
            return frozenset()
        return frozenset({(self.d,) * fp.arity})


# Powerset / arc-consistency scheme -----------------------------------------


@dataclass(frozen=True)
class PowersetFingerprint:
    """Either bottom(arity) (masks None) or per-variable nonempty value masks."""

    arity: int
    masks: Optional[tuple[int, ...]]  # None encodes bottom

    def __post_init__(self):
        if self.masks is not None and len(self.masks) != self.arity:
            raise SchemeError("mask count must equal arity")


class PowersetScheme(FingerprintScheme):
    """Candidate-set fingerprints; inference is arc consistency, Cons is f(D_n)."""

    def __init__(self, domain_size: int, f: SetFunction):
        if f.domain_size != domain_size:
            raise SchemeError("set function domain mismatch")
        self.domain_size = domain_size
        self.f = f
        self.scheme_id = "setfn:" + ",".join(str(v) for v in f.table)

    @property
    def _full(self) -> int:
        return (1 << self.domain_size) - 1

    def top(self):
        return PowersetFingerprint(0, ())

    def bottom(self, arity):
        return PowersetFingerprint(arity, None)

    def project(self, fp, k):
        if not 0 <= k <= fp.arity:
            raise SchemeError("projection index out of range")
        if fp.masks is None:
            return PowersetFingerprint(k, None)
        return PowersetFingerprint(k, fp.masks[:k])

    def leq(self, fp, other):
        if fp.arity != other.arity:
            return False
        if fp.masks is None:
            return True
        if other.masks is None:
            return False
        return all(a & ~b == 0 for a, b in zip(fp.masks, other.masks))

    def is_empty(self, fp):
        return fp.masks is None

    def infer(self, fp, constraints, n):
        """Arc consistency over candidate sets seeded by the fingerprint.

        Deterministic sweep order (constraints in input order, argument slots
        ascending); the fixpoint itself is order-independent.
        """
        k = fp.arity
        if k > n:
            raise SchemeError("fingerprint wider than the constraint conjunction")
        if fp.masks is None:
            return self.bottom(n)
        masks = list(fp.masks) + [self._full] * (n - k)
        supports = []
        for rel, pos in constraints:
            if rel.is_empty:
                return self.bottom(n)
            if any(p < 0 or p >= n for p in pos):
                raise SchemeError("constraint position out of range")
            supports.append((tuple(pos), diagonal_tuples(rel, pos)))
            if not supports[-1][1]:
                return self.bottom(n)

        changed = True
        while changed:
            changed = False
            for pos, tuples in supports:
                if not pos:
                    continue
                for slot in range(len(pos)):
                    allowed = 0
                    for t in tuples:
                        if all((masks[pos[j]] >> t[j]) & 1 for j in range(len(pos))):
                            allowed |= 1 << t[slot]
                    new = masks[pos[slot]] & allowed
                    if new != masks[pos[slot]]:
                        if new == 0:
                            return self.bottom(n)
                        masks[pos[slot]] = new
                        changed = True
        return PowersetFingerprint(n, tuple(masks))

    def cons(self, fp):
        if fp.masks is None:
            raise SchemeError("construction mapping on an empty fingerprint")
        if fp.arity < 1:
            raise SchemeError("construction mapping needs arity >= 1")
        return self.f.apply_mask(fp.masks[-1])

    def chain_bound(self, arity):
        if arity == 0:
            return 1
        return arity * (self.domain_size - 1) + 1

    def encode(self, fp):
        if fp.masks is None:
            return f"P! {fp.arity}"
        return " ".join(["P", str(fp.arity)] + [str(m) for m in fp.masks])

    def decode(self, text):
        parts = text.split()
        if len(parts) >= 2 and parts[0] == "P!":
            if len(parts) != 2:
                raise SchemeError(f"bad powerset encoding {text!r}")
            return PowersetFingerprint(int(parts[1]), None)
        if len(parts) < 2 or parts[0] != "P":
            raise SchemeError(f"bad powerset encoding {text!r}")
        arity = int(parts[1])
        masks = tuple(int(m) for m in parts[2:])
        if len(masks) != arity or any(not 0 < m <= self._full for m in masks):
            raise SchemeError(f"bad powerset encoding {text!r}")
        return PowersetFingerprint(arity, masks)

    def admits(self, rel):
        return set_function_preserves(self.f, rel)

    def relation_of(self, fp):
        if fp.masks is None:
            return frozenset()
        return frozenset(product(*[mask_values(m) for m in fp.masks]))


# Scheme selection ----------------------------------------------------------


def _search_set_function(gamma: ConstraintLanguage) -> Optional[SetFunction]:
    d = gamma.domain_size
    rels = list(gamma)
    for table in product(range(d), repeat=2**d - 1):
        f = SetFunction("auto", d, table)
        if all(set_function_preserves(f, rel) for rel in rels):
            return f
    return None


def _search_ternary(gamma: ConstraintLanguage, want: str) -> Optional[Operation]:
    d = gamma.domain_size
    for table in product(range(d), repeat=d**3):
        op = Operation("auto", d, 3, table)
        cls = recognize_operation_class(op)
        hit = cls.near_unanimity == 3 if want == "nu" else cls.maltsev
        if hit and is_polymorphism(op, gamma):
            return op
    return None


def _valid_constant(gamma: ConstraintLanguage) -> Optional[int]:
    for d in range(gamma.domain_size):
        if all(rel.is_empty or (d,) * rel.arity in rel for rel in gamma):
            return d
    return None


def scheme_for_language(gamma: ConstraintLanguage, hint=None) -> Optional[FingerprintScheme]:
    """Pick a scheme: explicit hint, then set-function / NU / Mal'tsev search
    (at desk-scale domain sizes), then the d-valid constant scheme; None if
    nothing applies."""
    from .advanced import MaltsevScheme, NUScheme

    if hint is not None:
        if isinstance(hint, SetFunction):
            if not is_set_function_polymorphism(hint, gamma):
                raise SchemeError(f"{hint.name} is not a set-function polymorphism here")
            return PowersetScheme(gamma.domain_size, hint)
        if isinstance(hint, Operation):
            cls = recognize_operation_class(hint)
            if not is_polymorphism(hint, gamma):
                raise SchemeError(f"{hint.name} is not a polymorphism of this language")
            if cls.near_unanimity:
                return NUScheme(gamma.domain_size, hint)
            if cls.maltsev:
                return MaltsevScheme(gamma.domain_size, hint)
            if cls.semilattice:
                return PowersetScheme(gamma.domain_size, semilattice_to_set_function(hint))
            raise SchemeError(f"{hint.name} fits no supported scheme class")
        raise SchemeError(f"unsupported hint {hint!r}")

    if gamma.domain_size <= 3:
        f = _search_set_function(gamma)
        if f is not None:
            return PowersetScheme(gamma.domain_size, f)
    if gamma.domain_size == 2:
        op = _search_ternary(gamma, "nu")
        if op is not None:
            return NUScheme(gamma.domain_size, op)
        op = _search_ternary(gamma, "maltsev")
        if op is not None:
            return MaltsevScheme(gamma.domain_size, op)
    d = _valid_constant(gamma)
    if d is not None:
        return ConstantScheme(gamma.domain_size, d)
    return None


def scheme_from_id(scheme_id: str, domain_size: int) -> FingerprintScheme:
    """Reconstruct a scheme from its self-contained id (as in proof headers)."""
    from .advanced import MaltsevScheme, NUScheme

    kind, _, rest = scheme_id.partition(":")
    try:
        if kind == "constant":
            return ConstantScheme(domain_size, int(rest))
        if kind == "setfn":
            table = tuple(int(v) for v in rest.split(","))
            return PowersetScheme(domain_size, SetFunction("scheme", domain_size, table))
        if kind == "nu":
            arity_s, _, table_s = rest.partition(":")
            table = tuple(int(v) for v in table_s.split(","))
            op = Operation("scheme", domain_size, int(arity_s), table)
            if not recognize_operation_class(op).near_unanimity:
                raise SchemeError("declared operation is not near-unanimity")
            return NUScheme(domain_size, op)
        if kind == "maltsev":
            table = tuple(int(v) for v in rest.split(","))
            op = Operation("scheme", domain_size, 3, table)
            if not recognize_operation_class(op).maltsev:
                raise SchemeError("declared operation is not Mal'tsev")
            return MaltsevScheme(domain_size, op)
    except (ValueError, SchemeError) as exc:
        raise SchemeError(f"bad scheme id {scheme_id!r}: {exc}") from None
    raise SchemeError(f"unknown scheme kind {kind!r}")
