"""Near-unanimity and Mal'tsev fingerprint schemes.

The NU scheme stores, per fingerprint, one relation for every variable scope
of size <= k (k = the NU operation's arity); inference establishes strong
k-consistency as a canonical, order-independent shrinking fixpoint.

The Mal'tsev scheme stores compact representations: small tuple sets F whose
closure under the Mal'tsev operation is the represented relation.  Inference
materializes the closure, intersects with each constraint, and re-compacts;
witness selection is lexicographic so re-verification is byte-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Optional

import numpy as np

from .errors import ContractViolation, SchemeError
from .fingerprints import FingerprintScheme, diagonal_tuples
from .model import Relation
from .polymorphisms import Operation, is_polymorphism, recognize_operation_class

# Near-unanimity scheme -----------------------------------------------------

Scope = tuple[int, ...]


@dataclass(frozen=True)
class NUFingerprint:
    """One relation per scope of size 1..k over v_1..v_n; scopes None = bottom."""

    arity: int
    k: int
    scopes: Optional[tuple[tuple[Scope, frozenset[tuple[int, ...]]], ...]]

    def scope_map(self) -> dict[Scope, frozenset[tuple[int, ...]]]:
        return dict(self.scopes or ())


def _all_scopes(n: int, k: int) -> list[Scope]:
    out: list[Scope] = []
    for m in range(1, min(k, n) + 1):
        out.extend(combinations(range(n), m))
    return out


def _restrict(t: tuple[int, ...], positions_in: Scope, sub: Scope) -> tuple[int, ...]:
    at = {p: v for p, v in zip(positions_in, t)}
    return tuple(at[p] for p in sub)


class NUScheme(FingerprintScheme):
    """Strong-k-consistency fingerprints for languages with an arity-k NU polymorphism."""

    def __init__(self, domain_size: int, op: Operation):
        cls = recognize_operation_class(op)
        if cls.near_unanimity is None:
            raise SchemeError(f"{op.name} is not a near-unanimity operation")
        if op.domain_size != domain_size:
            raise SchemeError("operation domain mismatch")
        self.domain_size = domain_size
        self.op = op
        self.k = op.arity
        self.scheme_id = f"nu:{op.arity}:" + ",".join(str(v) for v in op.table)

    def top(self):
        return NUFingerprint(0, self.k, ())

    def bottom(self, arity):
        return NUFingerprint(arity, self.k, None)

    def _make(self, arity, rel_map):
        items = tuple(sorted((s, frozenset(ts)) for s, ts in rel_map.items()))
        return NUFingerprint(arity, self.k, items)

    def project(self, fp, j):
        if not 0 <= j <= fp.arity:
            raise SchemeError("projection index out of range")
        if fp.scopes is None:
            return self.bottom(j)
        kept = {s: ts for s, ts in fp.scopes if all(p < j for p in s)}
        return self._make(j, kept)

    def leq(self, fp, other):
        if fp.arity != other.arity or fp.k != other.k:
            return False
        if fp.scopes is None:
            return True
        if other.scopes is None:
            return False
        mine, theirs = fp.scope_map(), other.scope_map()
        if set(mine) != set(theirs):
            return False
        return all(mine[s] <= theirs[s] for s in mine)

    def is_empty(self, fp):
        return fp.scopes is None

    def infer(self, fp, constraints, n):
        """Strong k-consistency closure of the constraints plus the fingerprint.

        The fixpoint of three monotone shrinking rules (constraint injection,
        downward consistency, single-variable extension) is order-independent,
        hence canonical.
        """
        if fp.arity > n:
            raise SchemeError("fingerprint wider than the constraint conjunction")
        if fp.scopes is None:
            return self.bottom(n)
        full = {}
        for s in _all_scopes(n, self.k):
            full[s] = set(product(range(self.domain_size), repeat=len(s)))

        def clamp(scope: Scope, allowed) -> bool:
            new = full[scope] & allowed
            if new != full[scope]:
                full[scope] = new
            return bool(new)

        # constraint injection (wide constraints enter via their projections;
        # exact under the NU assumption, which makes heads decomposable)
        for rel, pos in constraints:
            tuples = diagonal_tuples(rel, pos)
            scope = tuple(sorted(set(pos)))
            if not scope:
                if rel.is_empty:
                    return self.bottom(n)
                continue
            if not tuples:
                return self.bottom(n)
            reduced = {_restrict(t, pos, scope) for t in tuples}
            targets = [scope] if len(scope) <= self.k else [
                sub for m in range(1, self.k + 1) for sub in combinations(scope, m)
            ]
            for sub in targets:
                allowed = {_restrict(t, scope, sub) for t in reduced}
                if not clamp(sub, allowed):
                    return self.bottom(n)
        for s, ts in fp.scopes:
            if not clamp(s, set(ts)):
                return self.bottom(n)

        changed = True
        while changed:
            changed = False
            for s in full:
                if len(s) >= 2:  # downward: restrictions must lie in sub-scopes
                    keep = {
                        t
                        for t in full[s]
                        if all(
                            _restrict(t, s, sub) in full[sub]
                            for m in range(1, len(s))
                            for sub in combinations(s, m)
                        )
                    }
                    if keep != full[s]:
                        if not keep:
                            return self.bottom(n)
                        full[s] = keep
                        changed = True
                if len(s) < self.k:  # extension: each tuple extends to any w
                    for w in range(n):
                        if w in s:
                            continue
                        sw = tuple(sorted(s + (w,)))
                        keep = set()
                        for t in full[s]:
                            at = dict(zip(s, t))
                            for d in range(self.domain_size):
                                at[w] = d
                                if tuple(at[p] for p in sw) in full[sw]:
                                    keep.add(t)
                                    break
                        if keep != full[s]:
                            if not keep:
                                return self.bottom(n)
                            full[s] = keep
                            changed = True
        return self._make(n, full)

    def cons(self, fp):
        if fp.scopes is None:
            raise SchemeError("construction mapping on an empty fingerprint")
        if fp.arity < 1:
            raise SchemeError("construction mapping needs arity >= 1")
        values = self._cons_prefix(fp)
        return values[-1]

    def _cons_prefix(self, fp) -> list[int]:
        rel = fp.scope_map()
        values: list[int] = []
        for i in range(fp.arity):
            chosen = None
            for d in range(self.domain_size):
                at = dict(enumerate(values))
                at[i] = d
                if all(
                    tuple(at[p] for p in s) in ts
                    for s, ts in rel.items()
                    if i in s and max(s) == i
                ):
                    chosen = d
                    break
            if chosen is None:
                raise ContractViolation(
                    "strong k-consistency extension failed; fingerprint is not suitable"
                )
            values.append(chosen)
        return values

    def chain_bound(self, arity):
        if arity == 0:
            return 1
        slots = sum(
            len(list(combinations(range(arity), m))) for m in range(1, min(self.k, arity) + 1)
        )
        return slots * self.domain_size**self.k

    def encode(self, fp):
        if fp.scopes is None:
            return f"N! {fp.arity} {fp.k}"
        groups = []
        for s, ts in sorted(fp.scopes):
            scope_s = ",".join(str(p) for p in s)
            tup_s = ";".join(",".join(str(v) for v in t) for t in sorted(ts))
            groups.append(f"{scope_s}:{tup_s}")
        return " ".join([f"N {fp.arity} {fp.k}"] + groups)

    def decode(self, text):
        parts = text.split()
        if len(parts) >= 3 and parts[0] == "N!":
            return NUFingerprint(int(parts[1]), int(parts[2]), None)
        if len(parts) < 3 or parts[0] != "N":
            raise SchemeError(f"bad NU fingerprint encoding {text!r}")
        arity, k = int(parts[1]), int(parts[2])
        rel_map = {}
        for group in parts[3:]:
            scope_s, _, tup_s = group.partition(":")
            scope = tuple(int(p) for p in scope_s.split(","))
            ts = set()
            if tup_s:
                for chunk in tup_s.split(";"):
                    ts.add(tuple(int(v) for v in chunk.split(",")))
            rel_map[scope] = frozenset(ts)
        if set(rel_map) != set(_all_scopes(arity, k)):
            raise SchemeError(f"NU fingerprint has wrong scope set: {text!r}")
        return self._make(arity, rel_map)

    def admits(self, rel):
        return is_polymorphism(self.op, rel)

    def relation_of(self, fp):
        if fp.scopes is None:
            return frozenset()
        rel = fp.scope_map()
        out = set()
        for t in product(range(self.domain_size), repeat=fp.arity):
            if all(_restrict(t, tuple(range(fp.arity)), s) in ts for s, ts in rel.items()):
                out.add(t)
        return frozenset(out)


# Mal'tsev scheme -----------------------------------------------------------


@dataclass(frozen=True)
class MaltsevFingerprint:
    """A compact representation; the represented relation is its closure."""

    arity: int
    rep: frozenset[tuple[int, ...]]


@lru_cache(maxsize=8192)
def _closure_cached(tuples: frozenset, op: Operation) -> frozenset:
    current = {tuple(t) for t in tuples}
    if not current:
        return frozenset()
    arity = len(next(iter(current)))
    if arity == 0:
        return frozenset(current)
    d = op.domain_size
    table = np.array(op.table, dtype=np.int64)
    powers = d ** np.arange(arity - 1, -1, -1, dtype=np.int64)
    while True:
        arr = np.array(sorted(current), dtype=np.int64)
        m = arr.shape[0]
        pair = arr[:, None, :] * d + arr[None, :, :]  # (m, m, arity)
        chunk = max(1, int(4_000_000 / max(m * m, 1)))  # bound peak memory
        seen_codes: set[int] = set()
        for lo in range(0, m, chunk):
            idx = pair[:, :, None, :] * d + arr[None, None, lo : lo + chunk, :]
            images = table[idx]
            codes = np.unique(images.reshape(-1, arity) @ powers)
            seen_codes.update(codes.tolist())
        fresh = []
        for code in seen_codes:
            digits = []
            c = code
            for p in powers.tolist():
                digits.append(c // p)
                c %= p
            t = tuple(digits)
            if t not in current:
                fresh.append(t)
        if not fresh:
            return frozenset(current)
        current.update(fresh)


def maltsev_closure(tuples, op: Operation) -> frozenset[tuple[int, ...]]:
    """Smallest tuple set containing ``tuples`` and closed coordinatewise under ``op``."""
    if not recognize_operation_class(op).maltsev:
        raise SchemeError(f"{op.name} is not a Mal'tsev operation")
    if isinstance(tuples, Relation):
        tuples = tuples.tuples
    return _closure_cached(frozenset(tuple(t) for t in tuples), op)


def signature_of(rel) -> frozenset[tuple[int, int, int]]:
    """All (i, a, b), i 1-based, witnessed by tuples agreeing on the first i-1
    coordinates with values a and b at coordinate i (t = t' allowed)."""
    tuples = rel.tuples if isinstance(rel, Relation) else frozenset(rel)
    out = set()
    ts = sorted(tuples)
    for t in ts:
        for i, v in enumerate(t):
            out.add((i + 1, v, v))
    for t, u in product(ts, ts):
        for i in range(len(t)):
            if t[:i] == u[:i]:
                out.add((i + 1, t[i], u[i]))
            else:
                break
    return frozenset(out)


def _compact(tuples: frozenset, arity: int, op: Operation) -> MaltsevFingerprint:
    if arity == 0 or not tuples:
        return MaltsevFingerprint(arity, tuples)
    ts = sorted(tuples)
    chosen: set[tuple[int, ...]] = set()
    for i in range(1, arity + 1):
        for a in range(op.domain_size):
            for b in range(op.domain_size):
                found = False
                for t in ts:
                    if t[i - 1] != a:
                        continue
                    for u in ts:
                        if u[i - 1] == b and t[: i - 1] == u[: i - 1]:
                            chosen.add(t)
                            chosen.add(u)
                            found = True
                            break
                    if found:
                        break
    return MaltsevFingerprint(arity, frozenset(chosen))


def compact_representation(rel, op: Operation) -> MaltsevFingerprint:
    """Pick the lexicographically-smallest witness pair per signature element.

    Requires the input to be closed under ``op``.  The result F satisfies
    ``maltsev_closure(F) == R`` and ``|F| <= 2 * arity * |D|^2``.
    """
    if isinstance(rel, Relation):
        arity, tuples = rel.arity, rel.tuples
    else:
        tuples = frozenset(tuple(t) for t in rel)
        arity = len(next(iter(tuples))) if tuples else 0
    if maltsev_closure(tuples, op) != tuples:
        raise SchemeError("compact_representation requires a closed relation")
    return _compact(tuples, arity, op)


class MaltsevScheme(FingerprintScheme):
    """Compact-representation fingerprints for Mal'tsev-closed languages."""

    def __init__(self, domain_size: int, op: Operation):
        if not recognize_operation_class(op).maltsev:
            raise SchemeError(f"{op.name} is not a Mal'tsev operation")
        if op.domain_size != domain_size:
            raise SchemeError("operation domain mismatch")
        self.domain_size = domain_size
        self.op = op
        self.scheme_id = "maltsev:" + ",".join(str(v) for v in op.table)

    def top(self):
        return MaltsevFingerprint(0, frozenset({()}))

    def bottom(self, arity):
        return MaltsevFingerprint(arity, frozenset())

    def closure(self, fp) -> frozenset[tuple[int, ...]]:
        return _closure_cached(fp.rep, self.op)

    def project(self, fp, k):
        if not 0 <= k <= fp.arity:
            raise SchemeError("projection index out of range")
        if not fp.rep:
            return MaltsevFingerprint(k, frozenset())
        return MaltsevFingerprint(k, frozenset(t[:k] for t in fp.rep))

    def leq(self, fp, other):
        return fp.arity == other.arity and self.closure(fp) <= self.closure(other)

    def is_empty(self, fp):
        return not fp.rep

    def infer(self, fp, constraints, n):
        if fp.arity > n:
            raise SchemeError("fingerprint wider than the constraint conjunction")
        base = self.closure(fp)
        if not base:
            return self.bottom(n)
        suffixes = list(product(range(self.domain_size), repeat=n - fp.arity))
        sat = {t + s for t in base for s in suffixes}
        for rel, pos in constraints:
            if any(p < 0 or p >= n for p in pos):
                raise SchemeError("constraint position out of range")
            sat = {t for t in sat if tuple(t[p] for p in pos) in rel.tuples}
            if not sat:
                return self.bottom(n)
        # sat is an intersection of op-closed sets (heads are preserved per the
        # scheme precondition), so re-checking closedness is redundant here
        return _compact(frozenset(sat), n, self.op)

    def cons(self, fp):
        closure = self.closure(fp)
        if not closure:
            raise SchemeError("construction mapping on an empty fingerprint")
        if fp.arity < 1:
            raise SchemeError("construction mapping needs arity >= 1")
        prefix: tuple[int, ...] = ()
        for i in range(fp.arity):
            level = {t[: i + 1] for t in closure}
            chosen = None
            for d in range(self.domain_size):
                if prefix + (d,) in level:
                    chosen = d
                    break
            if chosen is None:
                raise ContractViolation("no extension exists; fingerprint is not suitable")
            prefix += (chosen,)
        return prefix[-1]

    def chain_bound(self, arity):
        return max(1, arity * self.domain_size**2)

    def encode(self, fp):
        body = [f"M {fp.arity}"]
        for t in sorted(fp.rep):
            body.append("()" if not t else ",".join(str(v) for v in t))
        return " ".join(body)

    def decode(self, text):
        parts = text.split()
        if len(parts) < 2 or parts[0] != "M":
            raise SchemeError(f"bad Mal'tsev fingerprint encoding {text!r}")
        arity = int(parts[1])
        rep = set()
        for chunk in parts[2:]:
            t = () if chunk == "()" else tuple(int(v) for v in chunk.split(","))
            if len(t) != arity:
                raise SchemeError(f"bad Mal'tsev fingerprint encoding {text!r}")
            rep.add(t)
        return MaltsevFingerprint(arity, frozenset(rep))

    def admits(self, rel):
        return is_polymorphism(self.op, rel)

    def relation_of(self, fp):
        return self.closure(fp)
