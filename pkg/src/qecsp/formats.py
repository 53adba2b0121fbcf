"""Text formats: `.qe` instances, operation files, and QDIMACS-like clauses.

Instance grammar (line oriented, ``#`` starts a comment):

    domain <k>
    relation <name> <arity> { (v,...) (v,...) ... }
    exists <vars...> | forall <vars...>         # prefix order
    constraint [y=d, ...] <name>(<vars...>)     # extended constraint
    constraint <name>(<vars...>)                # mixed/standard constraint

Mixed constraints (no guard brackets) may use universal variables in any
position and are converted into guarded extended constraints automatically.
A file ending in a universal block is normalized by appending a fresh dummy
existential variable (with a warning).

``canonical_serialization`` is the digest pre-image for proof binding:
relations sorted by name, prefix and constraints in declaration order.
"""

from __future__ import annotations

import hashlib
import re
from typing import Optional

from .errors import ParseError
from .model import (
    EXISTS,
    FORALL,
    ConstraintLanguage,
    ExtendedConstraint,
    QuantifiedFormula,
    Relation,
)
from .polymorphisms import Operation, SetFunction
from .reductions import CNF, Clause, ClausalFormula, constraint_to_extended

_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def _parse_tuple_list(text: str, line: int) -> list[tuple[int, ...]]:
    replaced = text.replace("()", "(!)")  # keep empty tuples visible to the regex
    leftovers = _TUPLE_RE.sub("", replaced).strip()
    if leftovers:
        raise ParseError(f"stray characters in tuple list: {leftovers!r}", line)
    out = []
    for group in _TUPLE_RE.findall(replaced):
        if group == "!":
            out.append(())
            continue
        try:
            out.append(tuple(int(v) for v in group.split(",") if v.strip() != ""))
        except ValueError:
            raise ParseError(f"bad tuple entry {group!r}", line) from None
    return out


def parse_instance(text: str):
    """Parse an instance file; returns (formula, language, warnings)."""
    domain: Optional[int] = None
    relations: dict[str, Relation] = {}
    prefix: list[list] = []  # [kind, [vars]]
    raw_constraints: list[tuple[int, str]] = []
    warnings: list[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        keyword = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if keyword == "domain":
            if domain is not None:
                raise ParseError("duplicate domain line", lineno)
            try:
                domain = int(rest)
            except ValueError:
                raise ParseError(f"bad domain size {rest!r}", lineno) from None
            if domain < 1:
                raise ParseError("domain size must be >= 1", lineno)
        elif keyword == "relation":
            if domain is None:
                raise ParseError("relation before domain declaration", lineno)
            m = re.match(r"(\S+)\s+(\d+)\s*\{(.*)\}\s*$", rest)
            if not m:
                raise ParseError("bad relation line", lineno)
            name, arity, body = m.group(1), int(m.group(2)), m.group(3)
            if name in relations:
                raise ParseError(f"duplicate relation {name!r}", lineno)
            tuples = _parse_tuple_list(body, lineno)
            for t in tuples:
                if len(t) != arity:
                    raise ParseError(f"tuple {t} does not match arity {arity}", lineno)
                if any(not 0 <= v < domain for v in t):
                    raise ParseError(f"tuple {t} has out-of-domain values", lineno)
            relations[name] = Relation.of(name, arity, tuples)
        elif keyword in ("exists", "forall"):
            kind = EXISTS if keyword == "exists" else FORALL
            vs = rest.split()
            if not vs:
                raise ParseError(f"empty {keyword} line", lineno)
            if prefix and prefix[-1][0] == kind:
                prefix[-1][1].extend(vs)
            else:
                prefix.append([kind, list(vs)])
        elif keyword == "constraint":
            raw_constraints.append((lineno, rest))
        else:
            raise ParseError(f"unknown keyword {keyword!r}", lineno)

    if domain is None:
        raise ParseError("missing domain declaration", 1)
    if not prefix:
        prefix = [[EXISTS, []]]
    if prefix[0][0] == FORALL:
        prefix.insert(0, [EXISTS, []])
    if prefix[-1][0] == FORALL:
        fresh = "_pad0"
        i = 0
        declared = {v for _, vs in prefix for v in vs}
        while fresh in declared:
            i += 1
            fresh = f"_pad{i}"
        prefix.append([EXISTS, [fresh]])
        warnings.append(
            f"prefix ends in a universal block; appended dummy existential {fresh!r}"
        )

    declared = [v for _, vs in prefix for v in vs]
    if len(set(declared)) != len(declared):
        raise ParseError("a variable is quantified twice", 1)
    kinds = {v: kind for kind, vs in prefix for v in vs}

    constraints: list[ExtendedConstraint] = []
    for lineno, rest in raw_constraints:
        m = re.match(r"(?:\[(.*?)\]\s*)?(\S+?)\((.*?)\)\s*$", rest)
        if not m:
            raise ParseError("bad constraint line", lineno)
        guard_text, name, args_text = m.group(1), m.group(2), m.group(3)
        if name not in relations:
            raise ParseError(f"undeclared relation {name!r}", lineno)
        rel = relations[name]
        args = [a.strip() for a in args_text.split(",") if a.strip()] if args_text.strip() else []
        if len(args) != rel.arity:
            raise ParseError(
                f"{name} expects {rel.arity} arguments, got {len(args)}", lineno
            )
        for a in args:
            if a not in kinds:
                raise ParseError(f"undeclared variable {a!r}", lineno)
        if guard_text is None:
            # mixed/standard constraint: convert per universal instantiation
            for ec in constraint_to_extended(rel, args, kinds, domain):
                constraints.append(ec)
                relations.setdefault(ec.relation.name, ec.relation)
        else:
            guard = []
            for atom in guard_text.split(","):
                atom = atom.strip()
                if not atom:
                    continue
                gm = re.match(r"(\S+)\s*=\s*(\d+)$", atom)
                if not gm:
                    raise ParseError(f"bad guard atom {atom!r}", lineno)
                y, d = gm.group(1), int(gm.group(2))
                if y not in kinds:
                    raise ParseError(f"undeclared guard variable {y!r}", lineno)
                if kinds[y] != FORALL:
                    raise ParseError(f"guard variable {y!r} is not universal", lineno)
                if not 0 <= d < domain:
                    raise ParseError(f"guard value {d} out of domain", lineno)
                guard.append((y, d))
            for a in args:
                if kinds[a] != EXISTS:
                    raise ParseError(f"head variable {a!r} is not existential", lineno)
            constraints.append(ExtendedConstraint(tuple(guard), rel, tuple(args)))

    blocks = tuple((kind, tuple(vs)) for kind, vs in prefix)
    phi = QuantifiedFormula(domain, blocks, tuple(constraints))
    return phi, ConstraintLanguage(domain, relations), warnings


def serialize_instance(phi: QuantifiedFormula, language: Optional[ConstraintLanguage] = None) -> str:
    """Write an instance file; relations sorted by name, constraints in order."""
    rels: dict[str, Relation] = {}
    if language is not None:
        rels.update(language.relations)
    for ec in phi.constraints:
        existing = rels.get(ec.relation.name)
        if existing is not None and existing.tuples != ec.relation.tuples:
            raise ParseError(f"relation name {ec.relation.name!r} used inconsistently")
        rels[ec.relation.name] = ec.relation
    lines = [f"domain {phi.domain_size}"]
    for name in sorted(rels):
        rel = rels[name]
        body = " ".join(
            "(" + ",".join(str(v) for v in t) + ")" for t in rel.sorted_tuples()
        )
        lines.append(f"relation {name} {rel.arity} {{ {body} }}".replace("  }", " }"))
    for kind, vs in phi.blocks:
        if not vs:
            continue
        lines.append(("exists " if kind == EXISTS else "forall ") + " ".join(vs))
    for ec in phi.constraints:
        guard = ", ".join(f"{y}={d}" for y, d in ec.guard)
        args = ",".join(ec.head_vars)
        lines.append(f"constraint [{guard}] {ec.relation.name}({args})")
    return "\n".join(lines) + "\n"


def canonical_serialization(phi: QuantifiedFormula) -> str:
    return serialize_instance(phi)


def formula_digest(phi: QuantifiedFormula) -> str:
    digest = hashlib.sha256(canonical_serialization(phi).encode()).hexdigest()
    return f"sha256:{digest}"


# Operation / set-function files ------------------------------------------------


def parse_ops(text: str, default_domain: Optional[int] = None):
    """Parse `op`/`setfn` declarations; returns (domain, {name: Operation|SetFunction}).

    Format: ``domain <k>``, ``op <name> <arity> : <|D|^arity values>``,
    ``setfn <name> : <mask>-><value> ...`` (one entry per nonempty mask).
    """
    domain = default_domain
    out: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "domain":
            domain = int(parts[1])
        elif parts[0] == "op":
            if domain is None:
                raise ParseError("op before domain declaration", lineno)
            if len(parts) < 5 or parts[3] != ":":
                raise ParseError("bad op line (want: op <name> <arity> : <values>)", lineno)
            name, arity = parts[1], int(parts[2])
            values = tuple(int(v) for v in parts[4:])
            out[name] = Operation(name, domain, arity, values)
        elif parts[0] == "setfn":
            if domain is None:
                raise ParseError("setfn before domain declaration", lineno)
            if len(parts) < 3 or parts[2] != ":":
                raise ParseError("bad setfn line (want: setfn <name> : <mask>-><value> ...)", lineno)
            name = parts[1]
            table = {}
            for tok in parts[3:]:
                m = re.match(r"(\d+)->(\d+)$", tok)
                if not m:
                    raise ParseError(f"bad setfn entry {tok!r}", lineno)
                table[int(m.group(1))] = int(m.group(2))
            if set(table) != set(range(1, 2**domain)):
                raise ParseError("setfn table must cover every nonempty mask", lineno)
            out[name] = SetFunction(name, domain, tuple(table[m] for m in range(1, 2**domain)))
        else:
            raise ParseError(f"unknown keyword {parts[0]!r}", lineno)
    return domain, out


# QDIMACS-like clause files ------------------------------------------------------


def parse_qecnf(text: str) -> ClausalFormula:
    """Parse `p qecnf` / `p cnf` input into a clausal formula.

    Quantifier lines ``e ... 0`` / ``a ... 0`` in prefix order; clause lines
    are 0-terminated signed integers.  Plain `p cnf` means all-existential.
    """
    n_vars = None
    declared = 0
    blocks: list[tuple[str, list[str]]] = []
    clauses: list[Clause] = []
    quantified: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] not in ("qecnf", "cnf"):
                raise ParseError("bad problem line", lineno)
            n_vars, declared = int(parts[2]), int(parts[3])
            continue
        if n_vars is None:
            raise ParseError("clause data before problem line", lineno)
        parts = line.split()
        if parts[0] in ("e", "a"):
            kind = EXISTS if parts[0] == "e" else FORALL
            if parts[-1] != "0":
                raise ParseError("quantifier line must end with 0", lineno)
            vs = []
            for tok in parts[1:-1]:
                idx = int(tok)
                if not 1 <= idx <= n_vars:
                    raise ParseError(f"variable {idx} out of range", lineno)
                if idx in quantified:
                    raise ParseError(f"variable {idx} quantified twice", lineno)
                quantified.add(idx)
                vs.append(f"v{idx}")
            if blocks and blocks[-1][0] == kind:
                blocks[-1][1].extend(vs)
            else:
                blocks.append((kind, vs))
            continue
        if parts[-1] != "0":
            raise ParseError("clause line must end with 0", lineno)
        lits = []
        for tok in parts[:-1]:
            lit = int(tok)
            if lit == 0 or abs(lit) > n_vars:
                raise ParseError(f"bad literal {tok}", lineno)
            lits.append((f"v{abs(lit)}", lit > 0))
        if not lits:
            raise ParseError("empty clause", lineno)
        clauses.append(Clause(tuple(lits)))
    if n_vars is None:
        raise ParseError("missing problem line", 1)
    free = [i for i in range(1, n_vars + 1) if i not in quantified]
    if free:  # unquantified variables are existential, innermost by convention
        vs = [f"v{i}" for i in free]
        if blocks and blocks[-1][0] == EXISTS:
            blocks[-1][1].extend(vs)
        else:
            blocks.append((EXISTS, vs))
    if len(clauses) != declared:
        # tolerated, but worth flagging for hand-written files
        pass
    return ClausalFormula(tuple((k, tuple(vs)) for k, vs in blocks), tuple(clauses))


def parse_dimacs_cnf(text: str) -> tuple[CNF, tuple[str, ...]]:
    """Parse DIMACS/qecnf as a CNF; returns (cnf, universal variable names)."""
    clausal = parse_qecnf(text)
    universals = tuple(v for kind, vs in clausal.blocks for v in vs if kind == FORALL)
    variables = tuple(v for _, vs in clausal.blocks for v in vs)
    return CNF(variables, clausal.clauses), universals
