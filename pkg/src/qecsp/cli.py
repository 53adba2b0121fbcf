"""Command-line surface: solve, verify, gen, bench.

Exit codes for ``solve``: 0 = true, 1 = false, 2 = error, 3 = oracle
disagreement (with ``--oracle``).  ``verify``: 0 = accepted, 2 = rejected or
error.  ``bench`` exits nonzero only when every instance fails.
"""

from __future__ import annotations

import argparse
import csv
import os
import random
import sys
import time
from pathlib import Path

from .errors import QecspError
from .fingerprints import ConstantScheme, scheme_for_language
from .formats import formula_digest, parse_dimacs_cnf, parse_instance, parse_ops, serialize_instance
from .model import ConstraintLanguage, QuantifiedFormula
from .oracle import brute_force_truth
from .polymorphisms import (
    SetFunction,
    affine_maltsev,
    boolean_majority,
    boolean_xor3,
    max_set_function,
    min_set_function,
)
from .proofs import encode_proof, explain_verification, parse_proof, solve
from .reductions import (
    CNF,
    Clause,
    clausal_to_formula,
    critical_family_eq_const,
    critical_hardness_instance,
    horn_to_setfunction,
    pi2_gadget,
)

ORACLE_LIMIT_ENV = "QECSP_ORACLE_LIMIT"


def _oracle_limit() -> int:
    try:
        return int(os.environ.get(ORACLE_LIMIT_ENV, "14"))
    except ValueError:
        return 14


def hard3_set_function() -> SetFunction:
    """Three-element hard witness: identity on singletons, 2 on larger sets."""
    return SetFunction.from_callable(
        "hard3", 3, lambda s: next(iter(s)) if len(s) == 1 else 2
    )


_BUILTIN_SETFN = {
    "min": min_set_function,
    "max": max_set_function,
}


def _resolve_named_setfn(token: str, domain: int) -> SetFunction:
    if token in _BUILTIN_SETFN:
        return _BUILTIN_SETFN[token](domain)
    if token == "hard3":
        if domain != 3:
            raise QecspError("hard3 is a 3-element set function")
        return hard3_set_function()
    path = Path(token)
    if path.exists():
        _, ops = parse_ops(path.read_text(), default_domain=domain)
        fns = [v for v in ops.values() if isinstance(v, SetFunction)]
        if len(fns) != 1:
            raise QecspError(f"{token}: expected exactly one setfn declaration")
        return fns[0]
    raise QecspError(f"unknown set function {token!r}")


def _resolve_named_op(token: str, domain: int, kind: str):
    from .polymorphisms import Operation

    builtins = {
        ("nu", "majority"): boolean_majority,
        ("maltsev", "xor3"): boolean_xor3,
    }
    if (kind, token) in builtins:
        op = builtins[(kind, token)]()
        if op.domain_size != domain:
            raise QecspError(f"{token} is defined on a {op.domain_size}-element domain")
        return op
    if kind == "maltsev" and token == "affine":
        return affine_maltsev(domain)
    path = Path(token)
    if path.exists():
        _, ops = parse_ops(path.read_text(), default_domain=domain)
        cands = [v for v in ops.values() if isinstance(v, Operation)]
        if len(cands) != 1:
            raise QecspError(f"{token}: expected exactly one op declaration")
        return cands[0]
    raise QecspError(f"unknown operation {token!r}")


def resolve_scheme(spec: str, language: ConstraintLanguage):
    from .advanced import MaltsevScheme, NUScheme
    from .fingerprints import PowersetScheme

    if spec == "auto":
        scheme = scheme_for_language(language)
        if scheme is None:
            raise QecspError("no scheme detected for this language; pass --scheme explicitly")
        return scheme
    kind, _, token = spec.partition(":")
    d = language.domain_size
    if kind == "constant":
        return ConstantScheme(d, int(token))
    if kind == "setfn":
        return PowersetScheme(d, _resolve_named_setfn(token, d))
    if kind == "nu":
        return NUScheme(d, _resolve_named_op(token, d, "nu"))
    if kind == "maltsev":
        return MaltsevScheme(d, _resolve_named_op(token, d, "maltsev"))
    raise QecspError(f"bad scheme spec {spec!r}")


def _load_instance(path: str):
    phi, language, warnings = parse_instance(Path(path).read_text())
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return phi, language


def cmd_solve(args) -> int:
    phi, language = _load_instance(args.instance)
    scheme = resolve_scheme(args.scheme, language)
    verdict = solve(phi, scheme)
    print(f"verdict: {'true' if verdict.truth else 'false'}")
    if verdict.truth and verdict.assignment is not None:
        pairs = ", ".join(f"{x}={v}" for x, v in sorted(verdict.assignment.items()))
        print(f"first-block assignment: {{{pairs}}}")
        print(f"stable fingerprint: {verdict.stable_fingerprint}")
    if not verdict.truth and args.proof:
        Path(args.proof).write_text(encode_proof(verdict.proof))
        print(f"proof written: {args.proof} ({verdict.proof.step_count()} steps)")
    if args.oracle:
        n = len(phi.all_vars)
        limit = _oracle_limit()
        if n > limit:
            raise QecspError(f"oracle refused: {n} variables exceeds {ORACLE_LIMIT_ENV}={limit}")
        truth = brute_force_truth(phi)
        print(f"oracle: {'true' if truth else 'false'}")
        if truth != verdict.truth:
            print("SOLVER/ORACLE DISAGREEMENT", file=sys.stderr)
            return 3
    return 0 if verdict.truth else 1


def cmd_verify(args) -> int:
    phi, _language = _load_instance(args.instance)
    proof = parse_proof(Path(args.proof).read_text())
    ok, reason = explain_verification(phi, proof)
    print("accepted" if ok else f"rejected: {reason}")
    return 0 if ok else 2


def _random_cnf(rng: random.Random, n_vars: int, n_clauses: int) -> CNF:
    variables = tuple(f"y{i}" for i in range(1, n_vars + 1))
    clauses = []
    for _ in range(n_clauses):
        vs = rng.sample(variables, k=min(3, n_vars))
        clauses.append(Clause(tuple((v, rng.random() < 0.5) for v in vs)))
    return CNF(variables, tuple(clauses))


def _write_instance(path: str, phi: QuantifiedFormula, language=None) -> None:
    Path(path).write_text(serialize_instance(phi, language))
    print(f"wrote {path}")


def cmd_gen(args) -> int:
    out = args.output
    if args.kind == "critical":
        if args.cnf:
            cnf, _ = parse_dimacs_cnf(Path(args.cnf).read_text())
        else:
            rng = random.Random(args.seed)
            cnf = _random_cnf(rng, args.vars, args.n)
        family = critical_family_eq_const(max(2, len(cnf.clauses)), 0, 1, 2)
        print("critical family:")
        for i, cset in enumerate(family, start=1):
            body = ", ".join(f"{rel.name}({','.join(vs)})" for rel, vs in cset)
            print(f"  C_{i}: {{{body}}}")
        phi = critical_hardness_instance(cnf, family)
        _write_instance(out or "critical.qe", phi)
        return 0
    if args.kind == "pi2":
        cnf, universals = parse_dimacs_cnf(Path(args.cnf).read_text())
        phi, language = pi2_gadget(cnf, universals)
        _write_instance(out or "pi2.qe", phi, language)
        return 0
    if args.kind in ("2sat", "horn"):
        from .formats import parse_qecnf

        clausal = parse_qecnf(Path(args.qdimacs).read_text())
        mode = "twosat" if args.kind == "2sat" else "horn"
        clausal.check_shapes(mode)
        phi, language = clausal_to_formula(clausal, mode)
        _write_instance(out or f"{args.kind}.qe", phi, language)
        return 0
    if args.kind == "horn2setfn":
        from .formats import parse_qecnf

        clausal = parse_qecnf(Path(args.qdimacs).read_text())
        f = _resolve_named_setfn(args.setfn, args.domain)
        phi, language = horn_to_setfunction(clausal, f)
        _write_instance(out or "horn2setfn.qe", phi, language)
        return 0
    raise QecspError(f"unknown generator {args.kind!r}")


def cmd_bench(args) -> int:
    paths = sorted(Path(args.corpus).glob("*.qe"))
    rows = []
    failures = 0
    for path in paths:
        row = {
            "id": path.stem,
            "n_vars": "",
            "n_blocks": "",
            "verdict": "error",
            "millis": "",
            "proof_steps": "",
        }
        if args.oracle:
            row["oracle"] = ""
        try:
            phi, language, _w = parse_instance(path.read_text())
            row["n_vars"] = len(phi.all_vars)
            row["n_blocks"] = phi.nonempty_block_count()
            scheme = resolve_scheme(args.scheme, language)
            start = time.perf_counter()
            verdict = solve(phi, scheme)
            row["millis"] = round((time.perf_counter() - start) * 1000.0, 3)
            row["verdict"] = "true" if verdict.truth else "false"
            row["proof_steps"] = verdict.proof.step_count() if verdict.proof else 0
            if args.oracle:
                row["oracle"] = "true" if brute_force_truth(phi) else "false"
        except (QecspError, OSError) as exc:
            row["verdict"] = "error"
            print(f"{path.name}: {exc}", file=sys.stderr)
            failures += 1
        rows.append(row)
    fieldnames = ["id", "n_vars", "n_blocks", "verdict", "millis", "proof_steps"]
    if args.oracle:
        fieldnames.append("oracle")
    handle = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if args.output:
            handle.close()
            print(f"wrote {args.output}")
    return 2 if (paths and failures == len(paths)) else 0


def cmd_digest(args) -> int:
    phi, _language = _load_instance(args.instance)
    print(formula_digest(phi))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qecsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide an instance; optionally emit a proof of falsity")
    p.add_argument("instance")
    p.add_argument("--scheme", default="auto", help="auto|constant:<d>|setfn:<name|file>|nu:<name|file>|maltsev:<name|file>")
    p.add_argument("--proof", help="write the proof of falsity here (false instances)")
    p.add_argument("--oracle", action="store_true", help="cross-check against the brute-force oracle")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a proof of falsity against an instance")
    p.add_argument("instance")
    p.add_argument("proof")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate instances from reductions and gadgets")
    p.add_argument("kind", choices=["critical", "pi2", "2sat", "horn", "horn2setfn"])
    p.add_argument("--cnf", help="DIMACS/qecnf input (critical, pi2)")
    p.add_argument("--qdimacs", help="qecnf clause input (2sat, horn, horn2setfn)")
    p.add_argument("--n", type=int, default=3, help="random CNF clause count (critical)")
    p.add_argument("--vars", type=int, default=3, help="random CNF variable count (critical)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--setfn", default="hard3", help="hard set function (horn2setfn)")
    p.add_argument("--domain", type=int, default=3, help="domain size for --setfn")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a corpus directory, write a CSV report")
    p.add_argument("corpus")
    p.add_argument("-o", "--output")
    p.add_argument("--scheme", default="auto")
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("digest", help="print the canonical formula digest")
    p.add_argument("instance")
    p.set_defaults(func=cmd_digest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QecspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
