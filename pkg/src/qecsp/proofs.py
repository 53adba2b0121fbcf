"""Three-rule proof system, saturation solver, and certificate verifier.

Derivations manipulate judgements ``phi, F<X> |- F'<X1^phi>``:

* Rule1 closes a single-existential-block formula with one inference step;
* Rule2 chains two derivations with matching endpoints;
* Rule3 lifts a derivation on phi[g] back to phi by projecting onto X1.

``solve`` saturates: it sweeps assignments g to the first universal block in
lexicographic order, re-deriving with the current fingerprint as seed, keeps
only strictly decreasing candidates (restarting the sweep after each), and
stops at a stable fingerprint (truth) or an empty one (falsity).  Proofs of
falsity record exactly the strictly decreasing Rule3 steps plus Rule2 glue,
so their size is governed by the scheme's chain bounds.

The verifier re-derives every step from scratch: Rule1 outputs are recomputed
byte-exactly from the stored context (inference is deterministic by design),
Rule3 projections likewise, and the conclusion must start at the canonical
top fingerprint and end empty.  A proof therefore binds to its formula (via a
pinned digest) and cannot be transplanted or edited.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from .errors import ContractViolation, QecspError, SchemeError
from .fingerprints import ConstraintAt, FingerprintScheme, scheme_from_id
from .formats import formula_digest
from .model import QuantifiedFormula, instantiate_universals

Assignment = tuple[tuple[str, int], ...]  # sorted by variable name


def _assignment_key(g) -> Assignment:
    return tuple(sorted(g.items()))


@dataclass(frozen=True)
class ProofStep:
    step_id: int
    rule: str  # "R1" | "R2" | "R3"
    ctx: Optional[tuple[Assignment, ...]] = None  # R1
    in_fp: Optional[int] = None  # R1
    out_fp: Optional[int] = None  # R1, R3
    a: Optional[int] = None  # R2
    b: Optional[int] = None  # R2
    g: Optional[Assignment] = None  # R3
    sub: Optional[int] = None  # R3


@dataclass(frozen=True)
class Proof:
    digest: str  # "sha256:<hex>"
    scheme_id: str
    fingerprints: dict[int, str]
    steps: tuple[ProofStep, ...]
    conclusion: int

    def step_count(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Verdict:
    truth: bool
    proof: Optional[Proof] = None
    stable_fingerprint: Optional[str] = None  # encoded, over X1
    assignment: Optional[dict[str, int]] = None  # X1 -> value


class _Builder:
    def __init__(self):
        self.fps: list[str] = []
        self.fp_ids: dict[str, int] = {}
        self.steps: list[ProofStep] = []

    def fp(self, encoding: str) -> int:
        if encoding not in self.fp_ids:
            self.fp_ids[encoding] = len(self.fps)
            self.fps.append(encoding)
        return self.fp_ids[encoding]

    def r1(self, ctx, in_fp, out_fp) -> int:
        sid = len(self.steps)
        self.steps.append(ProofStep(sid, "R1", ctx=tuple(ctx), in_fp=in_fp, out_fp=out_fp))
        return sid

    def r2(self, a, b) -> int:
        sid = len(self.steps)
        self.steps.append(ProofStep(sid, "R2", a=a, b=b))
        return sid

    def r3(self, g, sub, out_fp) -> int:
        sid = len(self.steps)
        self.steps.append(ProofStep(sid, "R3", g=g, sub=sub, out_fp=out_fp))
        return sid

    def mark(self) -> int:
        return len(self.steps)

    def rollback(self, mark: int) -> None:
        del self.steps[mark:]

    def finish(self, digest: str, scheme_id: str, conclusion: int) -> Proof:
        used: set[int] = set()
        order = [conclusion]
        seen = {conclusion}
        while order:
            step = self.steps[order.pop()]
            for fp in (step.in_fp, step.out_fp):
                if fp is not None:
                    used.add(fp)
            for ref in (step.a, step.b, step.sub):
                if ref is not None and ref not in seen:
                    seen.add(ref)
                    order.append(ref)
        fps = {i: enc for i, enc in enumerate(self.fps) if i in used}
        return Proof(digest, scheme_id, fps, tuple(self.steps), conclusion)


def single_block_constraints(phi: QuantifiedFormula) -> list[ConstraintAt]:
    """Positions-form constraints of a formula with one existential block."""
    if phi.num_existential_blocks != 1:
        raise QecspError("formula is not single-block")
    pos = {x: i for i, x in enumerate(phi.existential_vars)}
    out: list[ConstraintAt] = []
    for ec in phi.constraints:
        if ec.guard:  # unreachable: single-block formulas have no universals
            raise QecspError("guarded constraint in a single-block formula")
        out.append((ec.relation, tuple(pos[x] for x in ec.head_vars)))
    return out


def _sweep_assignments(y1: Sequence[str], domain_size: int):
    for values in product(range(domain_size), repeat=len(y1)):
        yield dict(zip(y1, values))


def _derive(phi, fp, scheme, builder, ctx):
    """Returns (minimal derivable fingerprint over X1^phi, concluding step id)."""
    if phi.num_existential_blocks == 1:
        n = len(phi.existential_vars)
        out = scheme.infer(fp, single_block_constraints(phi), n)
        sid = builder.r1(ctx, builder.fp(scheme.encode(fp)), builder.fp(scheme.encode(out)))
        return out, sid

    x1 = phi.first_existential_block
    y1 = phi.first_universal_block
    sweep = list(_sweep_assignments(y1, phi.domain_size))

    def derive_candidate(g, seed):
        sub_fp, sub_id = _derive(
            instantiate_universals(phi, g), seed, scheme, builder, ctx + (_assignment_key(g),)
        )
        cand = scheme.project(sub_fp, len(x1))
        r3 = builder.r3(_assignment_key(g), sub_id, builder.fp(scheme.encode(cand)))
        return cand, r3

    current, chain = derive_candidate(sweep[0], fp)
    while not scheme.is_empty(current):
        improved = False
        for g in sweep:
            mark = builder.mark()
            cand, r3 = derive_candidate(g, current)
            if not scheme.leq(cand, current):
                raise ContractViolation("inference violated progress; scheme misuse?")
            if scheme.equiv(cand, current):
                builder.rollback(mark)
                continue
            chain = builder.r2(chain, r3)
            current = cand
            improved = True
            break  # restart the sweep from the first assignment
        if not improved:
            break  # stable
    return current, chain


def derive_minimal(phi: QuantifiedFormula, scheme: FingerprintScheme, start=None):
    """Saturate from ``start`` (default: top); returns (fingerprint, trace steps)."""
    builder = _Builder()
    fp, _sid = _derive(phi, start if start is not None else scheme.top(), scheme, builder, ())
    return fp, builder.steps


def solve(phi: QuantifiedFormula, scheme: FingerprintScheme) -> Verdict:
    """Decide ``phi``; false verdicts carry a checkable proof of falsity."""
    for ec in phi.constraints:
        if not scheme.admits(ec.relation):
            raise SchemeError(
                f"relation {ec.relation.name} is not preserved by the scheme's polymorphism"
            )
    builder = _Builder()
    fp, sid = _derive(phi, scheme.top(), scheme, builder, ())
    digest = formula_digest(phi)
    if scheme.is_empty(fp):
        return Verdict(False, proof=builder.finish(digest, scheme.scheme_id, sid))
    assignment = {
        x: scheme.cons(scheme.project(fp, i + 1))
        for i, x in enumerate(phi.first_existential_block)
    }
    return Verdict(True, stable_fingerprint=scheme.encode(fp), assignment=assignment)


# Verification ----------------------------------------------------------------


def explain_verification(phi: QuantifiedFormula, proof: Proof) -> tuple[bool, str]:
    """Check a proof of falsity against a formula; returns (accepted, reason)."""
    try:
        return _verify(phi, proof)
    except QecspError as exc:
        return False, f"rejected: {exc}"
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        return False, f"rejected (malformed): {exc}"


def verify_proof(phi: QuantifiedFormula, proof: Proof) -> bool:
    return explain_verification(phi, proof)[0]


def _verify(phi, proof) -> tuple[bool, str]:
    if proof.digest != formula_digest(phi):
        return False, "formula digest mismatch"
    try:
        scheme = scheme_from_id(proof.scheme_id, phi.domain_size)
    except SchemeError as exc:
        return False, f"bad scheme: {exc}"
    for ec in phi.constraints:
        if not scheme.admits(ec.relation):
            return False, f"scheme does not preserve head relation {ec.relation.name}"

    decoded = {}
    for fp_id, enc in proof.fingerprints.items():
        try:
            decoded[fp_id] = scheme.decode(enc)
        except SchemeError as exc:
            return False, f"fingerprint {fp_id}: {exc}"

    steps = {}
    for step in proof.steps:
        if step.step_id in steps:
            return False, f"duplicate step id {step.step_id}"
        for ref in (step.a, step.b, step.sub):
            if ref is not None and (ref not in steps):
                return False, f"step {step.step_id} references a non-earlier step {ref}"
        steps[step.step_id] = step
    if proof.conclusion not in steps:
        return False, "conclusion references an unknown step"
    reachable = {proof.conclusion}
    stack = [proof.conclusion]
    while stack:
        step = steps[stack.pop()]
        for ref in (step.a, step.b, step.sub):
            if ref is not None and ref not in reachable:
                reachable.add(ref)
                stack.append(ref)
    if reachable != set(steps):
        # every step must check; a step outside the conclusion's derivation
        # has no derivation path to check it under
        return False, "proof contains steps unreachable from the conclusion"

    formulas: dict[tuple, QuantifiedFormula] = {(): phi}

    def formula_at(ctx: tuple) -> QuantifiedFormula:
        if ctx not in formulas:
            parent = formula_at(ctx[:-1])
            if parent.num_existential_blocks < 2:
                raise QecspError("context deeper than the quantifier prefix")
            formulas[ctx] = instantiate_universals(parent, dict(ctx[-1]))
        return formulas[ctx]

    memo: dict[tuple[int, tuple], tuple[int, int]] = {}

    def check(step_id: int, ctx: tuple) -> tuple[int, int]:
        key = (step_id, ctx)
        if key in memo:
            return memo[key]
        step = steps[step_id]
        here = formula_at(ctx)
        if step.rule == "R1":
            if step.ctx != ctx:
                raise QecspError(f"step {step_id}: stored context does not match derivation path")
            if here.num_existential_blocks != 1:
                raise QecspError(f"step {step_id}: Rule1 on a multi-block formula")
            fin = decoded[step.in_fp]
            n = len(here.existential_vars)
            if fin.arity > n:
                raise QecspError(f"step {step_id}: input fingerprint wider than the prefix")
            recomputed = scheme.infer(fin, single_block_constraints(here), n)
            if scheme.encode(recomputed) != proof.fingerprints[step.out_fp]:
                raise QecspError(f"step {step_id}: inference output mismatch")
            result = (step.in_fp, step.out_fp)
        elif step.rule == "R2":
            in_a, out_a = check(step.a, ctx)
            in_b, out_b = check(step.b, ctx)
            if out_a != in_b:
                raise QecspError(f"step {step_id}: Rule2 endpoints do not chain")
            result = (in_a, out_b)
        elif step.rule == "R3":
            if here.num_existential_blocks < 2:
                raise QecspError(f"step {step_id}: Rule3 on a single-block formula")
            g = dict(step.g)
            if set(g) != set(here.first_universal_block):
                raise QecspError(f"step {step_id}: assignment does not cover Y1")
            if any(not 0 <= v < here.domain_size for v in g.values()):
                raise QecspError(f"step {step_id}: assignment value out of domain")
            in_sub, out_sub = check(step.sub, ctx + (_assignment_key(g),))
            k1 = len(here.first_existential_block)
            sub_fp = decoded[out_sub]
            if sub_fp.arity < k1:
                raise QecspError(f"step {step_id}: sub-conclusion narrower than X1")
            if decoded[in_sub].arity > k1:
                raise QecspError(f"step {step_id}: input fingerprint wider than X1")
            projected = scheme.project(sub_fp, k1)
            if scheme.encode(projected) != proof.fingerprints[step.out_fp]:
                raise QecspError(f"step {step_id}: projection mismatch")
            result = (in_sub, step.out_fp)
        else:
            raise QecspError(f"step {step_id}: unknown rule {step.rule!r}")
        memo[key] = result
        return result

    in_fp, out_fp = check(proof.conclusion, ())
    if proof.fingerprints[in_fp] != scheme.encode(scheme.top()):
        return False, "conclusion does not start from the top fingerprint"
    if not scheme.is_empty(decoded[out_fp]):
        return False, "conclusion fingerprint is not empty"
    return True, "ok"


# Proof file format -------------------------------------------------------------


def _format_assignment(g: Assignment) -> str:
    return ",".join(f"{v}={d}" for v, d in g)


def _parse_assignment(text: str) -> Assignment:
    if not text:
        return ()
    items = []
    for chunk in text.split(","):
        v, _, d = chunk.partition("=")
        if not v or not d:
            raise QecspError(f"bad assignment token {chunk!r}")
        items.append((v, int(d)))
    return tuple(sorted(items))


def encode_proof(proof: Proof) -> str:
    lines = [f"proof v1 scheme={proof.scheme_id} formula={proof.digest}"]
    for fp_id in sorted(proof.fingerprints):
        lines.append(f"fp {fp_id} {proof.fingerprints[fp_id]}")
    for step in proof.steps:
        if step.rule == "R1":
            ctx = ";".join(_format_assignment(g) for g in step.ctx)
            lines.append(f"step {step.step_id} R1 ctx={ctx} in={step.in_fp} out={step.out_fp}")
        elif step.rule == "R2":
            lines.append(f"step {step.step_id} R2 a={step.a} b={step.b}")
        else:
            g = _format_assignment(step.g)
            lines.append(f"step {step.step_id} R3 g={g} sub={step.sub} out={step.out_fp}")
    lines.append(f"conclude {proof.conclusion}")
    return "\n".join(lines) + "\n"


def parse_proof(text: str) -> Proof:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise QecspError("empty proof file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "proof" or head[1] != "v1":
        raise QecspError("bad proof header")
    if not head[2].startswith("scheme=") or not head[3].startswith("formula="):
        raise QecspError("bad proof header fields")
    scheme_id = head[2][len("scheme="):]
    digest = head[3][len("formula="):]

    fps: dict[int, str] = {}
    steps: list[ProofStep] = []
    conclusion: Optional[int] = None
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "fp":
            fp_id = int(parts[1])
            if fp_id in fps:
                raise QecspError(f"duplicate fingerprint id {fp_id}")
            fps[fp_id] = " ".join(parts[2:])
        elif parts[0] == "step":
            sid, rule = int(parts[1]), parts[2]
            fields = {}
            for tok in parts[3:]:
                key, _, val = tok.partition("=")
                fields[key] = val
            if rule == "R1":
                ctx_text = fields.get("ctx", "")
                ctx = tuple(_parse_assignment(g) for g in ctx_text.split(";") if g != "") if ctx_text else ()
                steps.append(
                    ProofStep(sid, "R1", ctx=ctx, in_fp=int(fields["in"]), out_fp=int(fields["out"]))
                )
            elif rule == "R2":
                steps.append(ProofStep(sid, "R2", a=int(fields["a"]), b=int(fields["b"])))
            elif rule == "R3":
                steps.append(
                    ProofStep(
                        sid,
                        "R3",
                        g=_parse_assignment(fields["g"]),
                        sub=int(fields["sub"]),
                        out_fp=int(fields["out"]),
                    )
                )
            else:
                raise QecspError(f"unknown rule {rule!r}")
        elif parts[0] == "conclude":
            conclusion = int(parts[1])
        else:
            raise QecspError(f"unrecognized proof line {ln!r}")
    if conclusion is None:
        raise QecspError("proof has no conclusion")
    referenced = set()
    for step in steps:
        for fp_id in (step.in_fp, step.out_fp):
            if fp_id is not None:
                referenced.add(fp_id)
    if not referenced <= set(fps):
        raise QecspError("step references an undeclared fingerprint")
    return Proof(digest, scheme_id, fps, tuple(steps), conclusion)
