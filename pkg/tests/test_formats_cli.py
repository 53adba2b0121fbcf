import random
import subprocess
import sys
from pathlib import Path

import pytest

from qecsp.cli import main
from qecsp.errors import ParseError
from qecsp.formats import (
    formula_digest,
    parse_dimacs_cnf,
    parse_instance,
    parse_ops,
    parse_qecnf,
    serialize_instance,
)
from qecsp.model import EXISTS, FORALL
from qecsp.oracle import brute_force_truth
from qecsp.proofs import solve
from qecsp.testing import random_instance

MINIMAL = """\
domain 2
relation R1 1 { (1) }
exists x
constraint [] R1(x)
"""

TWO_BLOCK = """\
# copy instance
domain 2
relation K0 1 { (0) }
relation K1 1 { (1) }
forall y
exists x
constraint [y=0] K0(x)
constraint [y=1] K1(x)
"""


class TestParseInstance:
    def test_minimal(self):
        phi, lang, warnings = parse_instance(MINIMAL)
        assert not warnings
        assert phi.blocks == ((EXISTS, ("x",)),)
        assert len(phi.constraints) == 1

    def test_forall_first_gives_empty_x1(self):
        phi, _lang, warnings = parse_instance(TWO_BLOCK)
        assert phi.blocks[0] == (EXISTS, ())
        assert phi.blocks[1] == (FORALL, ("y",))
        assert not warnings

    def test_trailing_forall_padded_with_warning(self):
        text = "domain 2\nrelation R 1 { (0) }\nexists x\nforall y\nconstraint [] R(x)\n"
        phi, _lang, warnings = parse_instance(text)
        assert phi.blocks[-1][0] == EXISTS and phi.blocks[-1][1]
        assert warnings and "dummy" in warnings[0]

    def test_mixed_constraint_converted(self):
        text = (
            "domain 2\nrelation R 2 { (0,1) (1,0) }\nforall y\nexists x\n"
            "constraint R(y,x)\n"
        )
        phi, lang, _w = parse_instance(text)
        assert len(phi.constraints) == 2
        assert all(c.guard for c in phi.constraints)
        assert "R[0]" in lang.relations and "R[1]" in lang.relations

    def test_errors_carry_line_numbers(self):
        bad = "domain 2\nrelation R 1 { (2) }\n"
        with pytest.raises(ParseError, match="line 2"):
            parse_instance(bad)
        with pytest.raises(ParseError, match="line 3"):
            parse_instance("domain 2\nexists x\nconstraint [] Q(x)\n")

    def test_guard_on_existential_rejected(self):
        text = "domain 2\nrelation R 1 { (0) }\nexists x z\nconstraint [z=0] R(x)\n"
        with pytest.raises(ParseError, match="not universal"):
            parse_instance(text)

    def test_head_on_universal_rejected(self):
        text = "domain 2\nrelation R 1 { (0) }\nforall y\nexists x\nconstraint [] R(y)\n"
        with pytest.raises(ParseError, match="not existential"):
            parse_instance(text)

    def test_roundtrip_semantic_identity(self):
        rng = random.Random(12)
        for _ in range(30):
            phi, lang, _scheme = random_instance(rng)
            text = serialize_instance(phi, lang)
            phi2, lang2, warnings = parse_instance(text)
            assert not warnings
            assert phi2.blocks == tuple(
                (k, vs) for k, vs in phi.blocks if vs or k == EXISTS
            ) or phi2.blocks == phi.blocks
            assert formula_digest(phi2) == formula_digest(phi)
            assert set(lang2.relations) >= set(
                ec.relation.name for ec in phi.constraints
            )

    def test_digest_stable_under_reparse(self):
        phi, _lang, _w = parse_instance(TWO_BLOCK)
        text = serialize_instance(phi)
        phi2, _l, _w = parse_instance(text)
        assert formula_digest(phi) == formula_digest(phi2)


class TestOpsFormat:
    def test_parse_op_and_setfn(self):
        text = "domain 2\nop and 2 : 0 0 0 1\nsetfn min : 1->0 2->1 3->0\n"
        domain, ops = parse_ops(text)
        assert domain == 2
        assert ops["and"].apply((1, 1)) == 1
        assert ops["min"].apply_mask(0b11) == 0

    def test_bad_setfn_coverage(self):
        with pytest.raises(ParseError):
            parse_ops("domain 2\nsetfn f : 1->0\n")


class TestQecnf:
    def test_parse_prefix_and_clauses(self):
        text = "c comment\np qecnf 3 2\ne 1 0\na 2 0\ne 3 0\n1 -2 3 0\n-1 0\n"
        clausal = parse_qecnf(text)
        assert clausal.blocks == ((EXISTS, ("v1",)), (FORALL, ("v2",)), (EXISTS, ("v3",)))
        assert len(clausal.clauses) == 2

    def test_plain_cnf(self):
        cnf, universals = parse_dimacs_cnf("p cnf 2 1\n1 2 0\n")
        assert not universals
        assert cnf.is_satisfiable()


class TestCli:
    def write(self, tmp_path, name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    def test_solve_true_exit_zero(self, tmp_path, capsys):
        inst = self.write(tmp_path, "t.qe", MINIMAL)
        assert main(["solve", inst, "--scheme", "constant:1", "--oracle"]) == 0
        out = capsys.readouterr().out
        assert "verdict: true" in out and "x=1" in out

    def test_solve_false_writes_verifiable_proof(self, tmp_path, capsys):
        text = (
            "domain 2\nrelation K0 1 { (0) }\nrelation K1 1 { (1) }\nexists x\n"
            "constraint [] K0(x)\nconstraint [] K1(x)\n"
        )
        inst = self.write(tmp_path, "f.qe", text)
        proof = str(tmp_path / "f.pf")
        assert main(["solve", inst, "--scheme", "setfn:min", "--proof", proof, "--oracle"]) == 1
        assert main(["verify", inst, proof]) == 0
        # tamper
        mutated = Path(proof).read_text().replace("conclude", "conclude 9\n#", 1)
        bad = self.write(tmp_path, "bad.pf", mutated)
        assert main(["verify", inst, bad]) == 2

    def test_error_exit_two(self, tmp_path):
        inst = self.write(tmp_path, "b.qe", "domain 2\nrelationX\n")
        assert main(["solve", inst]) == 2

    def test_gen_pi2_and_solve(self, tmp_path, capsys):
        cnf = self.write(tmp_path, "in.cnf", "p cnf 2 2\n1 2 0\n-1 2 0\n")
        out = str(tmp_path / "g.qe")
        assert main(["gen", "pi2", "--cnf", cnf, "-o", out]) == 0
        phi, lang, _w = parse_instance(Path(out).read_text())
        assert brute_force_truth(phi) is True  # CNF satisfiable
        assert main(["solve", out, "--scheme", "setfn:min"]) == 0

    def test_gen_critical(self, tmp_path, capsys):
        out = str(tmp_path / "c.qe")
        assert main(["gen", "critical", "--n", "3", "--vars", "3", "--seed", "1", "-o", out]) == 0
        captured = capsys.readouterr().out
        assert "C_1" in captured
        phi, _lang, _w = parse_instance(Path(out).read_text())
        assert phi.nonempty_block_count() == 2

    def test_gen_2sat(self, tmp_path):
        q = self.write(tmp_path, "g.qecnf", "p qecnf 3 2\na 1 0\ne 2 3 0\n1 -2 3 0\n-3 0\n")
        out = str(tmp_path / "s.qe")
        assert main(["gen", "2sat", "--qdimacs", q, "-o", out]) == 0
        phi, lang, _w = parse_instance(Path(out).read_text())
        assert main(["solve", out, "--scheme", "nu:majority", "--oracle"]) in (0, 1)

    def test_gen_horn2setfn(self, tmp_path):
        q = self.write(tmp_path, "g.qecnf", "p qecnf 2 2\na 1 0\ne 2 0\n1 -2 0\n-1 2 0\n")
        out = str(tmp_path / "h.qe")
        assert main(["gen", "horn2setfn", "--qdimacs", q, "-o", out]) == 0
        phi, lang, _w = parse_instance(Path(out).read_text())
        assert phi.domain_size == 3

    def test_bench_csv(self, tmp_path, capsys):
        for i, text in enumerate([MINIMAL, TWO_BLOCK]):
            (tmp_path / f"i{i}.qe").write_text(text)
        out = str(tmp_path / "r.csv")
        assert main(["bench", str(tmp_path), "-o", out, "--oracle"]) == 0
        rows = Path(out).read_text().strip().splitlines()
        assert rows[0] == "id,n_vars,n_blocks,verdict,millis,proof_steps,oracle"
        assert len(rows) == 3
        ids = [r.split(",")[0] for r in rows[1:]]
        assert ids == sorted(ids)

    def test_bench_empty_dir_header_only(self, tmp_path, capsys):
        sub = tmp_path / "empty"
        sub.mkdir()
        assert main(["bench", str(sub)]) == 0
        out = capsys.readouterr().out
        assert out.strip() == "id,n_vars,n_blocks,verdict,millis,proof_steps"

    def test_bench_deterministic_modulo_millis(self, tmp_path):
        for i, text in enumerate([MINIMAL, TWO_BLOCK]):
            (tmp_path / f"i{i}.qe").write_text(text)
        out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
        main(["bench", str(tmp_path), "-o", out1])
        main(["bench", str(tmp_path), "-o", out2])
        strip = lambda p: [
            ",".join(c for j, c in enumerate(row.split(",")) if j != 4)
            for row in Path(p).read_text().splitlines()
        ]
        assert strip(out1) == strip(out2)

    def test_oracle_limit_respected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QECSP_ORACLE_LIMIT", "0")
        inst = self.write(tmp_path, "t.qe", MINIMAL)
        assert main(["solve", inst, "--scheme", "constant:1", "--oracle"]) == 2

    def test_console_script_runs(self, tmp_path):
        inst = self.write(tmp_path, "t.qe", MINIMAL)
        proc = subprocess.run(
            [sys.executable, "-m", "qecsp.cli", "solve", inst, "--scheme", "constant:1"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "verdict: true" in proc.stdout
