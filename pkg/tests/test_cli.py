import json
import os
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "gibbsforge.cli"]


def run(args, cwd, env=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        CLI + args, cwd=cwd, env=full_env, capture_output=True, text=True
    )


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


def gen_program(workdir, name="prog.json", family="brickwork2d", L=2):
    r = run(["gen", "--family", family, "-L", str(L), "-o", name], cwd=workdir)
    assert r.returncode == 0, r.stderr
    return workdir / name


class TestGen:
    def test_writes_file_and_manifest(self, workdir):
        path = gen_program(workdir)
        assert path.exists()
        manifest = json.loads((workdir / "prog.json.manifest.json").read_text())
        assert manifest["command"] == "gen"
        assert manifest["outputs"] == ["prog.json"]
        assert manifest["backend"] in ("cython", "python")
        prog = json.loads(path.read_text())
        assert prog["n"] == 4

    def test_stdout_when_no_out(self, workdir):
        r = run(["gen", "--family", "brickwork2d", "-L", "2"], cwd=workdir)
        assert r.returncode == 0
        assert json.loads(r.stdout)["n"] == 4
        assert not list(workdir.glob("*.manifest.json"))

    def test_unknown_family_exits_2_no_file(self, workdir):
        r = run(["gen", "--family", "kagome", "-o", "x.json"], cwd=workdir)
        assert r.returncode == 2
        assert not (workdir / "x.json").exists()

    def test_determinism(self, workdir):
        gen_program(workdir, "a.json", family="raussendorf3d", L=1)
        gen_program(workdir, "b.json", family="raussendorf3d", L=1)
        assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


class TestExact:
    def test_csv_default(self, workdir):
        prog = gen_program(workdir)
        r = run(["exact", "--in", prog.name, "--q", "0.1", "-o", "d.csv"], cwd=workdir)
        assert r.returncode == 0, r.stderr
        lines = (workdir / "d.csv").read_text().splitlines()
        assert lines[0] == "bitstring,probability"
        assert len(lines) == 1 + 16
        total = sum(float(line.split(",")[1]) for line in lines[1:])
        assert abs(total - 1.0) < 1e-9

    def test_beta_and_q_byte_identical(self, workdir):
        prog = gen_program(workdir)
        import math

        beta = 2.0
        q = math.exp(-beta) / (1 + math.exp(-beta))
        run(["exact", "--in", prog.name, "--beta", str(beta), "-o", "via_beta.csv"], cwd=workdir)
        run(["exact", "--in", prog.name, "--q", repr(q), "-o", "via_q.csv"], cwd=workdir)
        assert (workdir / "via_beta.csv").read_bytes() == (workdir / "via_q.csv").read_bytes()

    def test_corrupt_json_exits_2(self, workdir):
        (workdir / "bad.json").write_text("{not json")
        r = run(["exact", "--in", "bad.json", "--q", "0.1"], cwd=workdir)
        assert r.returncode == 2

    def test_missing_file_exits_2(self, workdir):
        r = run(["exact", "--in", "nope.json", "--q", "0.1"], cwd=workdir)
        assert r.returncode == 2

    def test_over_cap_exits_3(self, workdir):
        prog = gen_program(workdir, family="raussendorf3d", L=1)  # n = 18
        r = run(["exact", "--in", prog.name, "--q", "0.1"], cwd=workdir)
        assert r.returncode == 3

    def test_cap_env_override(self, workdir):
        # 13 qubits: over the default cap of 12 but cheap enough to run
        wide = {
            "n": 13,
            "monomials": [{"qubits": [0], "k": 1}, {"qubits": [0, 12], "k": 2}],
            "cnot_prefix": [],
            "meta": {},
        }
        (workdir / "wide.json").write_text(json.dumps(wide))
        r = run(["exact", "--in", "wide.json", "--q", "0.1"], cwd=workdir)
        assert r.returncode == 3
        r = run(
            ["exact", "--in", "wide.json", "--q", "0.1", "-o", "wide.csv"],
            cwd=workdir,
            env={"GIBBSFORGE_CAP_N": "13"},
        )
        assert r.returncode == 0, r.stderr
        manifest = json.loads((workdir / "wide.csv.manifest.json").read_text())
        assert manifest["cap_env"] == "13"

    def test_cap_env_ceiling(self, workdir):
        prog = gen_program(workdir)
        r = run(
            ["exact", "--in", prog.name, "--q", "0.1"],
            cwd=workdir,
            env={"GIBBSFORGE_CAP_N": "40"},
        )
        assert r.returncode == 2


class TestSampleAndDecode:
    def test_pipeline(self, workdir):
        gen_program(workdir, "base.json")
        r = run(
            ["encode", "--in", "base.json", "-r", "3", "--form", "cnot", "-o", "enc.json"],
            cwd=workdir,
        )
        assert r.returncode == 0, r.stderr
        enc = json.loads((workdir / "enc.json").read_text())
        assert enc["n"] == 12
        r = run(
            ["sample", "--in", "enc.json", "--q", "0.1", "--shots", "2000", "-o", "s.jsonl"],
            cwd=workdir,
        )
        assert r.returncode == 0, r.stderr
        header = json.loads((workdir / "s.jsonl").read_text().splitlines()[0])
        assert header == {"shots": 2000, "seed": 0, "q": 0.1}
        r = run(
            [
                "decode", "--in", "s.jsonl", "--n-logical", "4", "-r", "3",
                "--form", "cnot", "-o", "dec.jsonl",
            ],
            cwd=workdir,
        )
        assert r.returncode == 0, r.stderr
        lines = (workdir / "dec.jsonl").read_text().splitlines()
        head = json.loads(lines[0])
        assert head == {"layout": {"n": 4, "r": 3}, "tie_rule": "zero"}
        total = sum(json.loads(line)["count"] for line in lines[1:])
        assert total == 2000

    def test_sample_deterministic_and_thread_invariant(self, workdir):
        gen_program(workdir, "p.json")
        run(["sample", "--in", "p.json", "--q", "0.2", "--shots", "500", "-o", "a.jsonl"], cwd=workdir)
        run(["sample", "--in", "p.json", "--q", "0.2", "--shots", "500", "-o", "b.jsonl"], cwd=workdir)
        run(
            ["sample", "--in", "p.json", "--q", "0.2", "--shots", "500", "--threads", "4", "-o", "c.jsonl"],
            cwd=workdir,
        )
        a = (workdir / "a.jsonl").read_bytes()
        assert a == (workdir / "b.jsonl").read_bytes()
        assert a == (workdir / "c.jsonl").read_bytes()

    def test_zero_shots_exits_2(self, workdir):
        prog = gen_program(workdir)
        r = run(["sample", "--in", prog.name, "--q", "0.1", "--shots", "0"], cwd=workdir)
        assert r.returncode == 2

    def test_sampler_over_cap_exits_3(self, workdir):
        prog = gen_program(workdir, family="raussendorf3d", L=2)  # n = 90
        r = run(["sample", "--in", prog.name, "--q", "0.1", "--shots", "10"], cwd=workdir)
        assert r.returncode == 3


class TestParentHam:
    def test_analyze_profile(self, workdir):
        gen_program(workdir, "base.json")
        r = run(["parent-ham", "--in", "base.json", "--analyze", "-o", "h.json"], cwd=workdir)
        assert r.returncode == 0, r.stderr
        data = json.loads((workdir / "h.json").read_text())
        assert set(data) == {"hamiltonian", "profile"}
        assert data["profile"]["k"] <= 4
        assert len(data["hamiltonian"]["terms"]) == 4


class TestVerifyAndThresholds:
    def test_verify_equivalence_suite(self, workdir):
        r = run(["verify", "equivalence", "--max-n", "4"], cwd=workdir)
        assert r.returncode == 0, r.stderr
        verdicts = [json.loads(line) for line in r.stdout.splitlines()]
        assert verdicts and all(v["ok"] for v in verdicts)

    def test_verify_thresholds_suite(self, workdir):
        r = run(["verify", "thresholds"], cwd=workdir)
        assert r.returncode == 0, r.stderr

    def test_thresholds_json(self, workdir):
        r = run(["thresholds", "--format", "json", "-o", "t.json"], cwd=workdir)
        assert r.returncode == 0, r.stderr
        data = json.loads((workdir / "t.json").read_text())
        assert 1.86 <= data["report"]["beta_star"] <= 1.87
        assert data["frontier"][0]["delta"] == 5
        assert data["chain_at_beta_star"]["ok"]

    def test_thresholds_csv(self, workdir):
        r = run(["thresholds", "--format", "csv"], cwd=workdir)
        assert r.returncode == 0
        lines = r.stdout.splitlines()
        assert lines[0] == "delta,beta_min"
        assert len(lines) == 1 + 20
