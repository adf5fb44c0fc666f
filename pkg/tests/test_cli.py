import hashlib
import json
import math

import numpy as np
import pytest

import gaugelab as gl
from gaugelab.cli import ExperimentManifest, main, run


@pytest.fixture()
def workdir(tmp_path):
    gl.save_body(gl.ball_body(2), tmp_path / "circle.json")
    gl.save_body(gl.cube_body(2, 0.5), tmp_path / "cube.json")
    gl.save_body(gl.regular_polygon_body(6), tmp_path / "hexagon.json")
    return tmp_path


def _args(*parts):
    return [str(p) for p in parts]


def _digest(directory):
    chunks = []
    for path in sorted(directory.iterdir()):
        chunks.append(path.name.encode())
        chunks.append(path.read_bytes())
    return hashlib.sha256(b"".join(chunks)).hexdigest()


class TestCommands:
    def test_body(self, workdir):
        out = workdir / "body"
        assert main(_args("body", "--body", workdir / "circle.json",
                          "--resolution", 512, "--out", out)) == 0
        assert (out / "mesh.csv").exists()
        log = (out / "run.log").read_text()
        assert "surface mass" in log

    def test_gauge(self, workdir):
        out = workdir / "gauge"
        assert main(_args("gauge", "--body", workdir / "cube.json",
                          "--point", "1,0", "--out", out)) == 0
        row = (out / "gauge.csv").read_text().splitlines()[1].split(",")
        assert float(row[-2]) == pytest.approx(2.0)

    def test_gauge_from_points_file(self, workdir):
        pts = gl.PointSet([[1.0, 0.0], [0.25, 0.25]])
        pts.save_csv(workdir / "pts.csv")
        out = workdir / "gaugepts"
        assert main(_args("gauge", "--body", workdir / "cube.json",
                          "--points", workdir / "pts.csv", "--out", out)) == 0
        rows = (out / "gauge.csv").read_text().splitlines()[1:]
        assert float(rows[0].split(",")[2]) == pytest.approx(2.0)
        assert float(rows[1].split(",")[2]) == pytest.approx(0.5)

    def test_distset_lattice(self, workdir):
        out = workdir / "distset"
        assert main(_args("distset", "--body", workdir / "cube.json",
                          "--lattice", "Z2", "--tmax", 20, "--out", out)) == 0
        vals = np.loadtxt(out / "distances.csv", delimiter=",", skiprows=1)
        np.testing.assert_allclose(vals, np.arange(0, 21, 2), atol=1e-9)
        assert "separated: True" in (out / "run.log").read_text()

    def test_gaps(self, workdir):
        src = workdir / "distset2"
        main(_args("distset", "--body", workdir / "cube.json", "--lattice", "Z2",
                   "--tmax", 20, "--out", src))
        out = workdir / "gaps"
        assert main(_args("gaps", "--distances", src / "distances.csv",
                          "--eps", 1, "--tmax", 20, "--out", out)) == 0
        assert "gap count: 10" in (out / "run.log").read_text()

    def test_ftscan_and_project(self, workdir):
        out = workdir / "ft"
        assert main(_args("ftscan", "--body", workdir / "circle.json",
                          "--eta", "1,0;0,1", "--tgrid", "0,5,11",
                          "--resolution", 1024, "--out", out)) == 0
        header = (out / "ftscan.csv").read_text().splitlines()[0]
        assert header == "t,eta_index,re,im,abs"
        out2 = workdir / "proj"
        assert main(_args("project", "--body", workdir / "cube.json",
                          "--eta", "1,0", "--resolution", 1024, "--out", out2)) == 0
        atoms = np.loadtxt(out2 / "atoms.csv", delimiter=",", skiprows=1)
        np.testing.assert_allclose(np.sort(atoms[:, 0]), [-0.5, 0.5], atol=1e-12)

    def test_wiener(self, workdir):
        out = workdir / "wiener"
        assert main(_args("wiener", "--body", workdir / "cube.json", "--eta", "1,0",
                          "--T", 60, "--resolution", 1024, "--out", out)) == 0
        value = float((out / "wiener.csv").read_text().splitlines()[1].split(",")[1])
        assert value == pytest.approx(0.125, rel=0.08)

    def test_decay(self, workdir):
        out = workdir / "decay"
        assert main(_args("decay", "--body", workdir / "circle.json",
                          "--thetas", "1,0", "--rcap", "0.4", "--delta", "0.3",
                          "--tgrid", "10,40,2", "--resolution", 2048,
                          "--out", out)) == 0
        env = np.loadtxt(out / "envelope.csv", delimiter=",", skiprows=1)
        assert env[1, 1] < env[0, 1]

    def test_goodness(self, workdir):
        out = workdir / "good"
        assert main(_args("goodness", "--body", workdir / "circle.json", "--N", 5,
                          "--rcap", 0.05, "--delta", 0.05, "--resolution", 8192,
                          "--angular", 4096, "--out", out)) == 0
        summary = (out / "summary.txt").read_text()
        assert "ok=True" in summary
        eps_hat = float(summary.split("eps_hat=")[1].split()[0])
        assert eps_hat <= 0.25

    def test_audit(self, workdir):
        out = workdir / "audit"
        assert main(_args("audit", "--body", workdir / "hexagon.json", "--T", 120,
                          "--resolution", 600, "--out", out)) == 0
        row = (out / "audit.csv").read_text().splitlines()[1].split(",")
        assert int(row[0]) == 3
        assert row[-1] == "True"

    def test_bourgain(self, workdir):
        out = workdir / "bourgain"
        assert main(_args("bourgain", "--body", workdir / "circle.json",
                          "--eps", 0.3, "--delta", 0.05, "--seed", 7,
                          "--grid", 128, "--resolution", 256, "--out", out)) == 0
        rows = (out / "bourgain.csv").read_text().splitlines()
        assert rows[0] == "j,t_j,I1,I2,I3,direct,verdict"
        assert rows[-1].endswith("positive")
        log = (out / "run.log").read_text()
        assert "POSITIVE" in log

    def test_zeros(self, workdir):
        out = workdir / "zeros"
        assert main(_args("zeros", "--body", workdir / "circle.json",
                          "--window", "0.5,10", "--steps", 2000, "--out", out)) == 0
        first = float((out / "zeros.csv").read_text().splitlines()[1].split(",")[0])
        assert first == pytest.approx(0.609835, abs=1e-4)

    def test_spectrum(self, workdir):
        out = workdir / "spectrum"
        assert main(_args("spectrum", "--body", workdir / "cube.json",
                          "--lattice", "Z2", "--R", 2, "--ortho_tol", "1e-9",
                          "--out", out)) == 0
        assert (out / "sparsified.csv").exists()
        assert "orthogonality residual" in (out / "run.log").read_text()


class TestDeterminismAndLog:
    def test_identical_manifest_identical_bytes(self, workdir):
        out = workdir / "det"
        args = _args("bourgain", "--body", workdir / "circle.json", "--eps", 0.3,
                     "--delta", 0.05, "--seed", 7, "--grid", 128,
                     "--resolution", 256, "--out", out)
        assert main(args) == 0
        first = _digest(out)
        assert main(_args("--manifest", out / "manifest.json")) == 0
        assert _digest(out) == first

    def test_logged_constants_match_recomputation(self, workdir):
        out = workdir / "consts"
        main(_args("bourgain", "--body", workdir / "circle.json", "--eps", 0.3,
                   "--delta", 0.05, "--seed", 3, "--grid", 128,
                   "--resolution", 256, "--out", out))
        log = {}
        for line in (out / "run.log").read_text().splitlines():
            if ": " in line:
                key, _, val = line.partition(": ")
                log[key] = val
        d = 2
        omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        base = omega / (4 ** d * math.pi ** d)
        eps = float(log["set measure"])
        assert float(log["omega_d"]) == pytest.approx(omega, rel=1e-15)
        assert float(log["theta"]) == pytest.approx(base / 80, rel=1e-15)
        assert float(log["eta(|A|)"]) == pytest.approx(base / 80 * eps, rel=1e-12)
        assert float(log["I1 constant"]) == pytest.approx(base / 8, rel=1e-15)
        assert float(log["positivity constant"]) == pytest.approx(base / 40, rel=1e-15)
        theta = base / 80
        j0 = int(log["j0 index"])
        expect_bound = j0 + math.ceil(10 / theta / eps * math.log(1 / 0.05))
        assert int(log["J bound"]) == expect_bound

    def test_manifest_round_trip(self, workdir, tmp_path):
        manifest = ExperimentManifest(command="gauge", out=str(tmp_path / "m"),
                                      body=str(workdir / "cube.json"),
                                      params={"point": "0.5,0.5"})
        path = tmp_path / "man.json"
        path.write_text(json.dumps(manifest.to_dict()))
        loaded = ExperimentManifest.from_file(path)
        assert loaded.command == "gauge"
        assert run(loaded) == 0


class TestExitCodes:
    def test_bad_body_file(self, workdir):
        assert main(_args("gauge", "--body", workdir / "missing.json",
                          "--point", "1,0", "--out", workdir / "x1")) == 2

    def test_invalid_body_contents(self, workdir):
        bad = workdir / "bad.json"
        bad.write_text(json.dumps({"dim": 2, "type": "hpolytope",
                                   "normals": [[1, 0]], "offsets": [1.0]}))
        assert main(_args("gauge", "--body", bad, "--point", "1,0",
                          "--out", workdir / "x2")) == 2

    def test_zero_mass_cap_is_hypothesis_violation(self, workdir):
        # a cube supports no caps away from the axes: decay over a diagonal cap
        assert main(_args("decay", "--body", workdir / "cube.json",
                          "--thetas", "1,1", "--rcap", "0.1", "--delta", "0.1",
                          "--tgrid", "1,10,3", "--resolution", 512,
                          "--out", workdir / "x3")) == 3

    def test_budget_exceeded(self, workdir, monkeypatch):
        import gaugelab.correlation as corr
        monkeypatch.setattr(corr, "random_indicator",
                            lambda *a, **k: (_ for _ in ()).throw(
                                gl.BudgetExceededError("ball budget")))
        assert main(_args("bourgain", "--body", workdir / "circle.json",
                          "--eps", 0.3, "--delta", 0.05, "--grid", 64,
                          "--out", workdir / "x4")) == 4

    def test_unknown_command_usage(self):
        assert main([]) == 2
