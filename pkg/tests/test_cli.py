import json
import subprocess
import sys
from pathlib import Path

import pytest

import graphgic
from graphgic.cli import main

DATA = Path(graphgic.__file__).parent / "data"
C6 = str(DATA / "c6.edges")
Y_H0 = str(DATA / "c6_y_h0.txt")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSolve:
    @pytest.mark.parametrize("method", ["gm-gic", "exhaustive", "g-bnb", "omp", "lasso"])
    def test_c6_fixture(self, capsys, method):
        code, out, err = run(capsys, "solve", "--edge-list", C6, "--measurement", Y_H0, "--method", method)
        assert code == 0
        payload = json.loads(out)
        assert payload["support"] == [0]
        assert payload["evals"] >= 0 and "x_hat" in payload and "gic" in payload
        assert "support [0]" in err

    def test_gfoc_from_init(self, capsys):
        code, out, _ = run(capsys, "solve", "--edge-list", C6, "--measurement", Y_H0, "--method", "gfoc", "--init", "1")
        assert code == 0 and json.loads(out)["support"] == [0]

    def test_gfoc_needs_init(self, capsys):
        code, out, err = run(capsys, "solve", "--edge-list", C6, "--measurement", Y_H0, "--method", "gfoc")
        assert code == 1 and out == "" and "--init" in err

    def test_unknown_method_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--edge-list", C6, "--method", "foo"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_enumeration_guard(self, capsys):
        code, out, err = run(capsys, "solve", "--graph", "sbm", "--psi", "4", "--sparsity", "6",
                             "--method", "exhaustive", "--sigma", "0.01", "--eig-target", "12")
        assert code == 1 and out == "" and "limit" in err

    def test_dimension_mismatch(self, capsys, tmp_path):
        y = tmp_path / "y.txt"
        y.write_text("1\n2\n3\n")
        code, out, err = run(capsys, "solve", "--edge-list", C6, "--measurement", str(y))
        assert code == 1 and "6 nodes" in err

    def test_bad_measurement(self, capsys, tmp_path):
        y = tmp_path / "y.txt"
        y.write_text("1\nabc\n")
        code, _, err = run(capsys, "solve", "--edge-list", C6, "--measurement", str(y))
        assert code == 1 and "line 2" in err

    def test_missing_graph(self, capsys):
        code, _, err = run(capsys, "solve", "--measurement", Y_H0)
        assert code == 1 and "--edge-list" in err

    def test_simulated_is_seeded(self, capsys):
        args = ["solve", "--graph", "grid2d:rows=5,cols=5", "--psi", "2", "--sparsity", "2",
                "--sigma", "0.05", "--method", "omp", "--gfoc", "--seed", "4"]
        _, a, _ = run(capsys, *args)
        _, b, _ = run(capsys, *args)
        assert a == b
        payload = json.loads(a)
        assert payload["method"] == "omp+gfoc" and len(payload["true_support"]) == 2

    def test_coeffs_set_degree(self, capsys):
        code, out, _ = run(capsys, "solve", "--edge-list", C6, "--measurement", Y_H0, "--coeffs", "1,1")
        assert code == 0 and json.loads(out)["support"] == [0]
        code, _, err = run(capsys, "solve", "--edge-list", C6, "--measurement", Y_H0, "--coeffs", "1,1", "--psi", "2")
        assert code == 1 and "coeffs" in err

    def test_out_file(self, capsys, tmp_path):
        dest = tmp_path / "res.json"
        code, out, _ = run(capsys, "solve", "--edge-list", C6, "--measurement", Y_H0, "--out", str(dest))
        assert code == 0 and out == "" and json.loads(dest.read_text())["support"] == [0]


class TestOtherCommands:
    def test_gen_graph_round_trip(self, capsys, tmp_path):
        code, out, _ = run(capsys, "gen-graph", "--graph", "cycle:n=6")
        assert code == 0 and out == Path(C6).read_text().split("\n", 1)[1]

    def test_gen_graph_seeded(self, capsys):
        _, a, _ = run(capsys, "gen-graph", "--graph", "erdos_renyi:n=20,p=0.2", "--seed", "3")
        _, b, _ = run(capsys, "gen-graph", "--graph", "erdos_renyi:n=20,p=0.2", "--seed", "3")
        assert a == b

    def test_coherence(self, capsys):
        code, out, _ = run(capsys, "coherence", "--edge-list", C6, "--monotonicity")
        rep = json.loads(out)
        assert code == 0 and abs(rep["mu"] - 2 / 3) < 1e-12 and rep["monotonicity_violations"] == 0

    def test_bench_missing_spec(self, capsys):
        code, out, err = run(capsys, "bench", "does-not-exist.json")
        assert code == 1 and out == "" and "not found" in err

    def test_bench_bad_spec(self, capsys, tmp_path):
        spec = tmp_path / "s.json"
        spec.write_text('{"trials": 0}')
        code, _, err = run(capsys, "bench", str(spec))
        assert code == 1 and "missing" in err

    def test_bench_bundled(self, capsys, tmp_path):
        spec = json.loads((DATA / "sbm-small.json").read_text())
        dest = tmp_path / "r.csv"
        code, out, err = run(capsys, "bench", str(DATA / "sbm-small.json"), "--out", str(dest))
        assert code == 0 and out == ""
        rows = dest.read_text().splitlines()[1:]
        labels = {m["name"] for m in spec["methods"]} | {m["name"] + "+gfoc" for m in spec["methods"] if m.get("gfoc")}
        assert {r.split(",")[0] for r in rows} == labels
        assert len(rows) == len(labels) * len(spec["noise"]["snr_db"])
        assert err.count("\n") == len(rows) + 1

    def test_bench_json(self, capsys, tmp_path):
        spec = tmp_path / "s.json"
        spec.write_text(json.dumps({
            "graph": {"kind": "cycle", "params": {"n": 12}}, "filter": {"psi": 1},
            "signal": {"s": 1}, "noise": {"sigma_n": 0.1, "snr_db": [20]},
            "methods": ["omp"], "trials": 2,
        }))
        code, out, _ = run(capsys, "bench", str(spec), "--format", "json", "--seed", "5")
        assert code == 0 and json.loads(out)["rows"][0]["method"] == "omp"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "graphgic", "solve", "--edge-list", C6, "--measurement", Y_H0],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["support"] == [0]
