import json
import math

import numpy as np
import pytest

from tspdual.cli import main
from tspdual.instance import save_instance


@pytest.fixture
def unit_square_file(tmp_path, unit_square):
    path = tmp_path / "square.json"
    save_instance(path, unit_square)
    return str(path)


def read_json(path):
    return json.loads(path.read_text())


class TestFormulate:
    def test_summary_reports_oracle(self, tmp_path, unit_square_file):
        out = tmp_path / "out"
        assert main(["formulate", "--instance", unit_square_file, "--out", str(out)]) == 0
        summary = read_json(out / "summary.json")
        assert summary["oracle_length"] == 4.0
        assert summary["oracle_tour_objective"] == 4.0
        assert summary["oracle_tour"] == [1, 2, 3, 4]
        assert summary["symmetric"] is True
        A = np.loadtxt(out / "A.csv", delimiter=",")
        assert A.shape == (16, 16)

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["formulate", "--instance", str(bad), "--out", str(tmp_path / "o")]) == 2

    def test_too_small_instance(self, tmp_path):
        small = tmp_path / "n2.json"
        small.write_text(json.dumps({"n": 2, "d": [0, 1, 1, 0]}))
        assert main(["formulate", "--instance", str(small), "--out", str(tmp_path / "o")]) == 2


class TestReduce:
    def test_paper_match_n4(self, tmp_path, unit_square_file):
        out = tmp_path / "out"
        assert main(["reduce", "--instance", unit_square_file, "--out", str(out)]) == 0
        payload = read_json(out / "reduced.json")
        assert payload["paper_match"] is True
        assert payload["c0"] == 0.0

    def test_n5_dimensions(self, tmp_path):
        out = tmp_path / "out"
        assert main(["reduce", "--n", "5", "--seed", "1", "--out", str(out)]) == 0
        payload = read_json(out / "reduced.json")
        assert len(payload["A_r"]) == 16
        assert len(payload["A_r"][0]) == 16
        assert len(payload["E_r"]) == 7
        assert "paper_match" not in payload


class TestDual:
    def test_gap_record(self, tmp_path, unit_square_file):
        out = tmp_path / "out"
        assert main(["dual", "--instance", unit_square_file, "--out", str(out)]) == 0
        record = read_json(out / "gap_record.json")
        assert record["oracle_optimum"] == 4.0
        assert record["gap"] >= -1e-8
        assert record["verdict"] != "ConfirmsTheorem2"
        trace = (out / "trace.csv").read_text().splitlines()
        assert trace[0] == "iteration,g,gradient_norm,min_eig"
        values = [float(line.split(",")[1]) for line in trace[1:]]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_seeded_run_reproducible(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(["dual", "--n", "4", "--seed", "3", "--out", str(out)]) == 0
        assert (out1 / "gap_record.json").read_bytes() == (out2 / "gap_record.json").read_bytes()
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()


class TestInverse:
    def test_small_run(self, tmp_path):
        out = tmp_path / "out"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"restarts": 5, "local_iters": 200, "seed": 11}))
        assert main(["inverse", "--config", str(cfg), "--out", str(out)]) == 0
        report = read_json(out / "report.json")
        assert report["verdict"] == "NoFeasiblePointFound"
        assert report["best_min_eig"] <= 1e-8
        assert report["config"]["restarts"] == 5

    def test_zero_restarts(self, tmp_path):
        out = tmp_path / "out"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"restarts": 0}))
        assert main(["inverse", "--config", str(cfg), "--out", str(out)]) == 0
        report = read_json(out / "report.json")
        assert report["restarts"] == 0
        assert report["best"] is None

    def test_seed_reproducibility(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"restarts": 4, "local_iters": 200}))
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["inverse", "--config", str(cfg), "--seed", "21", "--out", str(out)]) == 0
            outs.append((out / "report.json").read_bytes())
        assert outs[0] == outs[1]

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert main(["inverse", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


class TestExperiment:
    def test_rows_and_weak_duality(self, tmp_path):
        out = tmp_path / "out"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"k": 3, "ns": [4], "seed": 0}))
        assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "gaps.csv").read_text().splitlines()
        assert lines[0].startswith("# config:")
        rows = [l for l in lines if l and not l.startswith("#") and not l.startswith("instance_id")]
        assert len(rows) == 3
        for row in rows:
            gap = float(row.split(",")[5])
            assert gap >= -1e-8
        assert lines[-1].startswith("# summary:")

    def test_zero_instances(self, tmp_path):
        out = tmp_path / "out"
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"k": 0}))
        assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "gaps.csv").read_text().splitlines()
        assert lines[1].startswith("instance_id,")
        assert len(lines) == 2

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"k": 2, "ns": [4], "seed": 7}))
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
            blobs.append((out / "gaps.csv").read_bytes())
        assert blobs[0] == blobs[1]
