import json

import pytest

from app.cli import main
from app.ml.serialization import load_model
from app.services import fixtures

SIMULATE_POND_1 = ["simulate", "--pond", "1", "--duration", "3000", "--interval", "150"]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:

    def test_pond_feed(self, capsys):
        """Test a seeded pond-1 run keeps twenty settled rows"""
        code, out, _ = run(capsys, *SIMULATE_POND_1, "--seed", "42")
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "created_at,entry_id,field1,field2,field3,field4,field5"
        assert len(lines) == 21
        assert lines[1].startswith("2020-12-20T20:55:00Z,3,")

    def test_deterministic(self, capsys):
        """Test the same seed gives the same feed"""
        _, first, _ = run(capsys, *SIMULATE_POND_1, "--seed", "42")
        _, second, _ = run(capsys, *SIMULATE_POND_1, "--seed", "42")
        _, other, _ = run(capsys, *SIMULATE_POND_1, "--seed", "43")
        assert first == second
        assert first != other

    def test_writes_file(self, capsys, tmp_path):
        """Test --out writes the CSV instead of printing it"""
        target = tmp_path / "feed.csv"
        code, out, _ = run(capsys, *SIMULATE_POND_1, "--out", str(target))
        assert code == 0
        assert out == ""
        assert len(target.read_text(encoding="utf-8").splitlines()) == 21

    def test_bad_arguments(self, capsys):
        """Test a missing or unknown pond is a usage error"""
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--duration", "600"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--pond", "9"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--pond", "1", "--interval", "0"])
        assert exc.value.code == 2


class TestVerdict:

    def test_fixture_table(self, capsys):
        """Test the fixture verdict table lists all five ponds"""
        code, out, _ = run(capsys, "verdict", "--fixtures")
        assert code == 0
        for pond_id in fixtures.POND_IDS:
            assert f"Pond {pond_id} " in out
        assert "pH 3.84-3.95 below ideal range 6.5-8.5" in out

    def test_fixture_json(self, capsys):
        """Test the JSON verdicts recommend ponds 1, 3 and 4"""
        _, out, _ = run(capsys, "verdict", "--fixtures", "--format", "json")
        verdicts = json.loads(out)
        assert {v["pond_id"] for v in verdicts if v["recommended"]} == {1, 3, 4}

    def test_one_fixture_pond(self, capsys):
        """Test --pond narrows the fixtures and an unknown pond fails"""
        _, out, _ = run(capsys, "verdict", "--fixtures", "--pond", "2", "--format", "json")
        assert [v["pond_id"] for v in json.loads(out)] == [2]
        code, _, err = run(capsys, "verdict", "--fixtures", "--pond", "7")
        assert code == 1
        assert "pond 7" in err

    def test_simulated_feed_file(self, capsys, tmp_path):
        """Test a simulated acidic pond is not recommended"""
        feed = tmp_path / "pond5.csv"
        run(capsys, "simulate", "--pond", "5", "--duration", "600", "--out", str(feed))
        code, out, _ = run(
            capsys, "verdict", "--input", str(feed), "--pond", "5", "--format", "json"
        )
        assert code == 0
        [verdict] = json.loads(out)
        assert verdict["pond_id"] == 5
        assert verdict["recommended"] is False
        assert "pH" in verdict["remarks"]

    def test_empty_feed_file(self, capsys, tmp_path):
        """Test an empty feed file is reported, not raised"""
        empty = tmp_path / "empty.csv"
        empty.write_text("", encoding="utf-8")
        code, out, err = run(capsys, "verdict", "--input", str(empty))
        assert code == 1
        assert out == ""
        assert err.startswith("pondwatch: error:")


class TestEvaluate:

    def test_unknown_algorithm(self, capsys):
        """Test an unknown tag or too few folds is a usage error"""
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--synthetic", "50", "--algo", "svm"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--synthetic", "50", "--folds", "1"])
        assert exc.value.code == 2

    def test_ranking_and_saved_models(self, capsys, tmp_path):
        """Test a small synthetic run ranks both algorithms and saves their models"""
        models = tmp_path / "models"
        code, out, _ = run(
            capsys,
            "evaluate",
            "--synthetic", "110",
            "--disjoint",
            "--algo", "knn,j48",
            "--folds", "5",
            "--format", "csv",
            "--save-models", str(models),
        )
        lines = out.splitlines()
        assert code == 0
        assert lines[0] == "rank,algorithm,accuracy_pct,kappa_pct,avg_tp_rate_pct"
        assert sorted(line.split(",")[1] for line in lines[1:]) == ["j48", "knn"]
        assert load_model(models / "knn.json").tag == "knn"
        assert load_model(models / "j48.json").tag == "j48"

    def test_export_saved_report(self, capsys, tmp_path):
        """Test a saved JSON report re-renders to the same ranking"""
        saved = tmp_path / "report.json"
        args = ["evaluate", "--synthetic", "110", "--disjoint", "--algo", "knn", "--folds", "5"]
        run(capsys, *args, "--format", "json", "--out", str(saved))
        _, direct, _ = run(capsys, *args, "--format", "csv")
        code, exported, _ = run(capsys, "export-report", "--input", str(saved), "--format", "csv")
        assert code == 0
        assert exported == direct


class TestExportReport:

    def test_fixtures_csv(self, capsys):
        """Test the embedded tables export as CSV"""
        code, out, _ = run(capsys, "export-report", "--fixtures", "--format", "csv")
        assert code == 0
        assert out == fixtures.export_fixtures_csv()

    def test_missing_report(self, capsys, tmp_path):
        """Test a missing report file fails cleanly"""
        code, _, err = run(capsys, "export-report", "--input", str(tmp_path / "nope.json"))
        assert code == 1
        assert "nope.json" in err


class TestConfigFile:

    def test_defaults_from_file(self, capsys, tmp_path):
        """Test config values act as defaults that flags still override"""
        config = tmp_path / "pondwatch.toml"
        config.write_text("[simulate]\nseed = 42\nduration = 600\n", encoding="utf-8")
        _, from_file, _ = run(capsys, "--config", str(config), "simulate", "--pond", "1")
        _, explicit, _ = run(
            capsys, "simulate", "--pond", "1", "--seed", "42", "--duration", "600"
        )
        assert from_file == explicit
        assert len(from_file.splitlines()) == 5

        _, longer, _ = run(
            capsys, "--config", str(config), "simulate", "--pond", "1", "--duration", "900"
        )
        assert len(longer.splitlines()) == 7

    def test_invalid_file(self, capsys, tmp_path):
        """Test a broken config file is an error"""
        config = tmp_path / "broken.toml"
        config.write_text("[simulate\n", encoding="utf-8")
        code, _, err = run(capsys, "--config", str(config), "verdict", "--fixtures")
        assert code == 1
        assert "not valid TOML" in err
