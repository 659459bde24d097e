import csv
import json

import pytest

from erasesim import __version__
from erasesim.cli import EXIT_NUMERICAL, EXIT_USAGE, main
from erasesim.montecarlo import CSV_COLUMNS


def run(tmp_path, *argv):
    out = tmp_path / "run"
    code = main([*argv, "--out", str(out)])
    return code, out


class TestMemory:
    def test_writes_csv_and_manifest(self, tmp_path, capsys):
        code, out = run(tmp_path, "memory", "-d", "3", "--p", "0.02",
                        "--re", "0.5", "--trials", "2000", "--seed", "7")
        assert code == 0
        rows = list(csv.reader(open(out)))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 2
        manifest = json.load(open(str(out) + ".manifest.json"))
        assert manifest["format"] == "erasesim-manifest/1"
        assert manifest["version"] == __version__
        assert manifest["command"] == "memory"
        assert manifest["master_seed"] == 7
        assert manifest["outputs"] == [str(out)]
        assert manifest["config"]["p"] == 0.02
        assert "p_L" in capsys.readouterr().out

    def test_deterministic_across_runs(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            assert main(["memory", "-d", "3", "--p", "0.02", "--re", "0.5",
                         "--trials", "2000", "--seed", "7",
                         "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_counts(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for seed, out in ((1, a), (2, b)):
            assert main(["memory", "-d", "3", "--p", "0.05",
                         "--trials", "2000", "--seed", str(seed),
                         "--out", str(out)]) == 0
        assert a.read_bytes() != b.read_bytes()


class TestExitCodes:
    def test_bad_probability_is_usage_error(self, tmp_path, capsys):
        code, _ = run(tmp_path, "memory", "-d", "3", "--p", "1.5",
                      "--trials", "100")
        assert code == EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_bad_grid_is_usage_error(self, tmp_path, capsys):
        code, _ = run(tmp_path, "threshold", "--p-min", "0.02",
                      "--p-max", "0.01", "--trials", "100")
        assert code == EXIT_USAGE

    def test_no_crossing_is_numerical_failure(self, tmp_path, capsys):
        # well below threshold the d=3 and d=5 curves never cross
        code, _ = run(tmp_path, "threshold", "--p-min", "0.004",
                      "--p-max", "0.006", "--points", "3",
                      "--distances", "3", "5", "--trials", "4000",
                      "--seed", "5")
        assert code == EXIT_NUMERICAL
        assert "numerical failure" in capsys.readouterr().err

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            main([])


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('p = 0.02\ntrials = 1500\nre = 0.5\nseed = 3\n')
        code, out = run(tmp_path, "memory", "-d", "3",
                        "--config", str(cfg))
        assert code == 0
        manifest = json.load(open(str(out) + ".manifest.json"))
        assert manifest["config"]["p"] == 0.02
        assert manifest["config"]["trials"] == 1500
        assert manifest["config"]["seed"] == 3

    def test_explicit_flag_beats_config(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('p = 0.02\ntrials = 1500\n')
        code, out = run(tmp_path, "memory", "-d", "3", "--p", "0.03",
                        "--config", str(cfg))
        assert code == 0
        manifest = json.load(open(str(out) + ".manifest.json"))
        assert manifest["config"]["p"] == 0.03
        assert manifest["config"]["trials"] == 1500

    def test_broken_toml_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text("p = [unclosed\n")
        code, _ = run(tmp_path, "memory", "-d", "3", "--p", "0.02",
                      "--trials", "100", "--config", str(cfg))
        assert code == EXIT_USAGE
        assert "config parse error" in capsys.readouterr().err


class TestGate:
    def test_channels_and_erasure_fraction(self, tmp_path, capsys):
        code, out = run(tmp_path, "gate", "--gamma-tg", "0.002")
        assert code == 0
        payload = json.load(open(str(out) + ".json"))
        chans = payload["channels"]
        assert 0.9 < chans["R_e"] <= 1.0
        assert chans["p_e"] > 0.0
        # Pauli leakage is a small fraction of the erasure rate
        assert chans["p_p"] < 0.1 * chans["p_e"]
        text = capsys.readouterr().out
        assert "R_e = " in text

    def test_branching_must_sum_to_one(self, tmp_path):
        code, _ = run(tmp_path, "gate", "--gamma-b", "0.5",
                      "--gamma-r", "0.1", "--gamma-q", "0.1")
        assert code == EXIT_USAGE


class TestThreshold:
    def test_json_payload_schema(self, tmp_path, capsys):
        code, out = run(tmp_path, "threshold", "--p-min", "0.006",
                        "--p-max", "0.013", "--points", "4",
                        "--distances", "3", "5", "--trials", "4000",
                        "--seed", "5")
        assert code == 0
        payload = json.load(open(str(out) + ".json"))
        th = payload["threshold"]
        assert set(th) >= {"p_th", "uncertainty", "d_pair", "window", "nu"}
        assert th["window"][0] <= th["p_th"] <= th["window"][1]
        rows = list(csv.reader(open(str(out) + ".csv")))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 1 + 2 * 4  # two distances x four grid points
        assert "p_th = " in capsys.readouterr().out
