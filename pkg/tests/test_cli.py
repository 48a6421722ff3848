import json
from pathlib import Path

import pytest

from minimaxsplit.cli import build_parser, main


def run_cli(args):
    return main([str(a) for a in args])


class TestExitCodes:
    def test_success_returns_zero(self, tmp_path, capsys):
        code = run_cli(["martingale", "--out", tmp_path / "m", "--config",
                        '{"n_atoms": 16, "max_depth": 3}'])
        assert code == 0
        out = capsys.readouterr().out
        assert "martingale: wrote" in out and str(tmp_path / "m") in out
        assert (tmp_path / "m" / "decay.csv").exists()

    def test_config_error_returns_two(self, tmp_path, capsys):
        code = run_cli(["martingale", "--out", tmp_path / "m", "--config",
                        '{"density": "gaussian"}'])
        assert code == 2
        assert "gaussian" in capsys.readouterr().err

    def test_unknown_config_key_returns_two(self, tmp_path, capsys):
        code = run_cli(["ecp", "--out", tmp_path / "e", "--config",
                        '{"n": 30, "nope": 1}'])
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_data_error_returns_three(self, tmp_path, capsys):
        code = run_cli(["martingale", "--out", tmp_path / "m", "--config",
                        json.dumps({"density": str(tmp_path / "missing.csv")})])
        assert code == 3
        assert "missing.csv" in capsys.readouterr().err

    def test_bad_threads_returns_two(self, tmp_path, capsys):
        code = run_cli(["martingale", "--out", tmp_path / "m", "--threads", "0"])
        assert code == 2

    def test_unknown_subcommand_exits_via_argparse(self):
        with pytest.raises(SystemExit):
            run_cli(["frobnicate"])


class TestConfigSources:
    def test_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"n_atoms": 8, "max_depth": 2}', encoding="utf-8")
        assert run_cli(["martingale", "--out", tmp_path / "m",
                        "--config", cfg]) == 0
        doc = json.loads((tmp_path / "m" / "manifest.json").read_text())
        assert doc["config"]["n_atoms"] == 8

    def test_missing_config_file(self, tmp_path, capsys):
        code = run_cli(["martingale", "--out", tmp_path / "m",
                        "--config", tmp_path / "absent.json"])
        assert code == 2

    def test_malformed_inline_json(self, tmp_path):
        assert run_cli(["martingale", "--out", tmp_path / "m",
                        "--config", '{"n_atoms": }']) == 2

    def test_defaults_without_config(self, tmp_path):
        assert run_cli(["powell", "--out", tmp_path / "p", "--config",
                        '{"n_values": [100], "n_test": 100, "max_depth": 2}']) == 0


class TestDeterminism:
    def test_rerun_is_byte_identical(self, tmp_path):
        conf = '{"n": 40, "replicates": 5, "noise_laws": ["normal"]}'
        assert run_cli(["ecp", "--seed", 7, "--out", tmp_path / "a",
                        "--config", conf]) == 0
        assert run_cli(["ecp", "--seed", 7, "--out", tmp_path / "b",
                        "--config", conf]) == 0
        for name in ("ecp.csv", "ecp_summary.csv", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_threads_flag_keeps_bytes(self, tmp_path):
        conf = '{"n": 40, "replicates": 6, "noise_laws": ["normal"]}'
        run_cli(["ecp", "--seed", 1, "--out", tmp_path / "s", "--config", conf])
        run_cli(["ecp", "--seed", 1, "--out", tmp_path / "p", "--threads", 3,
                 "--config", conf])
        assert (tmp_path / "s" / "ecp.csv").read_bytes() == \
            (tmp_path / "p" / "ecp.csv").read_bytes()


class TestWarningsAndHelp:
    def test_warnings_go_to_stderr(self, tmp_path, capsys):
        src = tmp_path / "series.csv"
        lines = ["time,value"] + [f"day-{i},{float(i)!r}" for i in range(30)]
        src.write_text("\n".join(lines) + "\n", encoding="utf-8")
        code = run_cli(["timeseries", "--out", tmp_path / "ts", "--config",
                        json.dumps({"data": str(src), "depths": [2]})])
        assert code == 0
        assert "row index" in capsys.readouterr().err

    def test_parser_lists_all_subcommands(self):
        parser = build_parser()
        subactions = [a for a in parser._actions if a.dest == "command"]
        assert subactions
        names = set(subactions[0].choices)
        assert names == {"ecp", "leafsize", "sine", "asbp", "denoise", "powell",
                         "timeseries", "martingale", "train", "predict"}

    def test_train_predict_pipeline(self, tmp_path):
        src = tmp_path / "d.csv"
        rows = ["x,y"] + [f"{i / 20!r},{(0.0 if i < 10 else 5.0)!r}"
                          for i in range(20)]
        src.write_text("\n".join(rows) + "\n", encoding="utf-8")
        assert run_cli(["train", "--out", tmp_path / "tr", "--config",
                        json.dumps({"data": str(src), "target": "y",
                                    "max_depth": 2})]) == 0
        assert run_cli(["predict", "--out", tmp_path / "pr", "--config",
                        json.dumps({"model": str(tmp_path / "tr" / "model.json"),
                                    "data": str(src), "target": "y"})]) == 0
        metrics = json.loads((tmp_path / "pr" / "metrics.json").read_text())
        assert metrics["mse"] == 0.0
