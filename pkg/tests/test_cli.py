import json
import os
import subprocess
import sys

import pytest

import qcgeom.cli as cli
from qcgeom.errors import NumericalGuardError


def invoke(*argv):
    return cli.main(list(argv))


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "qcgeom.cli", *argv],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


class TestInProcess:
    def test_costs_default_config(self, tmp_path, capsys):
        code = invoke("costs", "--out", str(tmp_path))
        assert code == 0
        out = capsys.readouterr().out
        assert "costs.csv" in out
        assert (tmp_path / "costs.csv").exists()
        assert (tmp_path / "manifest.json").exists()

    def test_costs_with_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment_kind": "cost_table",
                    "m_values": [2, 3],
                    "output_dir": str(tmp_path / "out"),
                }
            )
        )
        assert invoke("costs", "--config", str(cfg)) == 0
        lines = (tmp_path / "out" / "costs.csv").read_text().splitlines()
        assert len(lines) == 3

    def test_missing_config_file(self, tmp_path, capsys):
        code = invoke("costs", "--config", str(tmp_path / "nope.json"))
        assert code == 2
        assert "config error:" in capsys.readouterr().err

    def test_invalid_json_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"experiment_kind": "cost_table",}')
        assert invoke("costs", "--config", str(cfg)) == 2
        err = capsys.readouterr().err
        assert "line" in err and "column" in err

    def test_unknown_config_field(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"experiment_kind": "cost_table", "outpt_dir": "x"}')
        assert invoke("costs", "--config", str(cfg)) == 2
        assert "unknown field 'outpt_dir'" in capsys.readouterr().err

    def test_kind_subcommand_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"experiment_kind": "dc_vs_p", "n_values": [3], "p_values": [1]}')
        assert invoke("costs", "--config", str(cfg)) == 2
        assert "does not match subcommand" in capsys.readouterr().err

    def test_bad_override_values(self, tmp_path, capsys):
        assert invoke("costs", "--out", str(tmp_path), "--threads", "0") == 2
        assert invoke("costs", "--out", str(tmp_path), "--tolerance", "2.0") == 2
        assert invoke("costs", "--out", str(tmp_path), "--seed", "-3") == 2

    def test_numerical_guard_maps_to_exit_3(self, tmp_path, capsys, monkeypatch):
        def explode(config):
            raise NumericalGuardError("synthetic guard trip")

        monkeypatch.setattr(cli, "run_experiment", explode)
        assert invoke("costs", "--out", str(tmp_path)) == 3
        assert "numerical guard: synthetic guard trip" in capsys.readouterr().err

    def test_seed_override_changes_manifest_hash(self, tmp_path):
        invoke("dc-vs-p", "--config", self._tiny_dc(tmp_path, "a"), "--seed", "1")
        invoke("dc-vs-p", "--config", self._tiny_dc(tmp_path, "b"), "--seed", "2")
        ha = json.loads((tmp_path / "a" / "manifest.json").read_text())["config_hash"]
        hb = json.loads((tmp_path / "b" / "manifest.json").read_text())["config_hash"]
        assert ha != hb

    @staticmethod
    def _tiny_dc(tmp_path, sub):
        cfg = tmp_path / f"dc_{sub}.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment_kind": "dc_vs_p",
                    "n_values": [2],
                    "p_values": [1, 2],
                    "dc_samples": 2,
                    "output_dir": str(tmp_path / sub),
                }
            )
        )
        return str(cfg)


class TestSubprocess:
    def test_costs_end_to_end(self, tmp_path):
        result = run_cli("costs", "--out", str(tmp_path))
        assert result.returncode == 0, result.stderr
        assert (tmp_path / "costs.csv").exists()
        written = [line for line in result.stdout.splitlines() if line.startswith("wrote ")]
        assert len(written) == 2

    def test_exit_code_for_config_error(self, tmp_path):
        result = run_cli("costs", "--config", str(tmp_path / "missing.json"))
        assert result.returncode == 2
        assert "config error:" in result.stderr

    def test_unknown_subcommand(self):
        result = run_cli("frobnicate")
        assert result.returncode == 2

    def test_help_exits_zero(self):
        result = run_cli("--help")
        assert result.returncode == 0
        for name in ("dc-vs-p", "spectrum-vs-p", "variance", "a-sweep", "gc-zero", "prune", "costs"):
            assert name in result.stdout

    def test_prune_demo_small(self, tmp_path):
        cfg = tmp_path / "prune.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment_kind": "prune_demo",
                    "entangler": "cphase",
                    "n_values": [3],
                    "p_values": [4],
                    "dc_samples": 2,
                    "output_dir": str(tmp_path / "out"),
                }
            )
        )
        result = run_cli("prune", "--config", str(cfg))
        assert result.returncode == 0, result.stderr
        for name in (
            "prune_demo.csv",
            "prune_log.json",
            "prune_grid_before.txt",
            "prune_grid_after.txt",
            "manifest.json",
        ):
            assert (tmp_path / "out" / name).exists()
