import csv
import json
import os

import numpy as np
import pytest

from qcgeom.config import config_from_dict
from qcgeom.errors import ConfigError
from qcgeom.experiments import _fmt, run_experiment
from qcgeom.qfi import measurement_costs


def run(tmp_path, **spec):
    spec.setdefault("output_dir", str(tmp_path))
    files = run_experiment(config_from_dict(spec))
    return {os.path.basename(f): f for f in files}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestFloatFormatting:
    def test_shortest_roundtrip(self):
        assert _fmt(0.1) == "0.1"
        assert _fmt(1.0 / 3.0) == "0.3333333333333333"
        assert _fmt(np.float64(0.25)) == "0.25"

    def test_integers_passthrough(self):
        assert _fmt(7) == "7"
        assert _fmt(np.int64(7)) == "7"

    def test_strings_passthrough(self):
        assert _fmt("cnot") == "cnot"

    def test_none_is_empty(self):
        assert _fmt(None) == ""

    def test_value_survives_parse(self):
        for x in (1e-17, 0.1 + 0.2, np.pi, 2.0**-40):
            assert float(_fmt(x)) == float(x)


class TestDcVsP:
    def test_schema_and_consistency(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="dc_vs_p",
            n_values=[3],
            p_values=[1, 2, 3, 4, 5, 6],
            dc_samples=3,
        )
        rows = read_csv(files["dc_vs_p.csv"])
        assert list(rows[0]) == ["N", "p", "D_C", "R", "M"]
        assert len(rows) == 6
        d_c = [int(r["D_C"]) for r in rows]
        assert d_c == sorted(d_c), "D_C must be non-decreasing in depth"
        for r in rows:
            m = int(r["M"])
            assert m == 3 * int(r["p"])
            assert float(r["R"]) == pytest.approx((m - int(r["D_C"])) / m)
        summary = read_csv(files["dc_vs_p_summary.csv"])
        assert list(summary[0]) == ["N", "saturation_p", "predicted_p_c"]
        assert float(summary[0]["predicted_p_c"]) > 0

    def test_saturation_detected_when_bound_reached(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="dc_vs_p",
            n_values=[3],
            p_values=list(range(1, 9)),
            dc_samples=3,
        )
        rows = read_csv(files["dc_vs_p.csv"])
        assert max(int(r["D_C"]) for r in rows) == 14
        summary = read_csv(files["dc_vs_p_summary.csv"])[0]
        assert summary["saturation_p"] != ""
        saturation = int(summary["saturation_p"])
        first_saturated = min(int(r["p"]) for r in rows if int(r["D_C"]) == 14)
        assert saturation == first_saturated

    def test_missing_ranges_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="n_values"):
            run(tmp_path, experiment_kind="dc_vs_p", p_values=[1])
        with pytest.raises(ConfigError, match="p_values"):
            run(tmp_path, experiment_kind="dc_vs_p", n_values=[3])


class TestSpectrumVsP:
    def test_schema(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="spectrum_vs_p",
            n_values=[3],
            p_values=[2, 4],
            num_instances=4,
            num_bins=6,
        )
        rows = read_csv(files["spectrum_vs_p.csv"])
        assert list(rows[0]) == ["N", "p", "instance", "var_log_nonzero", "min_nonzero"]
        assert len(rows) == 8
        assert {r["p"] for r in rows} == {"2", "4"}
        assert all(float(r["min_nonzero"]) > 0 for r in rows)
        for p in (2, 4):
            hist = read_csv(files[f"spectrum_hist_N3_p{p}.csv"])
            assert list(hist[0]) == ["bin_left_log10", "bin_right_log10", "count"]
            assert len(hist) == 6
            assert sum(int(r["count"]) for r in hist) > 0

    def test_threads_do_not_change_output(self, tmp_path):
        spec = dict(
            experiment_kind="spectrum_vs_p",
            n_values=[3],
            p_values=[3],
            num_instances=5,
            num_bins=5,
        )
        a = run(tmp_path / "serial", **spec, threads=1)
        b = run(tmp_path / "pool", **spec, threads=3)
        for name in ("spectrum_vs_p.csv", "spectrum_hist_N3_p3.csv"):
            assert open(a[name], "rb").read() == open(b[name], "rb").read()


class TestVariance:
    def test_vs_p_rows_paired_grad_qng(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="variance_vs_p",
            n_values=[3],
            p_values=[2, 4],
            num_instances=5,
        )
        rows = read_csv(files["variance_vs_p.csv"])
        assert [r["quantity"] for r in rows] == ["grad", "qng", "grad", "qng"]
        for r in rows:
            assert int(r["count"]) == 5
            assert float(r["variance"]) >= 0
            assert float(r["jackknife_stderr"]) >= 0

    def test_qng_skipped_above_parameter_cap(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="variance_vs_p",
            n_values=[3],
            p_values=[2, 4],
            num_instances=4,
            qng_max_parameters=9,
        )
        rows = read_csv(files["variance_vs_p.csv"])
        # 3 qubits: p = 2 has M = 6 <= 9, p = 4 has M = 12 > 9
        assert [(r["p"], r["quantity"]) for r in rows] == [
            ("2", "grad"),
            ("2", "qng"),
            ("4", "grad"),
        ]

    def test_vs_n_uses_depth_2n(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="variance_vs_n",
            n_values=[3, 4],
            num_instances=4,
        )
        rows = read_csv(files["variance_vs_n.csv"])
        by_n = {r["N"]: r["p"] for r in rows}
        assert by_n == {"3": "6", "4": "8"}

    def test_ising_hamiltonian_column(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="variance_vs_p",
            n_values=[3],
            p_values=[2],
            num_instances=3,
            hamiltonian="ising",
        )
        rows = read_csv(files["variance_vs_p.csv"])
        assert all(r["hamiltonian"] == "ising" for r in rows)

    def test_paired_rows_share_instances(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="variance_vs_p",
            n_values=[3],
            p_values=[3],
            num_instances=6,
        )
        rows = read_csv(files["variance_vs_p.csv"])
        grad = next(r for r in rows if r["quantity"] == "grad")
        qng = next(r for r in rows if r["quantity"] == "qng")
        assert grad["count"] == qng["count"]


class TestASweep:
    def test_schema_and_a_order(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="a_sweep",
            n_values=[3],
            p_values=[2],
            a_values=[0.001, 0.1, 1.0],
            num_instances=4,
        )
        rows = read_csv(files["a_sweep.csv"])
        assert [float(r["a"]) for r in rows] == [0.001, 0.1, 1.0]
        assert all(float(r["mean_gc"]) > 0 for r in rows)

    def test_requires_a_values(self, tmp_path):
        with pytest.raises(ConfigError, match="a_values"):
            run(tmp_path, experiment_kind="a_sweep", n_values=[3], p_values=[2])


class TestGcZero:
    def test_all_entanglers_reported(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="gc_zero_scaling",
            n_values=[3],
            p_values=[1, 2, 3],
            num_instances=3,
        )
        rows = read_csv(files["gc_zero.csv"])
        assert list(rows[0]) == ["entangler", "N", "gc_zero"]
        assert {r["entangler"] for r in rows} == {"cnot", "cphase", "sqrt_iswap"}
        assert len(rows) == 3
        assert all(float(r["gc_zero"]) >= 1 for r in rows)


class TestPruneDemo:
    def test_outputs(self, tmp_path):
        files = run(
            tmp_path,
            experiment_kind="prune_demo",
            n_values=[3],
            p_values=[5],
            entangler="cphase",
        )
        rows = read_csv(files["prune_demo.csv"])
        row = rows[0]
        assert row["verify_ok"] == "true"
        assert int(row["final_M"]) == int(row["initial_M"]) - int(row["removed_count"])
        assert int(row["final_M"]) == int(row["D_C_before"])

        payload = json.loads(open(files["prune_log.json"]).read())
        assert payload["verify_ok"] is True
        assert payload["log"]["final_M"] == int(row["final_M"])
        assert len(payload["log"]["removed_indices"]) == int(row["removed_count"])
        assert payload["verify_report"]["fresh_full_rank"] is True

        before = open(files["prune_grid_before.txt"]).read().rstrip("\n")
        after = open(files["prune_grid_after.txt"]).read().rstrip("\n")
        assert len(before.split("\n")) == 3
        assert "I" not in before
        assert after.count("I") == int(row["removed_count"])


class TestCostTable:
    def test_matches_formulas(self, tmp_path):
        files = run(tmp_path, experiment_kind="cost_table", m_values=[1, 2, 7, 40])
        rows = read_csv(files["costs.csv"])
        for r in rows:
            m = int(r["M"])
            costs = measurement_costs(m)
            assert int(r["shift_rule_fidelities"]) == costs.shift_rule_fidelities
            assert int(r["hadamard_tests"]) == costs.hadamard_tests
            assert int(r["pauli_measurements"]) == costs.pauli_measurements


class TestManifest:
    def test_contents(self, tmp_path):
        spec = dict(
            experiment_kind="dc_vs_p", n_values=[3], p_values=[1, 2], dc_samples=2
        )
        files = run(tmp_path, **spec)
        manifest = json.loads(open(files["manifest.json"]).read())
        assert set(manifest) == {"config_hash", "tool_version", "files"}
        cfg = config_from_dict({**spec, "output_dir": str(tmp_path)})
        assert manifest["config_hash"] == cfg.config_hash()
        listed = manifest["files"]
        assert listed == sorted(listed)
        assert "manifest.json" not in listed
        assert set(listed) == {"dc_vs_p.csv", "dc_vs_p_summary.csv"}
        for name in listed:
            assert os.path.exists(os.path.join(str(tmp_path), name))

    def test_no_timestamps(self, tmp_path):
        files = run(tmp_path, experiment_kind="cost_table", m_values=[1])
        text = open(files["manifest.json"]).read()
        assert "time" not in text and "date" not in text


class TestDeterminism:
    @pytest.mark.parametrize(
        "spec",
        [
            dict(experiment_kind="dc_vs_p", n_values=[3], p_values=[1, 3], dc_samples=2),
            dict(
                experiment_kind="variance_vs_p",
                n_values=[3],
                p_values=[2],
                num_instances=4,
            ),
            dict(
                experiment_kind="gc_zero_scaling",
                n_values=[3],
                p_values=[1, 2],
                num_instances=2,
            ),
        ],
        ids=lambda s: s["experiment_kind"],
    )
    def test_rerun_byte_identical(self, tmp_path, spec):
        first = run(tmp_path, **spec)
        snapshots = {
            name: open(path, "rb").read()
            for name, path in first.items()
        }
        second = run(tmp_path, **spec)
        assert set(second) == set(first)
        for name, path in second.items():
            assert open(path, "rb").read() == snapshots[name], name
