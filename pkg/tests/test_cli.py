"""Driver behavior: validation findings, outputs, determinism, overrides."""

import json

import numpy as np
import pytest

from fa1f.cli import ExperimentConfig, main, validate
from fa1f.reporting import canonical_summary_bytes, load_summary


def findings_levels(config):
    return [(f["level"], f["message"]) for f in validate(config)]


class TestValidate:
    def test_q_out_of_range_is_an_error(self):
        cfg = ExperimentConfig(kind="velocity", q=1.2, seed=1)
        assert any(level == "error" for level, _ in findings_levels(cfg))

    def test_supercritical_q_passes_quietly(self):
        cfg = ExperimentConfig(kind="velocity", q=0.8, seed=1)
        assert not any(level in ("error", "warning")
                       for level, _ in findings_levels(cfg))

    def test_subcritical_q_warns(self):
        cfg = ExperimentConfig(kind="velocity", q=0.5, seed=1)
        assert any(level == "warning" for level, _ in findings_levels(cfg))

    def test_missing_seed_noted_and_fatal_in_ci(self):
        cfg = ExperimentConfig(kind="velocity", q=0.9)
        assert any(level == "note" for level, _ in findings_levels(cfg))
        ci = ExperimentConfig(kind="velocity", q=0.9, ci=True)
        assert any(level == "error" for level, _ in findings_levels(ci))

    def test_bad_kind_and_init(self):
        assert any(l == "error" for l, _ in findings_levels(
            ExperimentConfig(kind="nope", seed=1)))
        assert any(l == "error" for l, _ in findings_levels(
            ExperimentConfig(kind="velocity", init="junk", seed=1)))


class TestCommands:
    def test_velocity_poisson_calibration(self, tmp_path):
        out = tmp_path / "vel"
        code = main(["velocity", "--q", "1.0", "--t", "50", "--n", "150",
                     "--seed", "9", "--out", str(out)])
        assert code == 0
        doc = load_summary(out / "summary.json")
        assert doc["schema_version"] == 1
        assert abs(doc["v_hat"] + 1.0) < 0.05
        assert (out / "runs.csv").exists()

    def test_summary_is_deterministic_modulo_timestamp(self, tmp_path):
        args = ["velocity", "--q", "1.0", "--t", "30", "--n", "60",
                "--seed", "4"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert canonical_summary_bytes(out1 / "summary.json") == \
            canonical_summary_bytes(out2 / "summary.json")
        assert (out1 / "runs.csv").read_bytes() == (out2 / "runs.csv").read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps({"q": 0.5, "t": 30, "n": 40, "seed": 2}))
        out = tmp_path / "o"
        code = main(["velocity", "--config", str(cfg_file), "--q", "1.0",
                     "--out", str(out)])
        assert code == 0
        doc = load_summary(out / "summary.json")
        assert doc["config"]["q"] == 1.0
        assert doc["config"]["n"] == 40

    def test_unknown_config_keys_rejected(self, tmp_path):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps({"qq": 0.5}))
        with pytest.raises(SystemExit):
            main(["velocity", "--config", str(cfg_file)])

    def test_invalid_q_exits_nonzero(self, tmp_path):
        code = main(["velocity", "--q", "1.4", "--t", "10", "--n", "5",
                     "--seed", "1", "--out", str(tmp_path / "x")])
        assert code == 2

    def test_validate_subcommand(self, capsys):
        code = main(["validate", "--for", "velocity", "--q", "0.9",
                     "--seed", "3"])
        assert code == 0
        code = main(["validate", "--for", "velocity", "--q", "2.0",
                     "--seed", "3"])
        assert code == 2

    def test_oracle_check_outputs(self, tmp_path):
        out = tmp_path / "oc"
        code = main(["oracle-check", "--q", "0.9", "--n", "2000",
                     "--seed", "5", "--t", "1", "--out", str(out)])
        assert code == 0
        doc = load_summary(out / "summary.json")
        assert doc["max_detailed_balance_violation"] < 1e-12
        assert doc["engine_vs_exact_tv"] < 0.05
        assert (out / "exact_distribution.csv").exists()

    def test_contact_survival_subcritical(self, tmp_path):
        out = tmp_path / "cs"
        code = main(["contact-survival", "--q", "0.5", "--t", "200",
                     "--n", "50", "--seed", "8", "--out", str(out)])
        assert code == 0
        doc = load_summary(out / "summary.json")
        assert doc["survival_frequency"] <= 0.02
        assert doc["subcritical"] is True

    def test_restart_outputs_spec_columns(self, tmp_path):
        out = tmp_path / "rs"
        code = main(["restart", "--q", "0.9", "--t", "40", "--n", "20",
                     "--seed", "12", "--out", str(out)])
        assert code == 0
        header = (out / "runs.csv").read_text().splitlines()[0]
        assert header == "run_id,L,T,Y,survived,horizon"

    def test_simulate_trajectory_dump(self, tmp_path):
        out = tmp_path / "sim"
        code = main(["simulate", "--q", "0.9", "--t", "20", "--n", "1",
                     "--seed", "3", "--out", str(out)])
        assert code == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "time,site,old,new,front"
        assert len(lines) > 10
        assert (out / "probes.csv").exists()

    def test_pattern_initial_condition_from_config_file(self, tmp_path):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps(
            {"q": 0.9, "t": 15, "n": 1, "seed": 6, "init": "pattern:0101"}))
        out = tmp_path / "pat"
        code = main(["simulate", "--config", str(cfg_file), "--out", str(out)])
        assert code == 0
        doc = load_summary(out / "summary.json")
        assert doc["config"]["init"] == "pattern:0101"

    def test_gap_stats_runs(self, tmp_path):
        out = tmp_path / "gap"
        code = main(["gap-stats", "--q", "0.9", "--t", "120", "--n", "30",
                     "--seed", "2", "--box", "5,40", "--gap-lengths", "3,6",
                     "--out", str(out)])
        assert code == 0
        doc = load_summary(out / "summary.json")
        freqs = doc["violation_frequency"]
        assert freqs["3"] >= freqs["6"]
