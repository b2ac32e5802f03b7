"""Scenario schema validation, CLI verbs, exit codes, determinism."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from oscsim.cli import main
from oscsim.config import load_scenario, parse_scenario
from oscsim.errors import ConfigInvalid
from oscsim.pipelines import run_scenario, sweep_scenario

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"
ALL_SCENARIOS = sorted(SCENARIO_DIR.glob("*.json"))


def minimal_linear(tmp_path, **overrides):
    cfg = {
        "name": "mini",
        "pipeline": "linear",
        "system": {
            "masses": [1.0],
            "stiffness": [[1.0]],
            "x0": [1.0],
            "v0": [0.0],
        },
        "horizon": 2.0,
        "samples": 11,
        "epsilon": 1e-6,
    }
    cfg.update(overrides)
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(cfg))
    return path


class TestSchema:
    def test_missing_field_named(self, tmp_path):
        path = minimal_linear(tmp_path)
        cfg = json.loads(path.read_text())
        del cfg["horizon"]
        with pytest.raises(ConfigInvalid, match="horizon"):
            parse_scenario(cfg)

    def test_bad_pipeline(self, tmp_path):
        cfg = json.loads(minimal_linear(tmp_path).read_text())
        cfg["pipeline"] = "warp"
        with pytest.raises(ConfigInvalid, match="pipeline"):
            parse_scenario(cfg)

    def test_samples_floor(self, tmp_path):
        cfg = json.loads(minimal_linear(tmp_path).read_text())
        cfg["samples"] = 1
        with pytest.raises(ConfigInvalid, match="samples"):
            parse_scenario(cfg)

    def test_pipeline_field_consistency(self, tmp_path):
        cfg = json.loads(minimal_linear(tmp_path).read_text())
        cfg["pipeline"] = "forced"
        with pytest.raises(ConfigInvalid, match="forcing"):
            parse_scenario(cfg)

    def test_malformed_json_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigInvalid):
            load_scenario(bad)

    def test_all_bundled_scenarios_parse(self):
        assert len(ALL_SCENARIOS) == 7
        for path in ALL_SCENARIOS:
            load_scenario(path)


class TestRunScenario:
    def test_linear_artifacts(self, tmp_path):
        scen = load_scenario(minimal_linear(tmp_path))
        res = run_scenario(scen, str(tmp_path / "out"))
        assert res.ok
        names = {os.path.basename(f) for f in res.files}
        assert names == {
            "mini_trajectory.csv", "mini_error.csv", "mini_report.json"
        }

    @pytest.mark.parametrize("path", ALL_SCENARIOS, ids=lambda p: p.stem)
    def test_bundled_scenarios_pass(self, path, tmp_path):
        scen = load_scenario(path)
        res = run_scenario(scen, str(tmp_path))
        assert res.ok, res.report

    def test_forced_report_fields(self, tmp_path):
        scen = load_scenario(SCENARIO_DIR / "forced_1d.json")
        res = run_scenario(scen, str(tmp_path))
        for key in ("m_f", "xi0", "norm_Kp", "max_error", "pass"):
            assert key in res.report
        assert res.report["pass"] is True

    def test_byte_identical_reruns(self, tmp_path):
        scen = load_scenario(SCENARIO_DIR / "harmonic_1d.json")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        res1 = run_scenario(scen, str(out1))
        res2 = run_scenario(scen, str(out2))
        for f1, f2 in zip(sorted(res1.files), sorted(res2.files)):
            assert Path(f1).read_bytes() == Path(f2).read_bytes()


class TestSweep:
    def test_eta_sweep_monotone(self, tmp_path):
        scen = load_scenario(SCENARIO_DIR / "nls_carleman_scalar.json")
        path, rows = sweep_scenario(
            scen, "eta", [4.0, 8.0, 16.0, 32.0, 64.0], str(tmp_path)
        )
        errs = [r[5] for r in rows]
        assert all(a > b for a, b in zip(errs, errs[1:]))
        header = Path(path).read_text().splitlines()[0]
        assert header == "param,value,k,eta,t,measured_error,bound,pass"

    def test_k_sweep_decreasing_decoded(self, tmp_path):
        scen = load_scenario(SCENARIO_DIR / "nls_carleman_scalar.json")
        _, rows = sweep_scenario(scen, "k", [1, 2, 3, 4], str(tmp_path))
        assert len(rows) == 4

    def test_m_f_sweep(self, tmp_path):
        scen = load_scenario(SCENARIO_DIR / "forced_1d.json")
        _, rows = sweep_scenario(scen, "m_f", [100.0, 1000.0], str(tmp_path))
        assert rows[1][5] < rows[0][5]

    def test_empty_values_rejected(self, tmp_path):
        scen = load_scenario(SCENARIO_DIR / "forced_1d.json")
        with pytest.raises(ConfigInvalid):
            sweep_scenario(scen, "m_f", [], str(tmp_path))


class TestCLI:
    def test_simulate_exit_zero(self, tmp_path):
        code = main([
            "simulate", str(SCENARIO_DIR / "harmonic_1d.json"),
            "--out", str(tmp_path),
        ])
        assert code == 0

    def test_validate(self):
        assert main(["validate", str(SCENARIO_DIR / "forced_1d.json")]) == 0

    def test_malformed_config_exit_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        assert main(["simulate", str(bad)]) == 2

    def test_sweep_verb(self, tmp_path):
        code = main([
            "sweep", str(SCENARIO_DIR / "forced_1d.json"),
            "--param", "m_f", "--values", "200,2000",
            "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "forced_1d_sweep_m_f.csv").exists()

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "oscsim.cli", "validate",
             str(SCENARIO_DIR / "harmonic_1d.json")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
