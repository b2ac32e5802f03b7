"""Secondary plot component: renders harness CSVs, slope annotations exact.

The CSV fixtures are produced by the primary CLI through its external
interface (subprocess), never by importing pipeline internals.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from oscsim_plots import (
    EmptyData,
    MissingColumn,
    PlotSpec,
    fit_loglog_slope,
    read_csv_columns,
    render,
)

REPO = Path(__file__).resolve().parents[2]
SCENARIOS = REPO / "scenarios"


def run_primary(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "oscsim.cli", *args],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def harness_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("harness")
    run_primary("simulate", str(SCENARIOS / "harmonic_1d.json"), "--out", str(out))
    run_primary(
        "sweep", str(SCENARIOS / "nls_carleman_scalar.json"),
        "--param", "eta", "--values", "4,8,16,32,64", "--out", str(out),
    )
    run_primary(
        "sweep", str(SCENARIOS / "nls_carleman_scalar.json"),
        "--param", "k", "--values", "1,2,3,4,5", "--out", str(out),
    )
    run_primary(
        "sweep", str(SCENARIOS / "forced_1d.json"),
        "--param", "m_f", "--values", "725,2292,7246,22923,72464", "--out", str(out),
    )
    return out


class TestRender:
    def test_eta_sweep_slope_annotation(self, harness_outputs, tmp_path):
        csv_path = harness_outputs / "nls_carleman_scalar_sweep_eta.csv"
        spec = PlotSpec.from_dict({
            "input": str(csv_path),
            "kind": "loglog-sweep",
            "output": str(tmp_path / "eta.png"),
            "xlabel": "eta",
            "ylabel": "symmetrization error",
        })
        result = render(spec)
        assert Path(result.output).exists()
        # annotation equals an independent least-squares fit
        cols = read_csv_columns(csv_path)
        keep = (cols["value"] > 0) & (cols["measured_error"] > 0)
        slope = np.polyfit(
            np.log(cols["value"][keep]), np.log(cols["measured_error"][keep]), 1
        )[0]
        assert abs(result.slope - slope) <= 1e-9
        assert -2.3 <= result.slope <= -1.7

    def test_m_f_sweep_slope_near_minus_one(self, harness_outputs, tmp_path):
        result = render({
            "input": str(harness_outputs / "forced_1d_sweep_m_f.csv"),
            "kind": "loglog-sweep",
            "output": str(tmp_path / "mf.png"),
        })
        assert -1.3 <= result.slope <= -0.7

    def test_overlay_trajectory(self, harness_outputs, tmp_path):
        result = render({
            "input": str(harness_outputs / "harmonic_1d_trajectory.csv"),
            "kind": "overlay",
            "output": str(tmp_path / "overlay.png"),
            "title": "harmonic pipeline",
        })
        assert Path(result.output).exists()
        assert set(result.columns) == {"x_0", "v_0"}

    def test_overlay_two_files(self, harness_outputs, tmp_path):
        traj = str(harness_outputs / "harmonic_1d_trajectory.csv")
        result = render({
            "inputs": [traj, traj],
            "kind": "overlay",
            "output": str(tmp_path / "overlay2.png"),
            "y": ["x_0"],
        })
        assert Path(result.output).exists()

    def test_bound_compare_k_sweep(self, harness_outputs, tmp_path):
        result = render({
            "input": str(harness_outputs / "nls_carleman_scalar_sweep_k.csv"),
            "kind": "bound-compare",
            "output": str(tmp_path / "k.png"),
            "x": "k",
        })
        assert Path(result.output).exists()

    def test_all_bundled_sweeps_render(self, harness_outputs, tmp_path):
        for csv_path in sorted(harness_outputs.glob("*_sweep_*.csv")):
            result = render({
                "input": str(csv_path),
                "kind": "loglog-sweep",
                "output": str(tmp_path / (csv_path.stem + ".png")),
            })
            assert Path(result.output).exists()


class TestErrors:
    def test_missing_column(self, harness_outputs, tmp_path):
        with pytest.raises(MissingColumn):
            render({
                "input": str(harness_outputs / "harmonic_1d_trajectory.csv"),
                "kind": "loglog-sweep",
                "output": str(tmp_path / "x.png"),
            })

    def test_empty_csv(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("t,x_0\n")
        with pytest.raises(EmptyData):
            render({
                "input": str(empty),
                "kind": "overlay",
                "output": str(tmp_path / "x.png"),
            })

    def test_fit_requires_positive_data(self):
        with pytest.raises(EmptyData):
            fit_loglog_slope([1.0, 2.0], [0.0, -1.0])


class TestCLI:
    def test_plot_verb(self, harness_outputs, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({
            "input": str(harness_outputs / "nls_carleman_scalar_sweep_eta.csv"),
            "kind": "loglog-sweep",
            "output": str(tmp_path / "fig.png"),
        }))
        proc = subprocess.run(
            [sys.executable, "-m", "oscsim_plots.cli", str(spec_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert "slope" in proc.stdout
        assert (tmp_path / "fig.png").exists()

    def test_bad_spec_exit_code(self, tmp_path):
        spec_path = tmp_path / "bad.json"
        spec_path.write_text(json.dumps({"kind": "overlay"}))
        proc = subprocess.run(
            [sys.executable, "-m", "oscsim_plots.cli", str(spec_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
