import pytest
import warnings
import json
from types import SimpleNamespace
from unittest.mock import patch

import numpy as np
from click.testing import CliRunner

from kamlab import __version__
from kamlab.main import cli
from kamlab.utils.presets import GOLDEN, PRESET_NAMES

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")

COMMANDS = ["bnf", "centered-bnf", "counterterm", "degeneracy", "density", "diffusion", "dioph", "family",
            "freqmap", "liouville", "presets", "tori"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def model_file(runner, tmp_path):
    def _make(name):
        path = tmp_path / f"{name}.json"
        result = runner.invoke(cli, ["presets", name, "--out", str(path)])
        assert result.exit_code == 0, result.output
        return path
    return _make


@pytest.fixture
def config_file(tmp_path):
    def _make(data):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data))
        return path
    return _make


def read_report(out_dir, command):
    return json.loads((out_dir / f"{command}.json").read_text())


def test_every_command_is_registered(runner):
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in COMMANDS:
        assert command in result.output


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_presets_are_listed(runner):
    result = runner.invoke(cli, ["presets"])
    assert result.exit_code == 0
    assert result.output.split() == PRESET_NAMES


def test_bnf_on_a_preset_model(runner, model_file, tmp_path):
    out = tmp_path / "reports"
    result = runner.invoke(cli, ["bnf", "--model", str(model_file("integrable-golden")), "--out-dir", str(out),
                                 "--quiet"])
    assert result.exit_code == 0, result.output
    report = read_report(out, "bnf")
    assert report["command"] == "bnf"
    assert report["checks"] == {"conjugacy_defect": True}
    assert report["result"]["N_coeffs"]["0,2"] == pytest.approx(0.5)
    assert len(report["config_hash"]) == 64


def test_omega0_mismatch_exits_with_validation_code(runner, model_file, tmp_path):
    path = model_file("integrable-golden")
    data = json.loads(path.read_text())
    data["omega0"] = [1.0, 0.6]
    path.write_text(json.dumps(data))
    result = runner.invoke(cli, ["bnf", "--model", str(path), "--out-dir", str(tmp_path / "reports")])
    assert result.exit_code == 2
    assert "omega0.1" in result.output
    assert "ModelValidationError" in result.output


def test_missing_model_flag(runner, tmp_path):
    result = runner.invoke(cli, ["degeneracy", "--out-dir", str(tmp_path)])
    assert result.exit_code == 2
    assert "--model" in result.output


def test_freqmap_at_the_origin(runner, model_file, tmp_path):
    out = tmp_path / "reports"
    result = runner.invoke(cli, ["freqmap", "--model", str(model_file("perturbed-golden")), "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    report = read_report(out, "freqmap")
    assert report["checks"]["origin_is_omega0"]
    assert report["result"]["points"][0]["Omega"] == pytest.approx([1.0, GOLDEN], abs=1e-12)
    assert (out / "freqmap.csv").exists()


def test_density_needs_a_seed(runner, model_file, tmp_path):
    result = runner.invoke(cli, ["density", "--model", str(model_file("integrable-golden")),
                                 "--out-dir", str(tmp_path)])
    assert result.exit_code == 2
    assert "seed" in result.output


def test_failed_check_exits_with_numerical_code(runner, model_file, config_file, tmp_path):
    out = tmp_path / "reports"
    config = config_file({"kappas": [0.5], "N_check": 20, "samples": 1000})
    result = runner.invoke(cli, ["density", "--model", str(model_file("integrable-golden")), "--config", str(config),
                                 "--seed", "1", "--out-dir", str(out)])
    assert result.exit_code == 3
    assert "small_at_min_kappa" in result.output
    report = read_report(out, "density")
    assert report["checks"]["small_at_min_kappa"] is False
    assert (out / "density.csv").exists()


def test_invalid_config_field(runner, model_file, config_file, tmp_path):
    result = runner.invoke(cli, ["bnf", "--model", str(model_file("integrable-golden")),
                                 "--config", str(config_file({"q": 0})), "--out-dir", str(tmp_path)])
    assert result.exit_code == 2
    assert "ConfigValidationError" in result.output


def test_dioph_on_a_liouville_pair(runner, model_file, config_file, tmp_path):
    out = tmp_path / "reports"
    config = config_file({"liouville_exponents": [6.0, 6.0], "kappa": 0.5, "N_check": 20})
    result = runner.invoke(cli, ["dioph", "--model", str(model_file("integrable-golden")), "--config", str(config),
                                 "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    assert read_report(out, "dioph")["checks"]["witnesses_reverify"]


def fake_solver(power):
    """Frequency map whose distance from omega0 + c grows like |c|^power."""
    def solve(H, c, config, workers=None):
        c = np.asarray(c, dtype=float)
        Omega = np.array([1.0, GOLDEN]) + c + np.linalg.norm(c, np.inf) ** power
        return SimpleNamespace(c=c.tolist(), Omega=Omega.tolist(), seed=Omega.tolist(), residual=0.0, newton_steps=0,
                               result=SimpleNamespace(Lambda=[0.0, 0.0], Gamma=0.0))
    return solve


@pytest.mark.parametrize("power, exit_code", [(1, 3), (3, 0)])
def test_freqmap_gap_slope_check(runner, model_file, config_file, tmp_path, power, exit_code):
    out = tmp_path / "reports"
    config = config_file({"q": 3, "c_grid": [[0.01, 0.0], [0.02, 0.0], [0.04, 0.0]]})
    with patch("kamlab.routes.kam.frequency_map_solve", fake_solver(power)):
        result = runner.invoke(cli, ["freqmap", "--model", str(model_file("integrable-golden")),
                                     "--config", str(config), "--out-dir", str(out)])
    assert result.exit_code == exit_code, result.output
    report = read_report(out, "freqmap")
    assert report["result"]["gap_slope"] == pytest.approx(power, abs=1e-6)
    assert report["checks"]["gap_slope"] is (exit_code == 0)
    if exit_code:
        assert "gap_slope" in result.output


def test_reports_are_byte_identical_across_runs(runner, model_file, tmp_path):
    model = str(model_file("perturbed-golden"))
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        result = runner.invoke(cli, ["freqmap", "--model", model, "--out-dir", str(out), "--quiet"])
        assert result.exit_code == 0, result.output
        outputs.append((out / "freqmap.json").read_bytes() + (out / "freqmap.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_density_with_counterterm_frequencies(runner, model_file, config_file, tmp_path):
    out = tmp_path / "reports"
    config = config_file({"kappas": [1e-6], "N_check": 20, "samples": 1000, "frequency_source": "counterterm"})
    frequency = patch("kamlab.routes.normal_forms.counterterm_frequency",
                      return_value=lambda c: np.array([1.0, GOLDEN]) + c)
    with frequency as factory:
        result = runner.invoke(cli, ["density", "--model", str(model_file("integrable-golden")),
                                     "--config", str(config), "--seed", "3", "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    factory.assert_called_once()
    report = read_report(out, "density")
    assert report["config"]["config"]["frequency_source"] == "counterterm"
    assert report["checks"]["small_at_min_kappa"]
