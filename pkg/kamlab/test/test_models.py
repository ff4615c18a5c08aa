import pytest
import warnings
import csv
import json
from unittest.mock import patch

from kamlab.config import settings
from kamlab.errors import ConfigValidationError, ModelValidationError
from kamlab.schemas.run import BnfConfig, DensityConfig
from kamlab.utils.models import load_config, load_hamiltonian, model_from_dict, parse_model, require_seed
from kamlab.utils.presets import GOLDEN, PRESET_NAMES, preset_model
from kamlab.utils.reports import canonical_json, config_hash, dumps, envelope, write_csv

# Suppress all warnings for this test file
warnings.filterwarnings("ignore")


@pytest.fixture
def golden_payload():
    return json.loads(canonical_json(preset_model("integrable-golden")))


@pytest.fixture
def write(tmp_path):
    def _write(name, data):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return path
    return _write


def test_every_preset_materializes():
    for name in PRESET_NAMES:
        model = model_from_dict(json.loads(canonical_json(preset_model(name))))
        assert model.preset == name
        assert len(model.omega0) == model.d


def test_parse_model_roundtrip(write, golden_payload):
    model = parse_model(write("model.json", golden_payload))
    H = load_hamiltonian(model)
    assert model.omega0 == pytest.approx([1.0, GOLDEN])
    assert H.dim == 2 and H.degree_cutoff == 4


def test_preset_reference_is_expanded(write):
    model = parse_model(write("model.json", {"d": 2, "omega0": [1.0, GOLDEN], "preset": "perturbed-golden",
                                             "parameters": {"eps": 1e-4}, "weights": {"rho": 0.2}}))
    assert model.hamiltonian is not None
    assert model.weights.rho == 0.2
    assert model.parameters == {"eps": 1e-4}


def test_zero_strip_width_is_rejected():
    with pytest.raises(ModelValidationError) as exc:
        model_from_dict({"d": 2, "omega0": [1.0, GOLDEN], "preset": "integrable-golden", "weights": {"rho": 0.0}})
    assert exc.value.context["field"] == "weights.rho"


def test_omega0_mismatch_names_the_field(write, golden_payload):
    golden_payload["omega0"] = [1.0, 0.6]
    with pytest.raises(ModelValidationError) as exc:
        parse_model(write("model.json", golden_payload))
    assert exc.value.context["field"] == "omega0.1"
    assert exc.value.context["alpha"] == [0, 1]
    assert exc.value.exit_code == 2


def test_malformed_and_missing_files(write, tmp_path):
    with pytest.raises(ModelValidationError) as exc:
        parse_model(write("broken.json", "{\"d\": 2,"))
    assert "malformed JSON" in exc.value.detail
    with pytest.raises(ModelValidationError):
        parse_model(tmp_path / "absent.json")


def test_shape_errors_are_reported():
    with pytest.raises(ModelValidationError) as exc:
        model_from_dict({"d": 3, "omega0": [1.0, GOLDEN], "preset": "integrable-golden"})
    assert "expected d=3" in exc.value.detail
    with pytest.raises(ModelValidationError) as exc:
        model_from_dict({"d": 1, "omega0": [1.0], "preset": "integrable-golden"})
    assert exc.value.context["field"] == "d"


def test_unknown_preset_is_rejected():
    with pytest.raises(ModelValidationError) as exc:
        model_from_dict({"d": 2, "omega0": [1.0, GOLDEN], "preset": "no-such-model"})
    assert exc.value.context["field"] == "preset"


def test_drift_model_has_no_series():
    model = model_from_dict(json.loads(canonical_json(preset_model("drift-d4"))))
    assert model.kind == "drift"
    with pytest.raises(ModelValidationError):
        load_hamiltonian(model)


def test_config_defaults_and_seed(write):
    assert load_config(None, BnfConfig).q == 4
    config = load_config(write("config.json", {"q": 3}), DensityConfig, seed=9)
    assert config.q == 3 and config.seed == 9
    assert require_seed(config) == 9


def test_invalid_config_names_the_field(write):
    with pytest.raises(ConfigValidationError) as exc:
        load_config(write("config.json", {"q": 0}), BnfConfig)
    assert exc.value.context["field"] == "q"


def test_missing_seed_is_a_config_error():
    with pytest.raises(ConfigValidationError) as exc:
        require_seed(load_config(None, DensityConfig))
    assert exc.value.context["field"] == "seed"


def test_config_hash_is_stable():
    model = preset_model("integrable-golden")
    first = config_hash(model, BnfConfig())
    assert first == config_hash(model, BnfConfig())
    assert first != config_hash(model, BnfConfig(q=3))


def test_report_envelope_is_deterministic():
    report = envelope("bnf", preset_model("integrable-golden"), BnfConfig(), {"x": float("nan"), "y": 1.5},
                      {"ok": True})
    text = dumps(report)
    assert text == dumps(report)
    data = json.loads(text)
    assert data["result"] == {"x": "nan", "y": 1.5}
    assert data["checks"] == {"ok": True}
    assert data["command"] == "bnf"


def test_csv_keeps_full_precision(tmp_path):
    path = write_csv(tmp_path / "trace.csv", ["n", "eps"], [[0, 0.1], [1, 1 / 3]])
    with path.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["n", "eps"]
    assert rows[1] == ["0", "0.10000000000000001"]
    assert float(rows[2][1]) == 1 / 3


def test_numerical_settings_enter_the_hash():
    model = preset_model("perturbed-golden")
    plus = config_hash(model, BnfConfig())
    with patch.object(settings, "FLAT_SIGN", "minus"):
        minus = config_hash(model, BnfConfig())
        echoed = json.loads(dumps(envelope("counterterm", model, BnfConfig(), {})))["config"]["numerics"]
    assert plus != minus
    assert echoed["FLAT_SIGN"] == "minus"
    with patch.object(settings, "WORKERS", 8):
        assert config_hash(model, BnfConfig()) == plus
