"""
Model Ingestion
Reading model and run-config files into validated schemas and series
"""
import json
import logging
from pathlib import Path
from typing import Optional, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from kamlab.errors import ConfigValidationError, ModelValidationError
from kamlab.normal_forms.birkhoff import frequency_from
from kamlab.schemas.model import ModelFile
from kamlab.series import FourierTaylorSeries, NormWeights
from kamlab.utils.presets import preset_hamiltonian, preset_model

logger = logging.getLogger(__name__)

C = TypeVar("C", bound=BaseModel)

OMEGA_TOL = 1e-12


def _read_json(path: Union[str, Path], error: Type[ModelValidationError]):
    path = Path(path)
    if not path.exists():
        raise error(f"file not found: {path}", {"path": str(path)})
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        logger.error(f"malformed JSON in {path}: {e}")
        raise error(f"malformed JSON in {path}: line {e.lineno}, column {e.colno}", {"path": str(path)})


def _field_of(e: ValidationError) -> str:
    first = e.errors()[0]
    return ".".join(str(x) for x in first["loc"]) or "<root>"


def model_from_dict(data: dict) -> ModelFile:
    try:
        model = ModelFile(**data)
    except ValidationError as e:
        field = _field_of(e)
        raise ModelValidationError(f"invalid model field {field}: {e.errors()[0]['msg']}", {"field": field})
    if model.hamiltonian is None and model.preset is not None:
        materialized = preset_model(model.preset, model.parameters)
        model = materialized.model_copy(update={"weights": model.weights})
    check_model(model)
    return model


def parse_model(path: Union[str, Path]) -> ModelFile:
    """Validated model file; errors name the offending field."""
    model = model_from_dict(_read_json(path, ModelValidationError))
    logger.info(f"model loaded from {path}: d={model.d}, kind={model.kind}")
    return model


def load_hamiltonian(model: ModelFile) -> FourierTaylorSeries:
    if model.kind != "hamiltonian":
        raise ModelValidationError(f"model of kind {model.kind!r} carries no series Hamiltonian", {"field": "kind"})
    if model.hamiltonian is None:
        return preset_hamiltonian(model.preset, model.parameters)
    H = FourierTaylorSeries.from_payload(model.hamiltonian)
    if model.N is not None or model.q is not None:
        H = H.with_workspace(max(H.fourier_cutoff, model.N or 0), max(H.degree_cutoff, model.q or 0))
    return H


def check_model(model: ModelFile) -> None:
    """omega0 must equal the degree-1 coefficients of the Hamiltonian."""
    if model.kind != "hamiltonian":
        return
    H = load_hamiltonian(model)
    omega = frequency_from(H)
    for i, (given, actual) in enumerate(zip(model.omega0, omega)):
        if abs(given - actual) > OMEGA_TOL * max(1.0, abs(actual)):
            alpha = [0] * model.d
            alpha[i] = 1
            raise ModelValidationError(
                f"omega0[{i}]={given} disagrees with the coefficient of n=0, alpha={alpha} ({actual})",
                {"field": f"omega0.{i}", "alpha": alpha})


def model_weights(model: ModelFile) -> NormWeights:
    return NormWeights(rho=model.weights.rho, delta=model.weights.delta)


def load_config(path: Optional[Union[str, Path]], cls: Type[C], seed: Optional[int] = None) -> C:
    data = {} if path is None else _read_json(path, ConfigValidationError)
    if seed is not None and "seed" in cls.model_fields:
        data["seed"] = seed
    try:
        return cls(**data)
    except ValidationError as e:
        field = _field_of(e)
        raise ConfigValidationError(f"invalid config field {field}: {e.errors()[0]['msg']}", {"field": field})


def require_seed(config: BaseModel) -> int:
    seed = getattr(config, "seed", None)
    if seed is None:
        raise ConfigValidationError("this command is stochastic and needs a seed (--seed or config.seed)",
                                    {"field": "seed"})
    return int(seed)