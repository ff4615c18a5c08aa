"""
Preset Library
Named test models: integrable, perturbed, degenerate, Russmann-type, Liouville and drift presets
"""
import logging
from typing import Any, Callable, Dict, Optional

import numpy as np

from kamlab.arithmetic.liouville import build_liouville_pair
from kamlab.errors import ModelValidationError
from kamlab.normal_forms.diagnostics import russmann_primitive
from kamlab.schemas.arithmetic import LiouvilleSchedule
from kamlab.schemas.model import ModelFile
from kamlab.schemas.run import DiffusionConfig
from kamlab.series import FourierTaylorSeries

logger = logging.getLogger(__name__)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _quadratic(omega0, hessian, N: int, q: int) -> FourierTaylorSeries:
    d = len(omega0)
    H = FourierTaylorSeries.linear(omega0, N, q)
    coeffs = {}
    for i in range(d):
        for k in range(i, d):
            value = hessian[i][k] * (0.5 if i == k else 1.0)
            if value:
                alpha = [0] * d
                alpha[i] += 1
                alpha[k] += 1
                coeffs[tuple(alpha)] = value
    return H + FourierTaylorSeries.polynomial(d, q, coeffs, N)


def integrable_golden(N: int = 2, q: int = 4) -> FourierTaylorSeries:
    """<(1, g), r> + |r|^2 / 2."""
    return _quadratic([1.0, GOLDEN], np.eye(2), N, q)


def perturbed_golden(eps: float = 1e-3, N: int = 2, q: int = 4) -> FourierTaylorSeries:
    """Integrable golden model plus eps cos(2 pi (phi_1 + phi_2)) r_1^2 + eps cos(2 pi phi_1) r_1 r_2."""
    H = integrable_golden(N, q)
    H = H + FourierTaylorSeries.cosine([1, 1], [2, 0], eps, N, q)
    return H + FourierTaylorSeries.cosine([1, 0], [1, 1], eps, N, q)


def degenerate_j1(eps: float = 1e-3, N: int = 2, q: int = 4) -> FourierTaylorSeries:
    """Everything beyond the linear part depends on r_1 only, so e_2 is a degenerate direction."""
    H = _quadratic([1.0, GOLDEN], [[1.0, 0.0], [0.0, 0.0]], N, q)
    return H + FourierTaylorSeries.cosine([1, 1], [2, 0], eps, N, q)


def russmann_type(mu=(1.0, 1.0, 0.5), N: int = 0, q: int = 4) -> FourierTaylorSeries:
    """Integrable H whose gradient is mu(<r, omega0>) omega0."""
    return russmann_primitive(list(mu), [1.0, GOLDEN], q, N)


def liouville_kolmogorov(eps: float = 1e-4, N: int = 3, q: int = 4, exponents=(3.0, 6.0)) -> FourierTaylorSeries:
    """Quadratic nondegenerate model with a Liouville base frequency and a small harmonic perturbation."""
    vector = build_liouville_pair(LiouvilleSchedule(exponents=list(exponents), base="1", anchor=repr(GOLDEN),
                                                    start_digits=2))
    H = _quadratic(vector.omega, np.eye(2), N, q)
    return H + FourierTaylorSeries.cosine([1, 1], [2, 0], eps, N, q)


HAMILTONIANS: Dict[str, Callable[..., FourierTaylorSeries]] = {
    "integrable-golden": integrable_golden,
    "perturbed-golden": perturbed_golden,
    "degenerate-j1": degenerate_j1,
    "russmann-type": russmann_type,
    "liouville-kolmogorov": liouville_kolmogorov,
}

PRESET_NAMES = sorted(list(HAMILTONIANS) + ["drift-d4"])


def preset_hamiltonian(name: str, parameters: Optional[Dict[str, Any]] = None) -> FourierTaylorSeries:
    if name not in HAMILTONIANS:
        raise ModelValidationError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}",
                                   {"field": "preset"})
    try:
        return HAMILTONIANS[name](**(parameters or {}))
    except TypeError as e:
        logger.error(f"bad parameters for preset {name}: {e}")
        raise ModelValidationError(f"invalid parameters for preset {name!r}: {e}", {"field": "parameters"})


def preset_model(name: str, parameters: Optional[Dict[str, Any]] = None) -> ModelFile:
    """A fully materialized model file for a preset."""
    if name == "drift-d4":
        config = DiffusionConfig(**(parameters or {}))
        return ModelFile(kind="drift", d=len(config.omega0), omega0=config.omega0, preset=name,
                         parameters=config.model_dump())
    H = preset_hamiltonian(name, parameters)
    low = H.degree_part(1).mean_value()
    center = (H.fourier_cutoff,) * H.dim
    omega0 = []
    for i in range(H.dim):
        e = [0] * H.dim
        e[i] = 1
        omega0.append(float(low.coef[center + (H.basis.index[tuple(e)],)].real))
    return ModelFile(d=H.dim, omega0=omega0, hamiltonian=H.to_payload(), preset=name,
                     parameters=dict(parameters or {}), N=H.fourier_cutoff, q=H.degree_cutoff)
