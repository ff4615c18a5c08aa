"""
Liouville Truncation Pipeline
Finite-order normal forms of Fourier-truncated Hamiltonians for Liouville base frequencies
"""
import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from kamlab.arithmetic.diophantine import small_divisor_min
from kamlab.errors import ModelValidationError, ResonanceError
from kamlab.normal_forms.birkhoff import CenteredNormalForm, NormalForm, birkhoff_normal_form, frequency_from
from kamlab.normal_forms.diagnostics import diophantine_density, mean_hessian
from kamlab.schemas.arithmetic import DiophantineParams
from kamlab.series import FourierTaylorSeries, NormWeights

logger = logging.getLogger(__name__)


class LiouvilleTruncation(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    normal_form: NormalForm
    truncated: FourierTaylorSeries
    F: FourierTaylorSeries
    K: int
    min_divisor: float
    divisor_witness: List[int]
    remainder_norm: float
    remainder_bound: float
    hessian_gap: float


class KolmogorovBall(BaseModel):
    radius: float
    kappa: float
    tau: float
    delta_n: Optional[float] = None
    certified_fraction: float
    half_width: float
    samples: int


def liouville_truncated_bnf(H: FourierTaylorSeries, Q_n: int, gamma: float, q: int,
                            weights: Optional[NormWeights] = None,
                            rho_prime: Optional[float] = None) -> LiouvilleTruncation:
    """Normal form of order q for the |n|_inf <= Q_n / q truncation of H.

    The remainder norm is measured at the narrower strip rho_prime (default rho / 2).
    """
    weights = weights or NormWeights(rho=0.1, delta=1.0)
    rho_prime = weights.rho / 2 if rho_prime is None else rho_prime
    if not 0 < rho_prime <= weights.rho:
        raise ModelValidationError("rho_prime must lie in (0, rho]")
    omega0 = frequency_from(H)
    smallest = small_divisor_min(omega0, Q_n)
    if smallest.value <= Q_n ** (-gamma):
        logger.error(f"divisor guard violated: {smallest.value:.3e} at k={smallest.k}")
        raise ResonanceError(
            f"min small divisor {smallest.value:.3e} up to Q_n={Q_n} is below Q_n^-gamma={Q_n ** (-gamma):.3e}",
            smallest.k, smallest.value)
    K = Q_n // q
    if K < 1:
        raise ModelValidationError(f"Q_n={Q_n} is smaller than the order q={q}")

    truncated = H.truncate_fourier(K)
    nf = birkhoff_normal_form(truncated, q, weights=weights, fourier_cutoff=max(K * (q - 1), H.fourier_cutoff))
    discarded = H - truncated
    remainder = discarded.majorant_norm(NormWeights(rho=rho_prime, delta=weights.delta))
    bound = float(np.exp(-2 * np.pi * K * (weights.rho - rho_prime))) * H.majorant_norm(weights)
    gap = float(np.linalg.norm(nf.hessian(np.zeros(H.dim)) - mean_hessian(H), ord=2))
    logger.info(f"Liouville truncation K={K}: remainder {remainder:.3e}, hessian gap {gap:.3e}")
    return LiouvilleTruncation(normal_form=nf, truncated=truncated, F=nf.tail, K=K, min_divisor=smallest.value,
                               divisor_witness=smallest.k, remainder_norm=remainder, remainder_bound=bound,
                               hessian_gap=gap)


def kolmogorov_ball_fraction(frequency, params: DiophantineParams, samples: int, seed: int,
                             radius: Optional[float] = None, Q_n: Optional[int] = None,
                             gamma: Optional[float] = None, q: Optional[int] = None,
                             dim: Optional[int] = None, workers: Optional[int] = None) -> KolmogorovBall:
    """Fraction of actions c in a ball whose frequency passes the finite Diophantine check.

    With Q_n, gamma and q given, delta_n = Q_n^(-gamma q^2) sets the default radius and
    kappa_n = delta_n^2 replaces params.kappa.
    """
    delta_n = float(Q_n) ** (-gamma * q * q) if None not in (Q_n, gamma, q) else None
    if delta_n is not None:
        params = DiophantineParams(kappa=max(delta_n ** 2, 1e-300), tau=params.tau, N_check=params.N_check)
        radius = delta_n if radius is None else radius
    if radius is None:
        raise ModelValidationError("a ball radius or (Q_n, gamma, q) is required")

    if isinstance(frequency, NormalForm):
        dim = len(frequency.omega0)
        freq = frequency.gradient
    elif isinstance(frequency, CenteredNormalForm):
        dim = len(frequency.omega0)
        freq = frequency.frequency
    else:
        freq = frequency
    if dim is None:
        raise ModelValidationError("the action dimension is required for a callable frequency map")

    estimate = diophantine_density(freq, radius, params, samples, seed, dim=dim, workers=workers)
    return KolmogorovBall(radius=radius, kappa=params.kappa, tau=params.tau, delta_n=delta_n,
                          certified_fraction=1.0 - estimate.fraction, half_width=estimate.half_width,
                          samples=samples)
