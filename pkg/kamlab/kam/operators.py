"""
Cut-off and Cohomological Operators
P keeps the near-resonant band of modes, L inverts <omega, d_phi> on the rest
"""
import logging
from typing import Optional, Sequence

import numpy as np

from kamlab.arithmetic.diophantine import normalize_sign
from kamlab.config import settings
from kamlab.errors import ResonanceError
from kamlab.kam.mollifier import DEFAULT_MOLLIFIER, MollifierSpec
from kamlab.series import FourierTaylorSeries

logger = logging.getLogger(__name__)


def _mode_data(f: FourierTaylorSeries, omega: Sequence[float], kappa: float, tau: float,
               l: MollifierSpec):
    modes = f.modes()
    divisor = modes @ np.asarray(omega, dtype=float)
    norms = np.abs(modes).max(axis=-1).astype(float)
    weights = l(divisor * norms ** tau / kappa)
    weights = np.where(norms > 0, weights, 0.0)
    return divisor, norms, weights


def cutoff_P(f: FourierTaylorSeries, omega: Sequence[float], kappa: float, tau: float,
             l: Optional[MollifierSpec] = None) -> FourierTaylorSeries:
    """Multiply the n-th coefficient by l(<n, omega> |n|^tau / kappa); the n = 0 stratum is dropped."""
    _, _, weights = _mode_data(f, omega, kappa, tau, l or DEFAULT_MOLLIFIER)
    return f._like(f.coef * weights[..., None])


def solve_L(f: FourierTaylorSeries, omega: Sequence[float], kappa: float, tau: float,
            l: Optional[MollifierSpec] = None) -> FourierTaylorSeries:
    """u with <omega, d_phi u> = f - P(f) - M(f) and M(u) = 0."""
    divisor, norms, weights = _mode_data(f, omega, kappa, tau, l or DEFAULT_MOLLIFIER)
    live = np.any(f.coef != 0, axis=-1) & (norms > 0) & (weights < 1.0)
    resonant = live & (np.abs(divisor) < settings.DIVISOR_FLOOR * np.maximum(norms, 1.0))
    if resonant.any():
        pos = np.argwhere(resonant)[0]
        n = normalize_sign(f.modes()[tuple(pos)])
        logger.error(f"exact resonance outside the cut region at n={n}")
        raise ResonanceError(f"<n, omega> vanishes at n={list(n)} where the cut-off does not apply", n,
                             float(abs(divisor[tuple(pos)])))
    safe = np.where(live, divisor, 1.0)
    factor = np.where(live, (1.0 - weights) / (2j * np.pi * safe), 0.0)
    return f._like(f.coef * factor[..., None])


def transport(u: FourierTaylorSeries, omega: Sequence[float]) -> FourierTaylorSeries:
    """<omega, d_phi u>."""
    out = u.zeros_like()
    for i, w in enumerate(omega):
        out = out + u.d_angle(i).scale(float(w))
    return out


def cohomology_residual(f: FourierTaylorSeries, u: FourierTaylorSeries, omega: Sequence[float], kappa: float,
                        tau: float, l: Optional[MollifierSpec] = None) -> float:
    """Max coefficient of <omega, d_phi u> - (f - P f - M f)."""
    target = f - cutoff_P(f, omega, kappa, tau, l) - f.mean_value()
    return float(np.max(np.abs((transport(u, omega) - target).coef), initial=0.0))
