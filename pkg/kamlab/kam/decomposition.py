"""
Centered Decomposition
Split K = a + <omega + B, r - c> + 1/2 <r - c, F (r - c)> + G by degree in r - c
"""
import logging
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from kamlab.kam.mollifier import MollifierSpec
from kamlab.kam.operators import solve_L
from kamlab.series import CenteredSeries, FourierTaylorSeries, NormWeights, vector_norm

logger = logging.getLogger(__name__)

Series = Union[FourierTaylorSeries, CenteredSeries]


def _rho_part(s: Series, lo: int, hi: Optional[int] = None) -> Series:
    """Projection by degree in r - c; for plain series the variables already are r - c."""
    if isinstance(s, CenteredSeries):
        return s.action_degree_part(lo, hi)
    return s.degree_part(lo, s.degree_cutoff if hi is None else hi)


class Decomposition(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    a: Series
    B: List[Series]
    F: List[List[Series]]
    G: Series
    omega: List[float]

    @property
    def dim(self) -> int:
        return len(self.omega)

    def recompose(self) -> Series:
        d = self.dim
        out = self.a + self.G
        for k in range(d):
            out = out + (self.B[k] + self.omega[k]).times_variable(k)
        for i in range(d):
            for k in range(d):
                out = out + self.F[i][k].times_variable(i).times_variable(k).scale(0.5)
        return out

    def F_times_gradient(self, u: Series) -> List[Series]:
        """(F d_phi u)_i = sum_j F_ij d_j u."""
        grads = [u.d_angle(j) for j in range(self.dim)]
        out = []
        for i in range(self.dim):
            acc = self.a.zeros_like()
            for j in range(self.dim):
                acc = acc + self.F[i][j].mul(grads[j])
            out.append(acc)
        return out

    def hessian_block(self) -> List[List[Series]]:
        return self.F


def decompose(K: Series, omega: Sequence[float]) -> Decomposition:
    """Exact split of K by degree in r - c relative to the linear part <omega, r - c>."""
    d = len(omega)
    a = _rho_part(K, 0, 0)
    grads = [K.d_action(k) for k in range(d)]
    B = [_rho_part(grads[k], 0, 0) - float(omega[k]) for k in range(d)]
    F = [[_rho_part(grads[i].d_action(k), 0, 0) for k in range(d)] for i in range(d)]
    G = _rho_part(K, 3)
    return Decomposition(a=a, B=B, F=F, G=G, omega=[float(w) for w in omega])


def _scalar_mean(s: Series):
    mean = s.mean_value()
    if isinstance(s, CenteredSeries) or s.degree_cutoff and np.any(mean.coef[..., 1:]):
        return mean
    return complex(mean.coef[(s.fourier_cutoff,) * s.dim + (0,)]).real


def mean_defect(dec: Decomposition, kappa: float, tau: float, l: Optional[MollifierSpec] = None):
    """M(B - F d_phi L a); a vector of numbers when c is numeric, of series in c otherwise."""
    La = solve_L(dec.a, dec.omega, kappa, tau, l)
    correction = dec.F_times_gradient(La)
    values = [_scalar_mean(dec.B[i] - correction[i]) for i in range(dec.dim)]
    if all(isinstance(v, float) for v in values):
        return np.array(values)
    return values


def pseudo_norm(dec: Decomposition, kappa: float, tau: float, weights: NormWeights,
                l: Optional[MollifierSpec] = None) -> float:
    """max(|a - M a|, |B|, |d_phi L a|, |d_phi L B|) in the majorant norm."""
    osc = dec.a.oscillating_part()
    La = solve_L(dec.a, dec.omega, kappa, tau, l)
    parts = [
        osc.majorant_norm(weights),
        vector_norm(dec.B, weights),
        vector_norm(La.angle_gradient(), weights),
    ]
    for b in dec.B:
        parts.append(vector_norm(solve_L(b, dec.omega, kappa, tau, l).angle_gradient(), weights))
    return max(parts)
