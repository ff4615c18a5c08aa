"""
Drift Hamiltonian
H_0(phi, r) = <omega0, r> + f_1(r_4) r_1 + f_2(r_4) r_2 + f_3(r_4) r_3
"""
import logging
from typing import List, Optional, Sequence

import numpy as np
from mpmath import mpf
from pydantic import BaseModel

from kamlab.arithmetic.liouville import decimal_string, parse_decimal
from kamlab.drift.bumps import BumpFunctions
from kamlab.errors import ModelValidationError

logger = logging.getLogger(__name__)

SLOW = 3  # r_4 drives the bumps


class DriftModel(BaseModel):
    omega0: List[float]
    bumps: BumpFunctions

    @property
    def dim(self) -> int:
        return len(self.omega0)

    def energy(self, r) -> np.ndarray:
        r = np.atleast_2d(np.asarray(r, dtype=float))
        out = r @ np.asarray(self.omega0)
        for i in (1, 2, 3):
            out = out + self.bumps.f(i, r[:, SLOW]) * r[:, i - 1]
        return out

    def gradient(self, r) -> np.ndarray:
        """d_r H_0; d_phi H_0 vanishes identically."""
        r = np.asarray(r, dtype=float)
        x = r[SLOW]
        grad = np.array(self.omega0, dtype=float)
        for i in (1, 2, 3):
            grad[i - 1] += float(self.bumps.f(i, x))
            grad[SLOW] += float(self.bumps.df(i, x)) * r[i - 1]
        return grad

    def exact_frequency(self, i: int, x: float) -> Optional[mpf]:
        """omega_i + fbar as an exact decimal when r_4 = x sits on a plateau of f_i."""
        if i not in (1, 2, 3):
            return None
        p = self.bumps.plateau_at(i, x)
        return None if p is None else mpf(p.exact)

    def exact_omega(self, i: int) -> mpf:
        num, scale = parse_decimal(self.omega0[i])
        return mpf(decimal_string(num, scale))


def assemble_H0(bumps: BumpFunctions, omega0: Sequence[float]) -> DriftModel:
    if len(omega0) < 4:
        raise ModelValidationError("the drift model needs d >= 4")
    if any(abs(a - b) > 0 for a, b in zip(omega0[:3], bumps.omega)):
        raise ModelValidationError("omega0 disagrees with the frequencies the bumps were built for")
    logger.info(f"drift model assembled in d={len(omega0)}")
    return DriftModel(omega0=[float(w) for w in omega0], bumps=bumps)
