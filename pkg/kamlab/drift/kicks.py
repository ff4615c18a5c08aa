"""
Resonant Kicks
Exact symplectic maps generated by a(r_4) sin(2 pi (q1 psi_i1 + q2 psi_i2)) and their closed-form inverses
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp, mpf
from pydantic import BaseModel

from kamlab.arithmetic.liouville import resonance_pick
from kamlab.drift.model import SLOW, DriftModel
from kamlab.errors import ConstructionError
from kamlab.kam.mollifier import smooth_step, smooth_step_derivative
from kamlab.schemas.arithmetic import ResonancePick
from kamlab.utils.grids import angle_weighted_norm, derivative_sups

logger = logging.getLogger(__name__)


class Kick(BaseModel):
    """U(phi, r) = (psi, s) with generating function <phi, s> - a(s_4) sin(2 pi theta(phi)).

    theta = q1 phi_i1 + q2 phi_i2, s_i = r_i + 2 pi q_i a(r_4) cos(2 pi theta) on the pair and
    psi_4 = phi_4 - a'(r_4) sin(2 pi theta); every other coordinate is kept.
    """
    interval: int
    coords: List[int]  # 1-based action indices (i1, i2)
    q: List[int]
    support: Tuple[float, float]
    inner: Tuple[float, float]
    resonance: str = "0"  # q1 F_i1 + q2 F_i2, exact to the pair's precision
    eta: float = 0.0
    norm: float = 0.0
    pick: Optional[ResonancePick] = None

    def profile(self, x) -> np.ndarray:
        a, b = self.support
        ai, bi = self.inner
        x = np.asarray(x, dtype=float)
        return smooth_step((x - a) / (ai - a)) * smooth_step((b - x) / (b - bi))

    def profile_derivative(self, x) -> np.ndarray:
        a, b = self.support
        ai, bi = self.inner
        x = np.asarray(x, dtype=float)
        left, right = smooth_step((x - a) / (ai - a)), smooth_step((b - x) / (b - bi))
        return (smooth_step_derivative((x - a) / (ai - a)) / (ai - a) * right
                - left * smooth_step_derivative((b - x) / (b - bi)) / (b - bi))

    def _theta(self, states: np.ndarray) -> np.ndarray:
        i1, i2 = self.coords
        return self.q[0] * states[:, i1 - 1] + self.q[1] * states[:, i2 - 1]

    def _move(self, states, sign: float) -> np.ndarray:
        states = np.atleast_2d(np.array(states, dtype=float))
        d = states.shape[1] // 2
        x = states[:, d + SLOW]
        theta = 2 * np.pi * self._theta(states)
        amp = self.profile(x)
        out = states.copy()
        for i, qi in zip(self.coords, self.q):
            out[:, d + i - 1] += sign * 2 * np.pi * qi * amp * np.cos(theta)
        out[:, SLOW] -= sign * self.profile_derivative(x) * np.sin(theta)
        return out

    def apply(self, states) -> np.ndarray:
        return self._move(states, 1.0)

    def inverse(self, states) -> np.ndarray:
        """theta and r_4 are invariant, so the inverse only flips the sign."""
        return self._move(states, -1.0)

    def jacobian(self, state, step: float = 1e-6) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        d = state.size // 2
        M = np.eye(2 * d)
        x = state[d + SLOW]
        theta = 2 * np.pi * float(self._theta(state[None, :])[0])
        amp = float(self.profile(x))
        da = float(self.profile_derivative(x))
        dda = float((self.profile_derivative(x + step) - self.profile_derivative(x - step)) / (2 * step))
        for i, qi in zip(self.coords, self.q):
            for j, qj in zip(self.coords, self.q):
                M[d + i - 1, j - 1] += -(2 * np.pi) ** 2 * qi * qj * amp * np.sin(theta)
            M[d + i - 1, d + SLOW] += 2 * np.pi * qi * da * np.cos(theta)
            M[SLOW, i - 1] += -2 * np.pi * qi * da * np.cos(theta)
        M[SLOW, d + SLOW] += -dda * np.sin(theta)
        return M

    def determinant(self, state) -> float:
        """det of the Jacobian in extended precision; the entries grow like q^2."""
        with mp.workdps(60):
            return float(mp.det(mp.matrix(self.jacobian(state).tolist())))


def determinant_defect(kick: Kick, d: int, samples: int = 20, seed: int = 0) -> float:
    """max |det DU - 1| at random points with r_4 in the kick support."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        state = rng.random(2 * d)
        state[d + SLOW] = rng.uniform(*kick.support)
        worst = max(worst, abs(kick.determinant(state) - 1.0))
    return worst


def profile_sups(kick: Kick, s: int, points: int = 20001) -> List[float]:
    a, b = kick.support
    return derivative_sups(kick.profile, a, b, s, points)


def perturbation_norm(kick: Kick, s: int) -> float:
    """Grid C^s norm of H_0 o U - H_0 = 2 pi a(r_4) (q1 F_i1 + q2 F_i2) cos(2 pi theta)."""
    scale = 2 * np.pi * abs(float(mpf(kick.resonance)))
    return scale * angle_weighted_norm(profile_sups(kick, s), max(abs(q) for q in kick.q), s)


def combined_norm(kicks: Sequence[Kick], s: int, points: int = 20001) -> float:
    """Grid C^s norm of the summed perturbation, measured support by support."""
    out = 0.0
    for kick in kicks:
        a, b = kick.support
        active = [k for k in kicks if k.support[0] < b and a < k.support[1]]

        def amplitude(x, active=active):
            return sum(2 * np.pi * abs(float(mpf(k.resonance))) * k.profile(x) for k in active)

        frequency = max(abs(q) for k in active for q in k.q)
        out = max(out, angle_weighted_norm(derivative_sups(amplitude, a, b, s, points), frequency, s))
    return out


def build_kick(model: DriftModel, interval: int, A: float, delta: float, s: int, eps: float,
               enumeration_limit: int = 100000) -> Kick:
    """Kick on cover interval `interval` moving the actions of its Liouville plateau pair."""
    pair = model.bumps.pair_for(interval)
    cover = model.bumps.cover
    shell = Kick(interval=interval, coords=list(pair.coords), q=[0, 0], support=cover.interval(interval),
                 inner=cover.inner_interval(interval))
    a_norm = max(profile_sups(shell, s))
    eta = eps / ((2 * np.pi) ** (s + 1) * a_norm)
    pick = resonance_pick(pair.vector, A, delta, s, eta, enumeration_limit)
    with mp.workdps(pair.vector.dps):
        F = [mpf(x) for x in pair.vector.exact] if pair.vector.exact else [mpf(x) for x in pair.vector.omega]
        resonance = mp.nstr(pick.k[0] * F[0] + pick.k[1] * F[1], 30)
    kick = shell.model_copy(update={"q": list(pick.k), "resonance": resonance, "eta": eta, "pick": pick})
    norm = perturbation_norm(kick, s)
    if norm >= eps:
        logger.error(f"kick on interval {interval} has grid norm {norm:.3e}")
        raise ConstructionError(f"grid C^{s} norm {norm:.3e} of the kick perturbation is not below {eps}",
                                {"interval": interval, "norm": norm})
    logger.info(f"kick on interval {interval}: q={pick.k}, resonance {resonance}, norm {norm:.3e}")
    return kick.model_copy(update={"norm": norm})
