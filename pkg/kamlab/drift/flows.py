"""
Exact Flows and Diffusion Experiments
Flows of H_0 o V as V^-1 o (integrable flow) o V, excursion verdicts and staged kick schedules
"""
import logging
from math import log10
from typing import List, Optional, Sequence

import numpy as np
from mpmath import mp, mpf
from pydantic import BaseModel, Field
from scipy.integrate import solve_ivp

from kamlab.config import settings
from kamlab.drift.kicks import Kick, build_kick, combined_norm
from kamlab.drift.model import SLOW, DriftModel
from kamlab.errors import BudgetExhaustedError, ConfigValidationError, IntegrationError

logger = logging.getLogger(__name__)


def _conjugate(kicks: Sequence[Kick], states: np.ndarray) -> np.ndarray:
    """V = U_1 o ... o U_m."""
    for kick in reversed(kicks):
        states = kick.apply(states)
    return states


def _unconjugate(kicks: Sequence[Kick], states: np.ndarray) -> np.ndarray:
    for kick in kicks:
        states = kick.inverse(states)
    return states


def _precision(model: DriftModel, t: float) -> int:
    longest = max((len(p.exact) for p in model.bumps.plateaus), default=0)
    return max(30, longest + 20, int(log10(abs(t) + 1.0)) + 40)


def integrable_flow(model: DriftModel, state: np.ndarray, t: float) -> np.ndarray:
    """phi + t d_r H_0(r) reduced mod 1 in extended precision; r is constant."""
    d = model.dim
    r = state[d:]
    grad = model.gradient(r)
    out = state.copy()
    with mp.workdps(_precision(model, t)):
        for i in range(d):
            freq = model.exact_frequency(i + 1, float(r[SLOW]))
            freq = mpf(float(grad[i])) if freq is None else freq
            out[i] = float(mp.frac(mpf(float(state[i])) + mpf(t) * freq))
    return out


def exact_flow(model: DriftModel, kicks: Sequence[Kick], state, t: float) -> np.ndarray:
    """Flow of H_0 o U_1 o ... o U_m at time t; angles come back in [0, 1)."""
    state = np.asarray(state, dtype=float)
    if state.shape != (2 * model.dim,):
        raise ConfigValidationError(f"state has shape {state.shape}, expected ({2 * model.dim},)")
    y = _conjugate(kicks, state[None, :])[0]
    y = integrable_flow(model, y, t)
    return _unconjugate(kicks, y[None, :])[0]


def energy(model: DriftModel, kicks: Sequence[Kick], states) -> np.ndarray:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    image = _conjugate(kicks, states)
    return model.energy(image[:, model.dim:])


class OrbitTrace(BaseModel):
    times: List[float]
    phi: List[List[float]]
    r: List[List[float]]
    running_max: List[List[float]]  # max |r_i| over the samples up to t_j, forward from 0 and backward from 0
    energy: List[float]

    def rows(self) -> List[List[float]]:
        return [[t] + p + r + [h] for t, p, r, h in zip(self.times, self.phi, self.r, self.energy)]


class DiffusionVerdict(BaseModel):
    i1: Optional[int] = None
    i2: Optional[int] = None
    A: float
    T: float
    dt: float
    sup_forward: float
    sup_backward: float
    t_hit: Optional[float] = None
    forward: bool
    backward: bool
    r4_drift: float
    energy_drift: float


class DiffusionResult(BaseModel):
    trace: OrbitTrace
    verdict: DiffusionVerdict


def _active_kick(kicks: Sequence[Kick], x: float) -> Optional[Kick]:
    for kick in kicks:
        if float(kick.profile(x)) == 1.0:
            return kick
    return None


def minimal_time(kick: Kick) -> float:
    """One full period of the slow phase: T = 1 / |q1 F_i1 + q2 F_i2|."""
    with mp.workdps(40):
        return float(1 / abs(mpf(kick.resonance)))


def _running_max(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    forward = times >= 0
    out[forward] = np.maximum.accumulate(values[forward], axis=0)
    backward = np.flatnonzero(~forward)[::-1]
    if backward.size:
        out[backward] = np.maximum.accumulate(values[backward], axis=0)
    return out


def diffusion_experiment(model: DriftModel, kicks: Sequence[Kick], state, A: float, T: Optional[float] = None,
                         dt: Optional[float] = None, samples: int = 2001) -> DiffusionResult:
    """Sample the exact orbit on [-T, T]; forward excursion in r_i1, backward in r_i2."""
    state = np.asarray(state, dtype=float)
    d = model.dim
    x = float(state[d + SLOW])
    kick = _active_kick(kicks, x)
    if T is None:
        if kick is None:
            raise ConfigValidationError("T is required when no kick is active at the initial point")
        T = minimal_time(kick)
    if T <= 0:
        raise ConfigValidationError("T must be positive")
    if dt is None:
        dt = 2 * T / (samples - 1)
        count = samples
    else:
        count = int(np.floor(2 * T / dt + 1e-9)) + 1
    if count > settings.MAX_ORBIT_SAMPLES:
        raise BudgetExhaustedError(f"{count} orbit samples exceed the budget", {"limit": settings.MAX_ORBIT_SAMPLES})
    times = -T + dt * np.arange(count)

    states = np.array([exact_flow(model, kicks, state, float(t)) for t in times])
    energies = energy(model, kicks, states)
    r = states[:, d:]
    running = _running_max(np.abs(r), times)
    trace = OrbitTrace(times=times.tolist(), phi=states[:, :d].tolist(), r=r.tolist(),
                       running_max=running.tolist(), energy=energies.tolist())

    i1, i2 = (kick.coords if kick is not None else (None, None))
    forward, backward = times > 0, times < 0
    sup_f = float(np.max(np.abs(r[forward, i1 - 1]))) if i1 and forward.any() else 0.0
    sup_b = float(np.max(np.abs(r[backward, i2 - 1]))) if i2 and backward.any() else 0.0
    t_hit = None
    if i1:
        hits = np.flatnonzero(forward & (np.abs(r[:, i1 - 1]) > A))
        t_hit = float(times[hits[0]]) if hits.size else None
    scale = max(1.0, float(np.max(np.abs(energies))))
    verdict = DiffusionVerdict(i1=i1, i2=i2, A=A, T=T, dt=dt, sup_forward=sup_f, sup_backward=sup_b, t_hit=t_hit,
                               forward=sup_f > A, backward=sup_b > A,
                               r4_drift=float(np.max(np.abs(r[:, SLOW] - state[d + SLOW]))),
                               energy_drift=float(np.max(np.abs(energies - energies[0]))) / scale)
    logger.info(f"diffusion experiment: sup_forward={sup_f:.3e}, sup_backward={sup_b:.3e}, T={T:.3e}")
    return DiffusionResult(trace=trace, verdict=verdict)


# --- staged schedules ----------------------------------------------------

class Stage(BaseModel):
    eps: float = Field(..., gt=0)
    A: float = Field(..., gt=0)
    interval: int
    delta: float = Field(default=1.0, gt=0)


class StageReport(BaseModel):
    interval: int
    q: List[int]
    norm: float
    eps: float
    verdict: DiffusionVerdict


class ScheduleReport(BaseModel):
    kicks: List[Kick]
    stages: List[StageReport]
    cumulative_bound: float  # sum of the per-kick norms
    measured_norm: float
    budget: float


def launch_state(model: DriftModel, kick: Kick, delta: float, seed: int) -> np.ndarray:
    """A point with r_4 in the middle of the kick's inner interval and the other actions within delta."""
    rng = np.random.default_rng(seed)
    d = model.dim
    state = np.zeros(2 * d)
    state[:d] = rng.random(d)
    state[d:] = rng.uniform(-1.0, 1.0, d) * delta / (2 * np.sqrt(d))
    state[d + SLOW] = 0.5 * sum(kick.inner)
    return state


def gdelta_schedule(model: DriftModel, stages: Sequence[Stage], s: int, seed: int = 0,
                    samples: int = 2001) -> ScheduleReport:
    """One kick per stage on pairwise separated intervals; the summed perturbation is measured and bounded by the sum of norms."""
    intervals = [st.interval for st in stages]
    for i, m in enumerate(intervals):
        for other in intervals[i + 1:]:
            if abs(m - other) < 2:
                raise ConfigValidationError(f"stage intervals {m} and {other} overlap")
    kicks = [build_kick(model, st.interval, st.A, st.delta, s, st.eps) for st in stages]
    reports = []
    for k, (st, kick) in enumerate(zip(stages, kicks)):
        state = launch_state(model, kick, st.delta, seed + k)
        verdict = diffusion_experiment(model, kicks, state, st.A, samples=samples).verdict
        reports.append(StageReport(interval=st.interval, q=kick.q, norm=kick.norm, eps=st.eps, verdict=verdict))
    bound = float(sum(kick.norm for kick in kicks))
    measured = combined_norm(kicks, s)
    logger.info(f"schedule of {len(kicks)} stages, measured norm {measured:.3e} against bound {bound:.3e}")
    return ScheduleReport(kicks=kicks, stages=reports, cumulative_bound=bound, measured_norm=measured,
                          budget=float(sum(st.eps for st in stages)))


# --- numerical cross-check -----------------------------------------------

def _hamiltonian_field(model: DriftModel, kicks: Sequence[Kick]):
    d = model.dim

    def field(t, y):
        point = y
        jac = np.eye(2 * d)
        for kick in reversed(kicks):
            jac = kick.jacobian(point) @ jac
            point = kick.apply(point[None, :])[0]
        grad = np.concatenate([np.zeros(d), model.gradient(point[d:])])
        dH = jac.T @ grad
        return np.concatenate([dH[d:], -dH[:d]])

    return field


def integrate_check(model: DriftModel, kicks: Sequence[Kick], state, T: float, dt: float) -> float:
    """Max deviation between the exact flow and DOP853 on the kicked Hamiltonian over [0, T]."""
    state = np.asarray(state, dtype=float)
    d = model.dim
    times = np.arange(0.0, T + 0.5 * dt, dt)
    sol = solve_ivp(_hamiltonian_field(model, kicks), (0.0, times[-1]), state, method="DOP853", t_eval=times,
                    rtol=1e-12, atol=1e-12)
    if not sol.success:
        logger.error(f"cross-check integration failed: {sol.message}")
        raise IntegrationError(f"DOP853 failed: {sol.message}")
    worst = 0.0
    for j, t in enumerate(sol.t):
        exact = exact_flow(model, kicks, state, float(t))
        gap_phi = (sol.y[:d, j] - exact[:d] + 0.5) % 1.0 - 0.5
        gap_r = sol.y[d:, j] - exact[d:]
        worst = max(worst, float(np.max(np.abs(np.concatenate([gap_phi, gap_r])))))
    return worst
