"""
Frequency Map and Tori
Newton solve of Omega + Lambda(c, Omega) = 0, torus extraction with flow verification and degenerate-family scans
"""
import logging
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import solve_ivp

from kamlab.arithmetic.diophantine import is_diophantine_up_to
from kamlab.config import settings
from kamlab.errors import (
    BudgetExhaustedError,
    IntegrationError,
    KamlabError,
    ModelValidationError,
    NewtonStagnationError,
    ResonanceError,
)
from kamlab.kam.iteration import CounterTermResult, kam_iterate
from kamlab.kam.mollifier import MollifierSpec
from kamlab.normal_forms.birkhoff import birkhoff_normal_form, frequency_from
from kamlab.normal_forms.diagnostics import DegeneracyReport
from kamlab.schemas.arithmetic import DiophantineParams, DiophantineVerdict
from kamlab.series import FourierTaylorSeries, NormWeights
from kamlab.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10


class IterateConfig(BaseModel):
    """Parameters shared by every kam_iterate call of a solve."""
    kappa: float = Field(..., gt=0)
    tau: float = Field(..., gt=0)
    h: float = Field(..., gt=0)
    n_max: int = Field(8, ge=0)
    tol: float = Field(1e-12, gt=0)
    weights: NormWeights = NormWeights(rho=0.1, delta=1.0)
    q: int = Field(3, ge=1)
    fourier_cutoff: Optional[int] = Field(None, ge=0)


class FrequencySolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    c: List[float]
    Omega: List[float]
    seed: List[float]
    residual: float
    newton_steps: int
    result: CounterTermResult


def _counter_terms(H: FourierTaylorSeries, c: Sequence[float], omega: Sequence[float], config: IterateConfig,
                   l: Optional[MollifierSpec]) -> CounterTermResult:
    return kam_iterate(H, omega, c, config.kappa, config.tau, config.h, config.n_max, config.tol,
                       config.weights, l, config.fourier_cutoff)


def frequency_map_solve(H: FourierTaylorSeries, c: Sequence[float], config: IterateConfig,
                        l: Optional[MollifierSpec] = None, workers: Optional[int] = None) -> FrequencySolution:
    """Omega(c) by Newton iteration seeded at the normal-form frequency d_r N^q(c)."""
    c = np.asarray(c, dtype=float)
    if c.shape != (H.dim,):
        raise ModelValidationError(f"action point has shape {c.shape}, expected ({H.dim},)")
    if np.any(c):
        seed = birkhoff_normal_form(H, config.q).gradient(c)
    else:
        seed = frequency_from(H)
    omega = seed.copy()
    d = H.dim
    step = settings.FD_STEP

    def residual_at(w):
        result = _counter_terms(H, c, w, config, l)
        return result, result.frequency_residual()

    result, R = residual_at(omega)
    for n in range(settings.NEWTON_MAX_ITER + 1):
        size = float(np.linalg.norm(R, np.inf))
        logger.debug(f"frequency Newton {n}: |Omega + Lambda| = {size:.3e}")
        if size <= NEWTON_TOL:
            logger.info(f"frequency map solved at c={c.tolist()} in {n} Newton steps")
            return FrequencySolution(c=c.tolist(), Omega=omega.tolist(), seed=seed.tolist(), residual=size,
                                     newton_steps=n, result=result)
        if n == settings.NEWTON_MAX_ITER:
            break
        shifted = [omega + step * np.eye(d)[k] for k in range(d)]
        columns = parallel_map(lambda w: residual_at(w)[1], shifted, workers)
        J = np.stack([(col - R) / step for col in columns], axis=1)
        omega = omega - np.linalg.solve(J, R)
        result, R = residual_at(omega)

    logger.error(f"frequency Newton stagnated at |R| = {float(np.linalg.norm(R, np.inf)):.3e}")
    raise NewtonStagnationError(f"Newton did not reach {NEWTON_TOL} in {settings.NEWTON_MAX_ITER} steps",
                                {"residual": float(np.linalg.norm(R, np.inf)), "c": c.tolist()})


def counterterm_frequency(H: FourierTaylorSeries, config: IterateConfig,
                          l: Optional[MollifierSpec] = None) -> Callable[[np.ndarray], np.ndarray]:
    """c -> Omega(c) from the counter-term solve, usable wherever a normal-form gradient is."""
    return lambda c: np.asarray(frequency_map_solve(H, c, config, l, workers=1).Omega)


# --- torus verification --------------------------------------------------

class HamiltonianField:
    """Vectorized (d_r H, -d_phi H) from the live modes of H."""

    def __init__(self, H: FourierTaylorSeries):
        self.H = H
        self.dim = H.dim
        comps = [H.d_action(i) for i in range(H.dim)] + [-H.d_angle(i) for i in range(H.dim)]
        stack = np.stack([s.coef.reshape(-1, len(H.basis)) for s in comps + [H]], axis=0)
        live = np.any(stack != 0, axis=(0, 2))
        self.modes = H.modes().reshape(-1, H.dim).astype(float)[live]
        self.coef = stack[:, live, :]

    def _values(self, phi: np.ndarray, r: np.ndarray) -> np.ndarray:
        phase = np.exp(2j * np.pi * (self.modes @ phi))
        powers = self.H.basis.powers(r[None, :])[0]
        return (np.einsum("m,cmk,k->c", phase, self.coef, powers)).real

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        return self._values(y[:self.dim], y[self.dim:])[:-1]

    def energy(self, phi: np.ndarray, r: np.ndarray) -> float:
        return float(self._values(phi, r)[-1])


class TorusReport(BaseModel):
    c: List[float]
    Omega: List[float]
    Gamma: float
    T: float
    dt: float
    samples: int
    max_deviation: float
    rotation_vector: List[float]
    rotation_error: float
    energy_drift: float
    jacobian_defect: float
    ledger_norm: float
    tolerance: float
    passed: bool
    diophantine: DiophantineVerdict
    orbit: List[List[float]] = Field(default_factory=list)


def _wrap(x: np.ndarray) -> np.ndarray:
    return (x + 0.5) % 1.0 - 0.5


def torus_extract_and_verify(H: FourierTaylorSeries, solution: FrequencySolution, params: DiophantineParams,
                             T: float, dt: float, samples: int = 10, tol: float = 1e-6, seed: int = 0,
                             weights: Optional[NormWeights] = None) -> TorusReport:
    """Integrate from points of phi -> W(phi, 0) and compare with the linear flow on the torus.

    Omega(c) must pass the finite Diophantine check of `params` first.
    """
    if T <= 0 or dt <= 0:
        raise ModelValidationError("T and dt must be positive")
    verdict = is_diophantine_up_to(solution.Omega, params)
    if not verdict.diophantine:
        logger.error(f"Omega(c) = {solution.Omega} fails the Diophantine check at k={verdict.witness}")
        raise ResonanceError(f"Omega(c) is not Diophantine up to N_check={params.N_check}", verdict.witness,
                             verdict.value)
    times = np.arange(0.0, T + 0.5 * dt, dt)
    if times.size * samples > settings.MAX_ORBIT_SAMPLES:
        raise BudgetExhaustedError(f"{times.size * samples} orbit samples exceed the budget",
                                   {"limit": settings.MAX_ORBIT_SAMPLES})
    result = solution.result
    d = H.dim
    c = np.asarray(solution.c)
    Omega = np.asarray(solution.Omega)
    weights = weights or NormWeights(rho=0.1, delta=1.0)
    ledger_norm = result.ledger.degree_part(0, 1).majorant_norm(weights)
    field = HamiltonianField(H)

    rng = np.random.default_rng(seed)
    theta0 = rng.random((samples, d))
    deviation, energy_drift = 0.0, 0.0
    rotations = []
    orbit_rows: List[List[float]] = []
    for p in range(samples):
        angles, rho = result.W.apply(theta0[p], np.zeros(d))
        y0 = np.concatenate([angles[0], c + rho[0]])
        sol = solve_ivp(field, (0.0, times[-1]), y0, method="DOP853", t_eval=times, rtol=1e-12, atol=1e-12)
        if not sol.success or not np.all(np.isfinite(sol.y)):
            logger.error(f"orbit integration failed: {sol.message}")
            raise IntegrationError(f"integration failed from torus point {p}: {sol.message}", {"point": p})
        phi_t, r_t = sol.y[:d].T, sol.y[d:].T
        ref_angles, ref_rho = result.W.apply(theta0[p] + np.outer(sol.t, Omega), np.zeros((sol.t.size, d)))
        gap = np.max(np.abs(np.concatenate([_wrap(phi_t - ref_angles), r_t - (c + ref_rho)], axis=1)))
        deviation = max(deviation, float(gap))
        fit = np.polyfit(sol.t, phi_t, 1) if sol.t.size > 1 else np.zeros((2, d))
        rotations.append(fit[0])
        energies = np.array([field.energy(phi_t[i], r_t[i]) for i in range(sol.t.size)])
        scale = max(1.0, abs(energies[0]))
        energy_drift = max(energy_drift, float(np.max(np.abs(energies - energies[0]))) / scale)
        if p == 0:
            orbit_rows = [[float(t)] + phi_t[i].tolist() + r_t[i].tolist() + [float(energies[i])]
                          for i, t in enumerate(sol.t)]

    rotation = np.mean(rotations, axis=0)
    rotation_error = float(np.max(np.abs(rotation - Omega)))
    phi = rng.random((20, d))
    jacobian_defect = float(np.max(np.abs(result.W.determinant(phi, rng.random((20, d)) * 1e-3) - 1.0)))
    passed = deviation <= tol and ledger_norm <= max(tol, 10 * result.eps)
    if not passed:
        logger.warning(f"torus verification failed: deviation {deviation:.3e}, ledger {ledger_norm:.3e}")
    return TorusReport(c=c.tolist(), Omega=Omega.tolist(), Gamma=result.Gamma, T=float(times[-1]), dt=dt,
                       samples=samples, max_deviation=deviation, rotation_vector=rotation.tolist(),
                       rotation_error=rotation_error, energy_drift=energy_drift, jacobian_defect=jacobian_defect,
                       ledger_norm=ledger_norm, tolerance=tol, passed=passed, diophantine=verdict,
                       orbit=orbit_rows)


# --- degenerate families -------------------------------------------------

class FamilyPoint(BaseModel):
    s: List[float]
    c: List[float]
    Omega: Optional[List[float]] = None
    deviation: Optional[float] = None
    angle: Optional[float] = None
    mu: Optional[float] = None
    error: Optional[str] = None


class FamilyScan(BaseModel):
    mode: str
    points: List[FamilyPoint]
    slope: Optional[float] = None
    mu_fit: Optional[List[float]] = None


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    # atan2 of the wedge norm stays accurate for nearly parallel vectors
    wedge = np.linalg.norm(np.outer(u, v) - np.outer(v, u)) / np.sqrt(2.0)
    return float(np.arctan2(wedge, np.dot(u, v)))


def degenerate_family(H: FourierTaylorSeries, report: DegeneracyReport, s_grid: Sequence[Union[float, Sequence[float]]],
                      config: IterateConfig, l: Optional[MollifierSpec] = None,
                      workers: Optional[int] = None) -> FamilyScan:
    """Solve the frequency map along c = <s, gamma>, or along omega0 in the Russmann case."""
    if report.j < 1:
        raise ModelValidationError("degenerate family scans need a degeneracy index j >= 1")
    omega0 = frequency_from(H)
    russmann = report.mu is not None
    gamma = np.asarray(report.gamma, dtype=float)

    def point_for(s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if russmann:
            return s[0] * omega0 / np.linalg.norm(omega0)
        if s.size == 1:
            return s[0] * gamma[0]
        if s.size != report.j:
            raise ModelValidationError(f"grid point has {s.size} coordinates, expected {report.j}")
        return s @ gamma

    def solve(s) -> FamilyPoint:
        c = point_for(s)
        record = FamilyPoint(s=np.atleast_1d(np.asarray(s, dtype=float)).tolist(), c=c.tolist())
        try:
            Omega = np.asarray(frequency_map_solve(H, c, config, l, workers=1).Omega)
        except KamlabError as e:
            logger.warning(f"family point s={record.s} failed: {e.detail}")
            record.error = f"{type(e).__name__}: {e.detail}"
            return record
        record.Omega = Omega.tolist()
        record.deviation = float(np.linalg.norm(Omega - omega0))
        record.angle = _angle_between(Omega, omega0)
        record.mu = float(np.dot(Omega, omega0) / np.dot(omega0, omega0))
        return record

    points = parallel_map(solve, list(s_grid), workers)
    good = [p for p in points if p.error is None]
    scan = FamilyScan(mode="russmann" if russmann else "degenerate", points=points)
    if len(good) >= 2:
        if russmann:
            t = np.array([np.dot(p.c, omega0) for p in good])
            mu = np.array([p.mu for p in good])
            degree = min(len(report.mu) - 1, len(good) - 1)
            scan.mu_fit = Polynomial.fit(t, mu, degree).convert().coef.tolist()
        else:
            size = np.array([np.linalg.norm(p.s) for p in good])
            dev = np.array([p.deviation for p in good])
            scan.slope = float(np.polyfit(size, dev, 1)[0])
    logger.info(f"{scan.mode} family scan: {len(good)}/{len(points)} points solved")
    return scan
