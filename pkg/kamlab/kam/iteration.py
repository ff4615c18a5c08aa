"""
Counter-Term Iteration
Counter-term adjustment, the homological KAM step and the iteration with its h_n schedule
"""
import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from kamlab.config import settings
from kamlab.errors import ConfigValidationError, DivergenceError, StepTooLargeError
from kamlab.kam.decomposition import Decomposition, decompose, pseudo_norm
from kamlab.kam.mollifier import MollifierSpec
from kamlab.kam.operators import cutoff_P, solve_L
from kamlab.schemas.reports import ContractionFit, IterationRecord
from kamlab.series import FourierTaylorSeries, NormWeights, compose_shift, invert_near_identity, vector_norm

logger = logging.getLogger(__name__)


def _number(s: FourierTaylorSeries) -> float:
    """Mean of an angle function."""
    return float(s.coef[(s.fourier_cutoff,) * s.dim + (0,)].real)


class ChangeOfVariables(BaseModel):
    """(phi, rho) -> (phi + Phi(phi), rho + R1(phi) + R2(phi) rho), with rho = r - c."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    Phi: List[FourierTaylorSeries]
    R1: List[FourierTaylorSeries]
    R2: List[List[FourierTaylorSeries]]

    @classmethod
    def identity(cls, d: int, fourier_cutoff: int, degree_cutoff: int) -> "ChangeOfVariables":
        zero = FourierTaylorSeries.zeros(d, fourier_cutoff, degree_cutoff)
        return cls(Phi=[zero] * d, R1=[zero] * d, R2=[[zero] * d for _ in range(d)])

    @property
    def dim(self) -> int:
        return len(self.Phi)

    def action_shift(self) -> List[FourierTaylorSeries]:
        out = []
        for i in range(self.dim):
            acc = self.R1[i]
            for k in range(self.dim):
                acc = acc + self.R2[i][k].times_variable(k)
            out.append(acc)
        return out

    def shift(self) -> list:
        return list(self.Phi) + self.action_shift()

    def components(self) -> List[FourierTaylorSeries]:
        return list(self.Phi) + list(self.R1) + [s for row in self.R2 for s in row]

    def is_identity(self, tol: float = 0.0) -> bool:
        return all(s.is_zero(tol) for s in self.components())

    def norm(self, weights: NormWeights) -> float:
        return vector_norm(self.components(), weights)

    def _angle_values(self, series: Sequence[FourierTaylorSeries], phi: np.ndarray) -> np.ndarray:
        zero = np.zeros_like(phi)
        return np.stack([s.evaluate_complex(phi, zero).real for s in series], axis=-1)

    def apply(self, phi, rho):
        """Numeric image (angles, rho) of points of shape (P, d)."""
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        d = self.dim
        R2 = np.stack([self._angle_values(self.R2[i], phi) for i in range(d)], axis=1)
        angles = phi + self._angle_values(self.Phi, phi)
        actions = rho + self._angle_values(self.R1, phi) + np.einsum("pik,pk->pi", R2, rho)
        return angles, actions

    def jacobian(self, phi, rho) -> np.ndarray:
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        d = self.dim
        npts = phi.shape[0]
        out = np.zeros((npts, 2 * d, 2 * d))
        eye = np.eye(d)
        for i in range(d):
            for j in range(d):
                out[:, i, j] = eye[i, j] + self._angle_values([self.Phi[i].d_angle(j)], phi)[:, 0]
                dR = self._angle_values([self.R1[i].d_angle(j)], phi)[:, 0]
                for k in range(d):
                    dR = dR + self._angle_values([self.R2[i][k].d_angle(j)], phi)[:, 0] * rho[:, k]
                out[:, d + i, j] = dR
                out[:, d + i, d + j] = eye[i, j] + self._angle_values([self.R2[i][j]], phi)[:, 0]
        return out

    def symplectic_defect(self, phi, rho) -> float:
        """max |M^T J M - J| over the sample points."""
        M = self.jacobian(phi, rho)
        d = self.dim
        J = np.block([[np.zeros((d, d)), np.eye(d)], [-np.eye(d), np.zeros((d, d))]])
        defect = np.einsum("pji,jk,pkl->pil", M, J, M) - J
        return float(np.max(np.abs(defect)))

    def determinant(self, phi, rho) -> np.ndarray:
        return np.linalg.det(self.jacobian(phi, rho))


def compose_changes(W: ChangeOfVariables, Z: ChangeOfVariables,
                    fourier_cutoff: Optional[int] = None) -> ChangeOfVariables:
    """W o Z in closed form."""
    d = W.dim
    n_ws = fourier_cutoff if fourier_cutoff is not None else W.Phi[0].fourier_cutoff
    if Z.is_identity():
        return W
    if W.is_identity():
        return Z
    angle_shift = list(Z.Phi) + [None] * d

    def moved(s):
        return compose_shift(s, angle_shift, n_ws)

    Phi = [Z.Phi[i] + moved(W.Phi[i]) for i in range(d)]
    R2w = [[moved(W.R2[i][k]) for k in range(d)] for i in range(d)]
    R1 = []
    for i in range(d):
        acc = Z.R1[i] + moved(W.R1[i])
        for k in range(d):
            acc = acc + R2w[i][k].mul(Z.R1[k], n_ws)
        R1.append(acc)
    R2 = []
    for i in range(d):
        row = []
        for k in range(d):
            acc = Z.R2[i][k] + R2w[i][k]
            for m in range(d):
                acc = acc + R2w[i][m].mul(Z.R2[m][k], n_ws)
            row.append(acc)
        R2.append(row)
    return ChangeOfVariables(Phi=Phi, R1=R1, R2=R2)


def counter_term_adjust(dec: Decomposition, W: ChangeOfVariables, kappa: float, tau: float,
                        c: Sequence[float], l: Optional[MollifierSpec] = None):
    """Frequency correction Lambda making M(B - F d_phi L a) vanish; returns (Lambda, adjusted dec)."""
    d = dec.dim
    La = solve_L(dec.a, dec.omega, kappa, tau, l)
    FdLa = dec.F_times_gradient(La)
    FdLR1 = [dec.F_times_gradient(solve_L(W.R1[k], dec.omega, kappa, tau, l)) for k in range(d)]
    X = np.array([[-_number(W.R2[k][i] - FdLR1[k][i]) for k in range(d)] for i in range(d)])
    Y = np.array([_number(FdLa[i] - dec.B[i]) for i in range(d)])
    size = float(np.linalg.norm(X, ord=2))
    if size > 0.5:
        logger.error(f"counter-term Neumann series diverges, |X| = {size:.3e}")
        raise StepTooLargeError(f"|X| = {size:.3e} exceeds 1/2", {"X_norm": size})
    lam = np.linalg.solve(np.eye(d) - X, Y)

    a = dec.a + float(np.dot(lam, c))
    for k in range(d):
        a = a + W.R1[k].scale(lam[k])
    B = []
    for i in range(d):
        acc = dec.B[i] + float(lam[i])
        for k in range(d):
            acc = acc + W.R2[k][i].scale(lam[k])
        B.append(acc)
    return lam, Decomposition(a=a, B=B, F=dec.F, G=dec.G, omega=dec.omega)


class StepResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    Z: ChangeOfVariables
    decomposition: Decomposition
    flat: FourierTaylorSeries
    K: FourierTaylorSeries
    u0: FourierTaylorSeries
    u1: List[FourierTaylorSeries]


def kam_step(dec: Decomposition, kappa: float, tau: float, l: Optional[MollifierSpec] = None,
             fourier_cutoff: Optional[int] = None) -> StepResult:
    """One homological step: u0 = -L(a), u1 = -L(B + F d_psi u0), Z from <psi, r> + u0 + <u1, r - c>."""
    d = dec.dim
    K = dec.recompose()
    n_ws = K.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    omega = dec.omega
    u0 = -solve_L(dec.a, omega, kappa, tau, l)
    Fdu0 = dec.F_times_gradient(u0)
    drift = [dec.B[k] + Fdu0[k] for k in range(d)]
    u1 = [-solve_L(drift[k], omega, kappa, tau, l) for k in range(d)]

    sign = -1.0 if settings.FLAT_SIGN == "minus" else 1.0
    flat = cutoff_P(dec.a, omega, kappa, tau, l)
    for k in range(d):
        band = cutoff_P(dec.B[k] + Fdu0[k].scale(sign), omega, kappa, tau, l)
        flat = flat + band.times_variable(k)

    if u0.is_zero() and all(u.is_zero() for u in u1):
        Z = ChangeOfVariables.identity(d, n_ws, K.degree_cutoff)
        return StepResult(Z=Z, decomposition=decompose(K - flat, omega), flat=flat, K=K - flat, u0=u0, u1=u1)

    angle_map = [u.project(n_ws) for u in u1] + [None] * d
    v = list(invert_near_identity(angle_map, n_ws)[:d])
    angle_shift = v + [None] * d
    R1 = [compose_shift(u0.d_angle(i), angle_shift, n_ws) for i in range(d)]
    R2 = [[compose_shift(u1[k].d_angle(i), angle_shift, n_ws) for k in range(d)] for i in range(d)]
    Z = ChangeOfVariables(Phi=v, R1=R1, R2=R2)

    g_new = compose_shift(flat, angle_shift, n_ws)
    K_new = compose_shift(K, Z.shift(), n_ws) - g_new
    logger.debug(f"KAM step: |u0| coefficients {float(np.abs(u0.coef).max()):.3e}")
    return StepResult(Z=Z, decomposition=decompose(K_new, omega), flat=g_new, K=K_new, u0=u0, u1=u1)


class CounterTermResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    c: List[float]
    omega: List[float]
    Lambda: List[float]
    Gamma: float
    W: ChangeOfVariables
    ledger: FourierTaylorSeries
    decomposition: Decomposition
    trace: List[IterationRecord]
    converged: bool
    eps: float

    def frequency_residual(self) -> np.ndarray:
        """omega + Lambda(c, omega)."""
        return np.asarray(self.omega) + np.asarray(self.Lambda)


def initial_series(H: FourierTaylorSeries, omega: Sequence[float], c: Sequence[float],
                   fourier_cutoff: Optional[int] = None) -> FourierTaylorSeries:
    """H(phi, c + rho) + <omega, c + rho> as a series in (phi, rho)."""
    n_ws = H.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    base = H.project(n_ws).shift_actions(c)
    linear = FourierTaylorSeries.linear(omega, n_ws, H.degree_cutoff)
    return base + linear + float(np.dot(omega, c))


def kam_iterate(H: FourierTaylorSeries, omega: Sequence[float], c: Sequence[float], kappa: float, tau: float,
                h: float, n_max: int, tol: float, weights: NormWeights, l: Optional[MollifierSpec] = None,
                fourier_cutoff: Optional[int] = None) -> CounterTermResult:
    """Alternate counter-term adjustment and KAM steps until the pseudo-norm drops below tol."""
    if not (0 < h < weights.delta and h < weights.rho):
        raise ConfigValidationError(f"schedule width h={h} must be positive and below rho={weights.rho}, delta={weights.delta}")
    d = H.dim
    omega = [float(w) for w in omega]
    c = [float(x) for x in c]
    n_ws = H.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    K = initial_series(H, omega, c, n_ws)
    W = ChangeOfVariables.identity(d, n_ws, H.degree_cutoff)
    ledger = K.zeros_like()
    Lambda = np.zeros(d)
    trace: List[IterationRecord] = []
    nu = 0.0
    converged = False

    for n in range(n_max + 1):
        h_n = h * 2.0 ** (-n - 1)
        shrink = h * (1 - 2.0 ** (-n))
        w_n = weights.shrink(shrink)
        dec = decompose(K, omega)
        step_lambda, dec = counter_term_adjust(dec, W, kappa, tau, c, l)
        Lambda = Lambda + step_lambda
        eps = pseudo_norm(dec, kappa, tau, w_n, l)
        zeta = 1.0 + vector_norm([s for row in dec.F for s in row], w_n) + ledger.majorant_norm(w_n)
        record = IterationRecord(n=n, h_n=h_n, rho_n=w_n.rho, delta_n=w_n.delta, eps=eps, zeta=zeta,
                                 eta=W.norm(w_n), nu=nu, ledger_norm=ledger.majorant_norm(w_n),
                                 lambda_norm=float(np.linalg.norm(Lambda)))
        trace.append(record)
        logger.info(f"KAM iterate {n}: eps={eps:.3e}, h_n={h_n:.3e}")
        if eps < tol:
            converged = True
            break
        if len(trace) >= 3 and trace[-1].eps >= trace[-2].eps >= trace[-3].eps:
            logger.error(f"KAM iteration diverges at step {n}")
            raise DivergenceError(f"pseudo-norm failed to decrease for two consecutive steps (eps={eps:.3e})", trace)
        if n == n_max:
            break
        step = kam_step(dec, kappa, tau, l, n_ws)
        nu = step.Z.norm(w_n)
        W = compose_changes(W, step.Z, n_ws)
        ledger = compose_shift(ledger, step.Z.shift(), n_ws) + step.flat
        K = step.K

    Gamma = _number(dec.a) + _number(ledger.degree_part(0, 0))
    if not converged:
        logger.warning(f"KAM iteration stopped after {n_max} steps at eps={trace[-1].eps:.3e}")
    return CounterTermResult(c=c, omega=omega, Lambda=Lambda.tolist(), Gamma=Gamma, W=W, ledger=ledger,
                             decomposition=dec, trace=trace, converged=converged, eps=trace[-1].eps)


def conjugacy_residual(H: FourierTaylorSeries, result: CounterTermResult, samples: int = 50,
                       seed: int = 0) -> float:
    """max |(H + <omega + Lambda, r>)(W(phi, 0)) - Gamma - g(phi, 0)| over random angles."""
    rng = np.random.default_rng(seed)
    d = H.dim
    phi = rng.random((samples, d))
    angles, rho = result.W.apply(phi, np.zeros((samples, d)))
    r = rho + np.asarray(result.c)
    shifted = np.asarray(result.omega) + np.asarray(result.Lambda)
    energy = H.evaluate(angles, r) + r @ shifted
    flat = result.ledger.evaluate(phi, np.zeros((samples, d)))
    return float(np.max(np.abs(energy - result.Gamma - flat)))


def fit_contraction(eps_old: Sequence[float], eps_new: Sequence[float]) -> ContractionFit:
    """Quadratic-contraction diagnostics for pairs (eps_old, eps_new)."""
    old = np.asarray(eps_old, dtype=float)
    new = np.asarray(eps_new, dtype=float)
    if old.shape != new.shape or old.size == 0:
        raise ConfigValidationError("contraction fit needs matching nonempty sequences")
    ratios = new / old ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratios = np.log(new) / np.log(old)
    positive = ratios[ratios > 0]
    constant = float(np.exp(np.mean(np.log(positive)))) if positive.size else 0.0
    spread = float(positive.max() / positive.min()) if positive.size else float("inf")
    return ContractionFit(ratios=ratios.tolist(), log_ratios=log_ratios.tolist(), constant=constant, spread=spread)
