"""
Normal Form Diagnostics
Degeneracy detection, transversality search, Russmann mu extraction and Diophantine density
"""
import logging
from math import factorial
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, Field
from scipy.optimize import minimize

from kamlab.arithmetic.diophantine import is_diophantine_up_to
from kamlab.errors import ModelValidationError, NotRussmannDegenerateError
from kamlab.schemas.arithmetic import DiophantineParams
from kamlab.series import FourierTaylorSeries, monomial_basis
from kamlab.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


class TransversalityRecord(BaseModel):
    k: List[int]
    u: List[float]
    p: int
    sigma: float


class DegeneracyReport(BaseModel):
    j: int
    rank: int
    gamma: List[List[float]]
    singular_values: List[float]
    M0: List[List[float]]
    transversality: List[TransversalityRecord] = Field(default_factory=list)
    mu: Optional[List[float]] = None
    mu_residual: Optional[float] = None


class DensityEstimate(BaseModel):
    kappa: float
    tau: float
    fraction: float
    half_width: float
    samples: int


def _mean_coefficients(N: FourierTaylorSeries) -> np.ndarray:
    return N.coef[(N.fourier_cutoff,) * N.dim].real


def gradient_matrix(N: FourierTaylorSeries) -> np.ndarray:
    """Rows are the coefficient vectors of d_i N over monomials of degree >= 1."""
    rows = []
    for grad in N.action_gradient():
        coeffs = _mean_coefficients(grad)
        rows.append(coeffs[grad.basis.degrees >= 1])
    return np.array(rows)


def mean_hessian(H: FourierTaylorSeries) -> np.ndarray:
    """Angle average of the action Hessian at r = 0."""
    d = H.dim
    coeffs = _mean_coefficients(H)
    out = np.zeros((d, d))
    for i in range(d):
        for k in range(d):
            alpha = [0] * d
            alpha[i] += 1
            alpha[k] += 1
            idx = H.basis.index.get(tuple(alpha))
            if idx is not None:
                out[i, k] = coeffs[idx] * (2.0 if i == k else 1.0)
    return out


def degeneracy_detect(N: FourierTaylorSeries, tol: float = 1e-10, H: Optional[FourierTaylorSeries] = None,
                      k_list: Optional[Sequence[Sequence[int]]] = None, p: int = 2) -> DegeneracyReport:
    """Directions gamma with <d_r N(r) - omega0, gamma> = 0 identically."""
    if N.degree_cutoff < 1:
        raise ModelValidationError("degeneracy detection needs a normal form of degree >= 1")
    d = N.dim
    A = gradient_matrix(N)
    if A.shape[1] == 0:
        U, s = np.eye(d), np.zeros(0)
    else:
        U, s, _ = np.linalg.svd(A, full_matrices=True)
    threshold = tol * max(1.0, float(s.max(initial=0.0)))
    rank = int(np.sum(s > threshold))
    gamma = U[:, rank:].T
    j = d - rank
    M0 = mean_hessian(H) if H is not None else mean_hessian(N)
    records = [transversality(N, k, p) for k in (k_list or [])]

    mu, mu_residual = None, None
    if d >= 2 and j == d - 1:
        try:
            poly, mu_residual = russmann_mu_extract(N, tol=max(tol, 1e-10))
            mu = poly.coef.tolist()
        except NotRussmannDegenerateError as e:
            logger.info(f"(d-1)-degenerate without a Russmann profile: {e.detail}")
    logger.info(f"degeneracy index j={j} (rank {rank})")
    return DegeneracyReport(j=j, rank=rank, gamma=gamma.tolist(), singular_values=s.tolist(), M0=M0.tolist(),
                            transversality=records, mu=mu, mu_residual=mu_residual)


# --- transversality ------------------------------------------------------

def sphere_grid(d: int, count: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """Unit vectors: circle for d=2, Fibonacci sphere for d=3, seeded Gaussian directions beyond."""
    if d == 2:
        count = count or 720
        t = np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    if d == 3:
        count = count or 2000
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        theta = np.pi * (1 + 5 ** 0.5) * i
        rad = np.sqrt(1 - z ** 2)
        return np.stack([rad * np.cos(theta), rad * np.sin(theta), z], axis=-1)
    count = count or 4000
    g = np.random.default_rng(seed).standard_normal((count, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _directional_jets(N: FourierTaylorSeries, k: Sequence[int], p: int) -> Callable[[np.ndarray], np.ndarray]:
    k_hat = np.asarray(k, dtype=float)
    k_hat = k_hat / np.linalg.norm(k_hat)
    fk = None
    for i, grad in enumerate(N.action_gradient()):
        term = grad.scale(k_hat[i])
        fk = term if fk is None else fk + term
    coeffs = _mean_coefficients(fk)
    degrees = fk.basis.degrees
    weights = np.array([factorial(int(m)) for m in degrees], dtype=float) * coeffs
    basis = fk.basis

    def value(u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(u)
        contrib = basis.powers(u) * weights
        per_degree = np.stack([np.abs(contrib[:, degrees == m].sum(axis=1)) for m in range(p + 1)], axis=-1)
        return per_degree.max(axis=1)

    return value


def transversality(N: FourierTaylorSeries, k: Sequence[int], p: int, grid: Optional[np.ndarray] = None,
                   seed: int = 0) -> TransversalityRecord:
    """Direction u maximizing max_{j<=p} |d_t^j <k/|k|, d_r N(t u)>| at t = 0."""
    if not np.any(k):
        raise ModelValidationError("transversality needs a nonzero k")
    value = _directional_jets(N, k, p)
    grid = sphere_grid(N.dim, seed=seed) if grid is None else grid
    scores = value(grid)
    best = grid[int(np.argmax(scores))]
    best_score = float(scores.max())

    def objective(x):
        norm = np.linalg.norm(x)
        return -float(value(x / norm)[0]) if norm > 0 else 0.0

    refined = minimize(objective, best, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
    if refined.success and -refined.fun > best_score:
        best = refined.x / np.linalg.norm(refined.x)
        best_score = -float(refined.fun)
    logger.debug(f"transversality k={list(k)}: sigma={best_score:.6g}")
    return TransversalityRecord(k=[int(x) for x in k], u=best.tolist(), p=p, sigma=best_score)


# --- Russmann case -------------------------------------------------------

def _linear_power_coefficients(omega0: np.ndarray, m: int, basis) -> np.ndarray:
    """Coefficients of <c, omega0>^m on the degree-m monomials of basis."""
    out = np.zeros(len(basis))
    for idx, beta in enumerate(basis.exponents.tolist()):
        if sum(beta) != m:
            continue
        multinomial = factorial(m)
        for b in beta:
            multinomial //= factorial(b)
        out[idx] = multinomial * np.prod(omega0 ** np.array(beta))
    return out


def _degree_one_vector(N: FourierTaylorSeries) -> np.ndarray:
    coeffs = _mean_coefficients(N)
    out = np.zeros(N.dim)
    for i in range(N.dim):
        e = [0] * N.dim
        e[i] = 1
        out[i] = coeffs[N.basis.index[tuple(e)]]
    return out


def russmann_mu_extract(N: FourierTaylorSeries, q: Optional[int] = None, tol: float = 1e-10,
                        omega0: Optional[Sequence[float]] = None):
    """Least-squares mu with d_r N(c) = mu(<c, omega0>) omega0, degree by degree; returns (mu, residual)."""
    omega0 = _degree_one_vector(N) if omega0 is None else np.asarray(omega0, dtype=float)
    if not np.any(omega0):
        raise ModelValidationError("omega0 must be nonzero")
    q = N.degree_cutoff if q is None else q
    grads = [g.project(basis=monomial_basis(N.dim, max(q - 1, 0))) for g in N.action_gradient()]
    basis = grads[0].basis
    P = np.array([_mean_coefficients(g) for g in grads])
    mu = []
    residual_sq = 0.0
    for m in range(q):
        mask = basis.degrees == m
        line = _linear_power_coefficients(omega0, m, basis)[mask]
        b = np.outer(omega0, line)
        Pm = P[:, mask]
        coeff = float(np.sum(Pm * b) / np.sum(b * b))
        mu.append(coeff)
        residual_sq += float(np.sum((Pm - coeff * b) ** 2))
    residual = residual_sq ** 0.5
    if residual > tol * max(1.0, float(np.abs(P).max(initial=0.0))):
        logger.error(f"Russmann extraction residual {residual:.3e}")
        raise NotRussmannDegenerateError(f"gradient is not of the form mu(<c, omega0>) omega0 (residual {residual:.3e})",
                                         residual)
    return Polynomial(mu), residual


def russmann_primitive(mu: Union[Polynomial, Sequence[float]], omega0: Sequence[float], q: int,
                       fourier_cutoff: int = 0) -> FourierTaylorSeries:
    """N(r) = sum_m mu_m t^(m+1) / (m+1) with t = <omega0, r>, truncated at degree q."""
    coeffs = mu.coef if isinstance(mu, Polynomial) else np.asarray(mu, dtype=float)
    t = FourierTaylorSeries.linear(omega0, fourier_cutoff, q)
    N = t.zeros_like()
    power = t
    for m, c in enumerate(coeffs):
        if m + 1 > q:
            break
        N = N + power.scale(float(c) / (m + 1))
        power = power.mul(t)
    return N


# --- Diophantine density -------------------------------------------------

def _as_frequency_map(Omega) -> Callable[[np.ndarray], np.ndarray]:
    if callable(Omega):
        return Omega
    comps = list(Omega)
    zero = np.zeros(comps[0].dim)
    return lambda c: np.array([w.evaluate(zero, c) for w in comps])


def sample_ball(d: int, eta: float, samples: int, seed: int, center: Optional[Sequence[float]] = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radius = eta * rng.random(samples) ** (1.0 / d)
    points = g * radius[:, None]
    if center is not None:
        points = points + np.asarray(center, dtype=float)
    return points


def diophantine_density(Omega, eta: float, params: DiophantineParams, samples: int, seed: int,
                        dim: Optional[int] = None, center: Optional[Sequence[float]] = None,
                        workers: Optional[int] = None) -> DensityEstimate:
    """Monte-Carlo fraction of c in the eta-ball whose frequency Omega(c) fails the finite Diophantine check."""
    if samples < 1000:
        raise ModelValidationError("density estimates need at least 1000 samples")
    if eta <= 0:
        raise ModelValidationError("ball radius must be positive")
    freq = _as_frequency_map(Omega)
    d = dim if dim is not None else (len(Omega) if not callable(Omega) else None)
    if d is None:
        raise ModelValidationError("dimension is required for a callable frequency map")
    points = sample_ball(d, eta, samples, seed, center)

    def failed(c) -> bool:
        return not is_diophantine_up_to(freq(c), params).diophantine

    flags = parallel_map(failed, list(points), workers)
    fraction = float(np.mean(flags))
    half = 1.96 * (fraction * (1 - fraction) / samples) ** 0.5
    logger.info(f"non-Diophantine fraction {fraction:.4f} +/- {half:.4f} at kappa={params.kappa}")
    return DensityEstimate(kappa=params.kappa, tau=params.tau, fraction=fraction, half_width=half, samples=samples)
