"""
Diophantine Arithmetic
Small-divisor enumeration, finite Diophantine certification and exponent estimates
"""
import logging
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from kamlab.config import settings
from kamlab.errors import BudgetExhaustedError, ConfigValidationError, ModelValidationError
from kamlab.schemas.arithmetic import DiophantineParams, DiophantineVerdict, ExponentEstimate, SmallDivisor

logger = logging.getLogger(__name__)


def _as_vector(omega) -> np.ndarray:
    if hasattr(omega, "omega"):
        omega = omega.omega
    w = np.asarray(omega, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ModelValidationError(f"frequency vector must have d >= 2 entries, got shape {w.shape}")
    return w


def require_exponent(params: DiophantineParams, d: int) -> None:
    """Diophantine vectors of dimension d exist only for tau > d - 1."""
    if params.tau <= d - 1:
        logger.error(f"tau={params.tau} is not above d - 1 = {d - 1}")
        raise ConfigValidationError(f"tau={params.tau} must exceed d - 1 = {d - 1}", {"field": "tau"})


def _lattice_rows(omega: np.ndarray, N: int) -> Tuple[int, np.ndarray, np.ndarray]:
    """All integer rows over every coordinate except the pivot (largest |omega_i|)."""
    if N < 1:
        raise ModelValidationError("enumeration cutoff must be >= 1")
    d = omega.size
    pivot = int(np.argmax(np.abs(omega)))
    rows = (2 * N + 1) ** (d - 1)
    if rows > settings.ENUMERATION_BUDGET:
        raise BudgetExhaustedError(
            f"lattice enumeration of {rows} rows exceeds the budget {settings.ENUMERATION_BUDGET}",
            {"N": N, "d": d})
    others = [i for i in range(d) if i != pivot]
    grid = np.indices((2 * N + 1,) * (d - 1)).reshape(d - 1, -1).T - N
    return pivot, np.array(others), grid


def _assemble(pivot: int, others: np.ndarray, rows: np.ndarray, pivot_values: np.ndarray) -> np.ndarray:
    d = len(others) + 1
    k = np.zeros(rows.shape[:1] + pivot_values.shape[1:] + (d,), dtype=np.int64)
    for col, i in enumerate(others):
        k[..., i] = rows[:, col].reshape((-1,) + (1,) * (pivot_values.ndim - 1))
    k[..., pivot] = pivot_values
    return k


def normalize_sign(k: Sequence[int]) -> Tuple[int, ...]:
    """Representative of {k, -k} whose first nonzero entry is positive."""
    k = tuple(int(x) for x in k)
    for x in k:
        if x != 0:
            return k if x > 0 else tuple(-y for y in k)
    return k


def _best(candidates: Iterable[Sequence[int]]) -> Tuple[int, ...]:
    reps = {normalize_sign(k) for k in candidates}
    return min(reps, key=lambda k: (max(abs(x) for x in k), k))


def small_divisor_min(omega, N: int) -> SmallDivisor:
    """min over 0 < |k|_inf <= N of |<k, omega>| with a realizing k."""
    w = _as_vector(omega)
    pivot, others, rows = _lattice_rows(w, N)
    partial = rows @ w[others]
    x = -partial / w[pivot]
    lo = np.clip(np.floor(x), -N, N)
    hi = np.clip(lo + 1, -N, N)
    cand = np.stack([lo, hi], axis=1).astype(np.int64)
    origin = ~rows.any(axis=1)
    cand[origin] = 1
    values = np.abs(partial[:, None] + cand * w[pivot])
    m_star = float(values.min())
    hit_rows, hit_cols = np.nonzero(values == m_star)
    k_all = _assemble(pivot, others, rows[hit_rows], cand[hit_rows, hit_cols][:, None])[:, 0, :]
    k_star = _best(k_all.tolist())
    logger.debug(f"small divisor N={N}: k*={k_star}, m*={m_star:.3e}")
    return SmallDivisor(N=N, k=list(k_star), value=m_star)


def is_diophantine_up_to(omega, params: DiophantineParams) -> DiophantineVerdict:
    """Exact finite check of |<k, omega>| >= kappa / |k|^tau for 0 < |k|_inf <= N_check."""
    w = _as_vector(omega)
    require_exponent(params, w.size)
    N = params.N_check
    pivot, others, rows = _lattice_rows(w, N)
    partial = rows @ w[others]
    center = np.rint(-partial / w[pivot])
    width = int(np.ceil(params.kappa / abs(w[pivot]))) + 1
    offsets = np.arange(-width, width + 1)
    cand = np.clip(center[:, None] + offsets[None, :], -N, N).astype(np.int64)
    row_norm = np.abs(rows).max(axis=1) if rows.shape[1] else np.zeros(rows.shape[0], dtype=np.int64)
    norms = np.maximum(row_norm[:, None], np.abs(cand))
    values = np.abs(partial[:, None] + cand * w[pivot])
    valid = norms > 0
    safe_norms = np.where(valid, norms, 1).astype(float)
    bounds = params.kappa / safe_norms ** params.tau
    violated = valid & (values < bounds)
    if not violated.any():
        return DiophantineVerdict(diophantine=True, N_check=N)

    ratio = np.where(violated, values * safe_norms ** params.tau, np.inf)
    best_ratio = ratio.min()
    hit_rows, hit_cols = np.nonzero(ratio == best_ratio)
    k_all = _assemble(pivot, others, rows[hit_rows], cand[hit_rows, hit_cols][:, None])[:, 0, :]
    witness = _best(k_all.tolist())
    norm = max(abs(x) for x in witness)
    value = float(abs(np.dot(witness, w)))
    logger.debug(f"Diophantine check failed at k={witness} (value {value:.3e})")
    return DiophantineVerdict(diophantine=False, N_check=N, witness=list(witness), value=value,
                              bound=params.kappa / norm ** params.tau)


def small_divisor_table(omega, N_list: Sequence[int]) -> List[SmallDivisor]:
    return [small_divisor_min(omega, int(N)) for N in N_list]


def uniform_exponent_estimate(omega, N_list: Sequence[int]) -> ExponentEstimate:
    """Least-squares slope of -log m*(N) against log N."""
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ModelValidationError("N_list must be strictly increasing")
    table = small_divisor_table(omega, N_list)
    m_star = [t.value for t in table]
    if min(m_star) == 0.0:
        return ExponentEstimate(gamma=float("inf"), stderr=0.0, residual=float("nan"), N_list=N_list, m_star=m_star)
    x = np.log(np.asarray(N_list, dtype=float))
    y = -np.log(np.asarray(m_star))
    fit = linregress(x, y)
    residual = float(np.sqrt(np.mean((y - (fit.intercept + fit.slope * x)) ** 2)))
    logger.info(f"uniform exponent estimate {fit.slope:.4f} (stderr {fit.stderr:.2e})")
    return ExponentEstimate(gamma=float(fit.slope), stderr=float(fit.stderr), residual=residual,
                            N_list=N_list, m_star=m_star)
