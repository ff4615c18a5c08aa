"""
Birkhoff Normal Forms
Degree-by-degree normal forms H(psi, r + d_psi f) = N(r), their centered variant and invariance checks
"""
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from kamlab.config import settings
from kamlab.errors import ResonanceError, SeriesValidationError
from kamlab.series import (
    CenteredSeries,
    FourierTaylorSeries,
    NormWeights,
    compose_shift,
    invert_near_identity,
    inversion_residual,
    monomial_basis,
    substitute_actions,
)
from kamlab.arithmetic.diophantine import normalize_sign

logger = logging.getLogger(__name__)

ANGLE_FREE_TOL = 1e-12


class NormalForm(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    N: FourierTaylorSeries
    f: FourierTaylorSeries
    tail: FourierTaylorSeries  # degree q+1 part of H(psi, r + d_psi f)
    q: int
    omega0: List[float]
    residual_norm: float
    conjugacy_defect: float

    def gradient(self, c) -> np.ndarray:
        return polynomial_gradient(self.N, c)

    def hessian(self, c) -> np.ndarray:
        return polynomial_hessian(self.N, c)

    def coefficients(self, tol: float = 0.0) -> dict:
        return polynomial_coefficients(self.N, tol)


class CenteredNormalForm(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    Gamma: FourierTaylorSeries  # polynomial in c
    Omega: List[FourierTaylorSeries]  # vector polynomial in c
    f: CenteredSeries
    F: CenteredSeries  # O^2(r - c) remainder
    q: int
    omega0: List[float]
    conjugacy_defect: float

    def frequency(self, c) -> np.ndarray:
        zero = np.zeros(len(self.omega0))
        return np.array([w.evaluate(zero, c) for w in self.Omega])


class InvarianceReport(BaseModel):
    q: int
    deviation: float
    inversion_residual: float
    translation: Optional[List[float]] = None


# --- polynomial helpers --------------------------------------------------

def polynomial_coefficients(N: FourierTaylorSeries, tol: float = 0.0) -> dict:
    """Real coefficients of the angle-free part keyed by exponent string."""
    center = (N.fourier_cutoff,) * N.dim
    out = {}
    for k, alpha in enumerate(N.basis.exponents.tolist()):
        value = float(N.coef[center + (k,)].real)
        if abs(value) > tol:
            out[",".join(str(a) for a in alpha)] = value
    return out


def polynomial_gradient(N: FourierTaylorSeries, c) -> np.ndarray:
    zero = np.zeros(N.dim)
    return np.array([g.evaluate(zero, c) for g in N.action_gradient()])


def polynomial_hessian(N: FourierTaylorSeries, c) -> np.ndarray:
    zero = np.zeros(N.dim)
    grads = N.action_gradient()
    return np.array([[grads[i].d_action(k).evaluate(zero, c) for k in range(N.dim)] for i in range(N.dim)])


def frequency_from(H: FourierTaylorSeries) -> np.ndarray:
    """omega0 read from the degree-1 part; angle-dependent degree <= 1 terms must vanish."""
    low = H.degree_part(0, 1)
    osc = low.oscillating_part()
    if not osc.is_zero(ANGLE_FREE_TOL):
        (n, alpha), value = max(osc.terms().items(), key=lambda kv: abs(kv[1]))
        raise SeriesValidationError(
            f"degree <= 1 part depends on the angles at n={n}, alpha={alpha} ({abs(value):.3e})",
            {"n": list(n), "alpha": list(alpha)})
    center = (H.fourier_cutoff,) * H.dim
    omega0 = np.zeros(H.dim)
    for i in range(H.dim):
        e = [0] * H.nvars
        e[i] = 1
        omega0[i] = H.coef[center + (H.basis.index[tuple(e)],)].real
    return omega0


def _clean_low_degree(H: FourierTaylorSeries) -> FourierTaylorSeries:
    low = H.degree_part(0, 1)
    return H - low.oscillating_part()


# --- homological equation ------------------------------------------------

def solve_homological(g: FourierTaylorSeries, omega0: Sequence[float],
                      floor: Optional[float] = None) -> FourierTaylorSeries:
    """f with <omega0, d_psi f> = -(g - M g); the mean of f is zero."""
    floor = settings.DIVISOR_FLOOR if floor is None else floor
    modes = g.modes()
    divisor = modes @ np.asarray(omega0, dtype=float)
    norms = np.abs(modes).max(axis=-1)
    live = np.any(g.coef != 0, axis=-1) & (norms > 0)
    resonant = live & (np.abs(divisor) < floor * norms)
    if resonant.any():
        pos = np.argwhere(resonant)[0]
        n = normalize_sign(modes[tuple(pos)])
        value = float(abs(divisor[tuple(pos)]))
        logger.error(f"resonant divisor at n={n}: {value:.3e}")
        raise ResonanceError(f"small divisor <n, omega0> = {value:.3e} at n={list(n)} is below the floor", n, value)
    safe = np.where(live, divisor, 1.0)
    factor = np.where(live, -1.0 / (2j * np.pi * safe), 0.0)
    return g._like(g.coef * factor[..., None])


def _sweep(Hw: FourierTaylorSeries, q: int, omega0: np.ndarray, basis_for: Callable[[int], object],
           normalizable: Callable[[FourierTaylorSeries], FourierTaylorSeries], n_angle: int,
           fourier_cutoff: int):
    """Shared degree recursion returning the generating series f."""
    f = Hw._like(np.zeros((2 * fourier_cutoff + 1,) * Hw.dim + (len(basis_for(q)),), dtype=complex),
                 fourier_cutoff, basis_for(q))

    def shifts(gen):
        return [gen.d_angle(i) for i in range(Hw.dim)] + [None] * (Hw.nvars - n_angle)

    for j in range(2, q + 1):
        G = substitute_actions(Hw, shifts(f), fourier_cutoff, basis_for(j))
        Gj = normalizable(G.degree_part(j))
        f_j = solve_homological(Gj.oscillating_part(), omega0)
        f = f + f_j.project(fourier_cutoff, basis_for(q))
        logger.debug(f"normal form degree {j}: {int(np.count_nonzero(f_j.coef))} generating coefficients")
    return f


def birkhoff_normal_form(H: FourierTaylorSeries, q: int, weights: Optional[NormWeights] = None,
                         mean_gauge: Optional[FourierTaylorSeries] = None,
                         fourier_cutoff: Optional[int] = None) -> NormalForm:
    """Normal form N of order q with mean-free generating series f.

    `mean_gauge` is an angle-free series added to f; it leaves N untouched.
    """
    if q < 1:
        raise SeriesValidationError("normal form order must be >= 1")
    weights = weights or NormWeights(rho=0.1, delta=1.0)
    omega0 = frequency_from(H)
    H = _clean_low_degree(H)
    n_ws = H.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    d = H.dim

    f = _sweep(H, q, omega0, lambda j: monomial_basis(d, j), lambda s: s, d, n_ws)
    G = substitute_actions(H, [f.d_angle(i) for i in range(d)], n_ws, monomial_basis(d, q + 1))
    low = G.degree_part(0, q)
    N = low.mean_value().project(basis=monomial_basis(d, q))
    defect = float(np.max(np.abs(low.oscillating_part().coef), initial=0.0))
    tail = G.degree_part(q + 1)

    if mean_gauge is not None:
        if not mean_gauge.oscillating_part().is_zero(ANGLE_FREE_TOL):
            raise SeriesValidationError("the mean gauge must be angle-free")
        f = f + mean_gauge.degree_part(2, q).project(n_ws, f.basis)

    logger.info(f"normal form of order {q} computed, conjugacy defect {defect:.2e}")
    return NormalForm(N=N, f=f, tail=tail, q=q, omega0=omega0.tolist(),
                      residual_norm=tail.majorant_norm(weights), conjugacy_defect=defect)


def centered_normal_form(H: FourierTaylorSeries, q: int, action_cutoff: Optional[int] = None,
                         fourier_cutoff: Optional[int] = None) -> CenteredNormalForm:
    """Gamma(c) + <Omega(c), r - c> + O^2(r - c) with a generating series affine in r - c."""
    if q < 1:
        raise SeriesValidationError("normal form order must be >= 1")
    omega0 = frequency_from(H)
    H = _clean_low_degree(H)
    n_ws = H.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    d = H.dim
    q_r = max(2, q if action_cutoff is None else action_cutoff)
    Hc = H.with_workspace(n_ws, q).recenter(q_r)

    def basis_for(j):
        return monomial_basis(2 * d, j, d, min(q_r, j))

    f = _sweep(Hc, q, omega0, basis_for, lambda s: s.action_degree_part(0, 1), d, n_ws)
    G = substitute_actions(Hc, [f.d_angle(i) for i in range(d)] + [None] * d, n_ws, basis_for(q))

    flat = G.action_degree_part(0, 1)
    defect = float(np.max(np.abs(flat.oscillating_part().coef), initial=0.0))
    mean = flat.mean_value()
    Gamma = mean.action_degree_part(0, 0).at_center()
    Omega = [mean.d_rho(i).action_degree_part(0, 0).at_center() for i in range(d)]
    F = G.action_degree_part(2)
    logger.info(f"centered normal form of order {q} computed, defect {defect:.2e}")
    return CenteredNormalForm(Gamma=Gamma, Omega=Omega, f=f, F=F, q=q, omega0=omega0.tolist(),
                              conjugacy_defect=defect)


def centered_consistency(centered: CenteredNormalForm, nf: NormalForm):
    """Coefficient gaps of Gamma against N through order q and of Omega against d_r N through order q - 1."""
    q = min(centered.q, nf.q)
    gamma_gap = centered.Gamma.degree_part(0, q).max_abs_diff(nf.N.degree_part(0, q))
    omega_gap = max(w.degree_part(0, q - 1).max_abs_diff(g.degree_part(0, q - 1))
                    for w, g in zip(centered.Omega, nf.N.action_gradient()))
    return gamma_gap, omega_gap


def conjugacy_samples(H: FourierTaylorSeries, nf: NormalForm, radius: float, samples: int = 50,
                      seed: int = 0):
    """|H(psi, r + d_psi f) - N(r)| at random points with |r|_inf <= radius; returns (|r|, residual, C)."""
    rng = np.random.default_rng(seed)
    d = H.dim
    psi = rng.random((samples, d))
    r = radius * (2 * rng.random((samples, d)) - 1)
    shift = np.stack([nf.f.d_angle(i).evaluate_complex(psi, r).real for i in range(d)], axis=-1)
    residual = np.abs(H.evaluate(psi, r + shift) - nf.N.evaluate(psi, r))
    size = np.abs(r).max(axis=1)
    constant = float(np.max(residual / np.maximum(size, 1e-300) ** (nf.q + 1)))
    return size, residual, constant


def exact_change(chi: FourierTaylorSeries, fourier_cutoff: Optional[int] = None):
    """(A, R) with Z(phi, r) = (phi + A, r + R) generated by <phi', r> + chi(phi', r)."""
    d = chi.dim
    n_ws = chi.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    angle_map = [chi.d_action(i).project(n_ws) for i in range(d)] + [None] * d
    inverse = invert_near_identity(angle_map, n_ws)
    A = list(inverse[:d])
    R = [compose_shift(chi.d_angle(i).project(n_ws), A + [None] * d, n_ws) for i in range(d)]
    residual = inversion_residual([s if s is not None else chi.zeros_like().project(n_ws) for s in angle_map],
                                  inverse, n_ws)
    return A, R, residual


def random_generator(d: int, size: float, seed: int, fourier_cutoff: int = 1,
                     degree_cutoff: int = 3) -> FourierTaylorSeries:
    """Random real generating series in O^2(r) with coefficient norm `size` at delta = 1."""
    rng = np.random.default_rng(seed)
    chi = FourierTaylorSeries.zeros(d, fourier_cutoff, degree_cutoff)
    basis = monomial_basis(d, degree_cutoff)
    for alpha in basis.exponents.tolist():
        if sum(alpha) < 2:
            continue
        mode = rng.integers(-fourier_cutoff, fourier_cutoff + 1, d)
        chi = chi + FourierTaylorSeries.cosine(mode, alpha, rng.uniform(-1.0, 1.0), fourier_cutoff, degree_cutoff)
    norm = chi.coefficient_norm()
    return chi.scale(size / norm) if norm > 0 else chi


def bnf_invariance_check(H: FourierTaylorSeries, chi: Optional[FourierTaylorSeries], q: int,
                         translation: Optional[Sequence[float]] = None,
                         fourier_cutoff: Optional[int] = None) -> InvarianceReport:
    """Compare N_{H o Z} with N_H for Z generated by chi (exact) or a constant angle translation."""
    n_ws = H.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
    H = H.with_workspace(n_ws, max(q + 1, H.degree_cutoff))
    reference = birkhoff_normal_form(H, q)
    moved = H
    residual = 0.0
    if chi is not None and not chi.is_zero():
        if not chi.degree_part(0, 1).is_zero(ANGLE_FREE_TOL):
            raise SeriesValidationError("generating series must lie in O^2(r)")
        A, R, residual = exact_change(chi, n_ws)
        moved = compose_shift(H, A + R, n_ws)
    if translation is not None:
        moved = moved.translate_angles(translation)
    conjugated = birkhoff_normal_form(moved, q)
    deviation = reference.N.max_abs_diff(conjugated.N)
    logger.info(f"normal form invariance deviation {deviation:.3e}")
    return InvarianceReport(q=q, deviation=deviation, inversion_residual=residual,
                            translation=None if translation is None else [float(v) for v in translation])
