"""
Series Composition
Substitution of shifted arguments f(phi + Phi, x + R) and near-identity inversion
"""
import logging
from math import factorial
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sp_fft

from kamlab.config import settings
from kamlab.errors import InversionError, SeriesValidationError, ShiftTooLargeError
from kamlab.series.basis import MonomialBasis
from kamlab.series.ftseries import FourierTaylorSeries

logger = logging.getLogger(__name__)

# stalled updates below this (relative to the shift size) count as converged
STAGNATION_FLOOR = 1e-12

Shift = Sequence[Optional[FourierTaylorSeries]]


def _angle_slice(f: FourierTaylorSeries, k: int) -> FourierTaylorSeries:
    """The angle-only coefficient of monomial k as a series of degree 0 in f's workspace."""
    arr = np.zeros_like(f.coef)
    arr[..., 0] = f.coef[..., k]
    return f._like(arr)


def _is_zero(s: Optional[FourierTaylorSeries]) -> bool:
    return s is None or s.is_zero()


def substitute_actions(f: FourierTaylorSeries, shifts: Shift, fourier_cutoff: Optional[int] = None,
                       basis: Optional[MonomialBasis] = None) -> FourierTaylorSeries:
    """f(phi, x + R(phi, x)) computed exactly in coefficient space.

    `shifts[v]` shifts polynomial variable v; None means no shift.
    """
    shifts = list(shifts) + [None] * (f.nvars - len(shifts))
    live = [s for s in shifts if not _is_zero(s)]
    n_out = fourier_cutoff
    if n_out is None:
        n_out = max([f.fourier_cutoff] + [s.fourier_cutoff for s in live])
    basis = basis or f.basis
    base = f.project(n_out, basis)
    if not live:
        return base

    lifted: List[Optional[FourierTaylorSeries]] = []
    for v, s in enumerate(shifts):
        arr = np.zeros_like(base.coef)
        e = [0] * f.nvars
        e[v] = 1
        k = basis.index.get(tuple(e))
        if k is not None:
            arr[(n_out,) * f.dim + (k,)] = 1.0
        x_v = base._like(arr)
        lifted.append(x_v if _is_zero(s) else x_v + s.project(n_out, basis))

    powers = {}
    zero = tuple([0] * f.nvars)
    powers[zero] = base._like(np.zeros_like(base.coef)) + 1.0
    result = base._like(np.zeros_like(base.coef))
    for k, alpha in enumerate(basis.exponents.tolist()):
        alpha = tuple(alpha)
        if alpha != zero:
            v = next(i for i, a in enumerate(alpha) if a)
            prev = list(alpha)
            prev[v] -= 1
            powers[alpha] = powers[tuple(prev)].mul(lifted[v], n_out, basis)
        if not np.any(base.coef[..., k]):
            continue
        result = result + _angle_slice(base, k).mul(powers[alpha], n_out, basis)
    return result


# --- collocation helpers -------------------------------------------------

def _grid_jets(s: FourierTaylorSeries, m: int) -> np.ndarray:
    """Values of the polynomial-coefficient jets of s on the uniform m^d angle grid, shape (J, n_mon)."""
    d = s.dim
    n = s.fourier_cutoff
    if 2 * n + 1 > m:
        raise ValueError("collocation grid too coarse for the shift")
    padded = np.zeros((m,) * d + (len(s.basis),), dtype=complex)
    src = s.coef
    for axis in range(d):
        src = np.roll(src, -n, axis=axis)
    idx = [np.r_[0:n + 1, m - n:m] for _ in range(d)]
    padded[np.ix_(*idx, np.arange(len(s.basis)))] = src
    values = sp_fft.ifftn(padded, axes=tuple(range(d))) * m ** d
    return values.reshape(-1, len(s.basis))


def _nonuniform_jets(f: FourierTaylorSeries, points: np.ndarray) -> np.ndarray:
    """Jets of f evaluated at arbitrary angle points (J, d), via per-axis contraction."""
    d = f.dim
    n = f.fourier_cutoff
    ks = np.arange(-n, n + 1)
    coef = f.coef
    # contract the last Fourier axis with a single matmul, then the rest pointwise
    e_last = np.exp(2j * np.pi * np.outer(points[:, d - 1], ks))
    moved = np.moveaxis(coef, d - 1, 0)
    rest_shape = moved.shape[1:]
    acc = (e_last @ moved.reshape(len(ks), -1)).reshape((points.shape[0],) + rest_shape)
    for axis in range(d - 2, -1, -1):
        e_ax = np.exp(2j * np.pi * np.outer(points[:, axis], ks))
        acc = np.einsum("jn,jn...->j...", e_ax, np.moveaxis(acc, axis + 1, 1))
    return acc.reshape(points.shape[0], len(f.basis))


class _JetAlgebra:
    """Truncated polynomial products for many points at once."""

    def __init__(self, basis: MonomialBasis):
        self.basis = basis
        ii, jj, kk = basis.multiplication_table()
        self.ii, self.jj = ii, jj
        self.scatter = np.zeros((len(ii), len(basis)))
        self.scatter[np.arange(len(ii)), kk] = 1.0

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a[:, self.ii] * b[:, self.jj]) @ self.scatter

    def one(self, npts: int) -> np.ndarray:
        out = np.zeros((npts, len(self.basis)), dtype=complex)
        out[:, 0] = 1.0
        return out

    def variable(self, npts: int, v: int) -> np.ndarray:
        out = np.zeros((npts, len(self.basis)), dtype=complex)
        e = [0] * self.basis.nvars
        e[v] = 1
        k = self.basis.index.get(tuple(e))
        if k is not None:
            out[:, k] = 1.0
        return out


def _beta_list(dim: int, order: int) -> List[Tuple[int, ...]]:
    from kamlab.series.basis import monomial_basis

    return [tuple(b) for b in monomial_basis(dim, order).exponents.tolist()]


def compose_shift(f: FourierTaylorSeries, shift: Shift, fourier_cutoff: Optional[int] = None,
                  basis: Optional[MonomialBasis] = None) -> FourierTaylorSeries:
    """f(phi + Phi(phi, r), r + R(phi, r)) truncated to the output workspace.

    `shift` lists the d angle shifts followed by the d action shifts (None = 0).
    Action-only shifts are substituted exactly; otherwise the composition is
    collocated on an oversampled angle grid.
    """
    d = f.dim
    shift = list(shift) + [None] * (2 * d - len(shift))
    if len(shift) != 2 * d or f.nvars != d:
        raise SeriesValidationError(f"compose_shift expects {2 * d} shift components on a plain series")
    angle, action = shift[:d], shift[d:]
    if all(_is_zero(s) for s in angle):
        return substitute_actions(f, action, fourier_cutoff, basis)

    live = [s for s in shift if not _is_zero(s)]
    n_g = max(s.fourier_cutoff for s in live)
    n_out = max(f.fourier_cutoff, n_g) if fourier_cutoff is None else fourier_cutoff
    basis = basis or f.basis
    q = basis.degree
    m = sp_fft.next_fast_len(
        settings.COMPOSE_OVERSAMPLE * (f.fourier_cutoff + n_out + (q + 6) * n_g) + 8)
    npts = m ** d
    algebra = _JetAlgebra(basis)
    f = f.project(basis=basis)

    grid_axes = np.meshgrid(*[np.arange(m) / m for _ in range(d)], indexing="ij")
    grid = np.stack([g.ravel() for g in grid_axes], axis=-1)

    def jets(s):
        if _is_zero(s):
            return np.zeros((npts, len(basis)), dtype=complex)
        return _grid_jets(s.project(basis=basis), m)

    angle_jets = [jets(s) for s in angle]
    action_jets = [jets(s) for s in action]
    base_angles = np.stack([j[:, 0].real for j in angle_jets], axis=-1)
    high_angles = []
    for j in angle_jets:
        h = j.copy()
        h[:, 0] = 0.0
        high_angles.append(h)
    angular_order = q if any(np.any(h) for h in high_angles) else 0

    # polynomial substitution x -> x + R, then Taylor expansion in the r-dependent
    # part of the angle shift
    lifted = [algebra.variable(npts, v) + action_jets[v] for v in range(d)]
    powers = [algebra.one(npts)]
    for alpha in basis.exponents.tolist()[1:]:
        v = next(i for i, a in enumerate(alpha) if a)
        prev = list(alpha)
        prev[v] -= 1
        powers.append(algebra.mul(powers[basis.index[tuple(prev)]], lifted[v]))

    def substitute(jet):
        out = np.zeros_like(jet)
        for k in range(len(basis)):
            if np.any(jet[:, k]):
                out += jet[:, k:k + 1] * powers[k]
        return out

    points = grid + base_angles
    values = np.zeros((npts, len(basis)), dtype=complex)
    for beta in _beta_list(d, angular_order):
        deriv = f
        for axis, b in enumerate(beta):
            for _ in range(b):
                deriv = deriv.d_angle(axis)
        term = substitute(_nonuniform_jets(deriv, points))
        weight = 1.0
        for axis, b in enumerate(beta):
            for _ in range(b):
                term = algebra.mul(term, high_angles[axis])
            weight *= factorial(b)
        values += term / weight

    spectrum = sp_fft.fftn(values.reshape((m,) * d + (len(basis),)), axes=tuple(range(d))) / npts
    shell = (m - 1) // 2 - 1
    freq = np.abs(np.rint(sp_fft.fftfreq(m, 1.0 / m))).astype(int)
    outer = np.zeros((m,) * d, dtype=bool)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = m
        outer |= (freq.reshape(shape) >= shell)
    scale = max(1.0, float(np.max(np.abs(spectrum))))
    tail = float(np.max(np.abs(spectrum[outer]))) if outer.any() else 0.0
    if tail > 1e-12 * scale:
        logger.error(f"compose_shift spectral tail {tail:.3e} on grid {m}")
        raise ShiftTooLargeError(
            f"shift too large for the collocation grid: tail {tail:.3e} relative to {scale:.3e}",
            {"tail": tail, "grid": m})

    idx = [np.r_[m - n_out:m, 0:n_out + 1] for _ in range(d)]
    coef = spectrum[np.ix_(*idx, np.arange(len(basis)))]
    return f._like(coef, n_out, basis).symmetrized()


def compose_vector(components: Sequence[FourierTaylorSeries], shift: Shift,
                   fourier_cutoff: Optional[int] = None) -> Tuple[FourierTaylorSeries, ...]:
    return tuple(compose_shift(c, shift, fourier_cutoff) for c in components)


def _max_diff(a: Sequence[FourierTaylorSeries], b: Sequence[FourierTaylorSeries]) -> float:
    return max(x.max_abs_diff(y) for x, y in zip(a, b))


def invert_near_identity(f: Shift, fourier_cutoff: Optional[int] = None,
                         max_iter: Optional[int] = None, tol: Optional[float] = None):
    """Return g with (id + f) o (id + g) = id by iterating g <- -f o (id + g)."""
    comps = [s for s in f if s is not None]
    if not comps:
        raise SeriesValidationError("invert_near_identity needs at least one component")
    template = comps[0]
    d = template.dim
    f = [s if s is not None else template.zeros_like() for s in list(f) + [None] * (2 * d - len(f))]
    n_out = max(s.fourier_cutoff for s in f) if fourier_cutoff is None else fourier_cutoff
    f = [s.project(n_out) for s in f]
    max_iter = max_iter or settings.INVERSION_MAX_ITER
    tol = tol or settings.INVERSION_TOL

    if all(s.is_zero() for s in f):
        return tuple(f)
    g = [-s for s in f]
    last = np.inf
    growth = 0
    for it in range(max_iter):
        new = [-compose_shift(s, g, n_out) for s in f]
        diff = _max_diff(new, g)
        g = new
        logger.debug(f"inversion iterate {it}: update {diff:.3e}")
        scale = 1.0 + max(float(np.abs(s.coef).sum()) for s in g)
        if diff <= tol * scale:
            return tuple(g)
        if diff >= last:
            growth += 1
            if growth >= 2:
                if last <= STAGNATION_FLOOR * scale:
                    return tuple(g)
                break
        else:
            growth = 0
        last = diff
    logger.error(f"near-identity inversion failed to contract, last update {last:.3e}")
    raise InversionError(f"no contraction within {max_iter} iterations (last update {last:.3e})",
                         {"last_update": float(last)})


def inversion_residual(f: Shift, g: Shift, fourier_cutoff: Optional[int] = None) -> float:
    """Max coefficient of (id + f) o (id + g) - id."""
    comp = [gi + compose_shift(fi, g, fourier_cutoff) for fi, gi in zip(f, g)]
    return max(float(np.max(np.abs(c.coef), initial=0.0)) for c in comp)
