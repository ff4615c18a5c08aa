"""
Fourier-Taylor Series
Truncated series sum a[n, alpha] exp(2 pi i <n, phi>) x^alpha on a fixed workspace
"""
import logging
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.signal import convolve

from kamlab.errors import ConfigValidationError, NormOverflowError, SeriesValidationError
from kamlab.series.basis import MonomialBasis, monomial_basis

logger = logging.getLogger(__name__)

TermKey = Tuple[Tuple[int, ...], Tuple[int, ...]]
Scalar = Union[int, float, complex]


class NormWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho: float = Field(..., gt=0.0, description="angle strip width")
    delta: float = Field(..., gt=0.0, description="action radius")

    def shrink(self, h: float) -> "NormWeights":
        """Weights on the domain narrowed by h in both the strip and the action radius."""
        if not 0 <= h < min(self.rho, self.delta):
            logger.error(f"cannot shrink rho={self.rho}, delta={self.delta} by h={h}")
            raise ConfigValidationError(f"shrink h={h} must lie in [0, min(rho, delta))", {"field": "h"})
        return NormWeights(rho=self.rho - h, delta=self.delta - h)


@lru_cache(maxsize=32)
def mode_grid(fourier_cutoff: int, dim: int) -> np.ndarray:
    """Integer modes n laid out like the coefficient array, shape (2N+1,)*d + (d,)."""
    side = 2 * fourier_cutoff + 1
    grid = np.indices((side,) * dim).astype(np.int64) - fourier_cutoff
    grid = np.moveaxis(grid, 0, -1)
    grid.setflags(write=False)
    return grid


def _support_box(arr: np.ndarray):
    """Per-axis (lo, hi) index bounds of the nonzero entries, or None."""
    bounds = []
    for axis in range(arr.ndim):
        other = tuple(a for a in range(arr.ndim) if a != axis)
        mask = np.any(arr != 0, axis=other) if other else arr != 0
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return None
        bounds.append((int(idx[0]), int(idx[-1])))
    return bounds


class FourierTaylorSeries:
    """Dense-backed truncated Fourier-Taylor series in angles phi and polynomial variables.

    The coefficient array has shape (2N+1,)*dim + (n_monomials,), with the Fourier
    index offset by N. Instances are immutable.
    """

    def __init__(
        self,
        dim: int,
        fourier_cutoff: int,
        degree_cutoff: int,
        coef: Optional[np.ndarray] = None,
        basis: Optional[MonomialBasis] = None,
    ):
        if dim < 1 or fourier_cutoff < 0 or degree_cutoff < 0:
            raise SeriesValidationError(f"invalid workspace d={dim}, N={fourier_cutoff}, q={degree_cutoff}")
        self.dim = dim
        self.fourier_cutoff = fourier_cutoff
        self.basis = basis if basis is not None else self._make_basis(dim, degree_cutoff)
        self.degree_cutoff = self.basis.degree
        shape = (2 * fourier_cutoff + 1,) * dim + (len(self.basis),)
        if coef is None:
            arr = np.zeros(shape, dtype=complex)
        else:
            arr = np.array(coef, dtype=complex)
            if arr.shape != shape:
                raise SeriesValidationError(f"coefficient array shape {arr.shape} does not match workspace {shape}")
        arr.setflags(write=False)
        self.coef = arr

    # --- construction -------------------------------------------------

    @staticmethod
    def _make_basis(dim: int, degree_cutoff: int) -> MonomialBasis:
        return monomial_basis(dim, degree_cutoff)

    @property
    def nvars(self) -> int:
        return self.basis.nvars

    def _like(self, coef: np.ndarray, fourier_cutoff: Optional[int] = None,
              basis: Optional[MonomialBasis] = None) -> "FourierTaylorSeries":
        basis = basis or self.basis
        n = self.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
        return FourierTaylorSeries(self.dim, n, basis.degree, coef, basis=basis)

    def zeros_like(self) -> "FourierTaylorSeries":
        return self._like(np.zeros_like(self.coef))

    @classmethod
    def zeros(cls, dim: int, fourier_cutoff: int = 0, degree_cutoff: int = 0) -> "FourierTaylorSeries":
        return cls(dim, fourier_cutoff, degree_cutoff)

    @classmethod
    def from_terms(cls, dim: int, fourier_cutoff: int, degree_cutoff: int,
                   terms: Mapping[TermKey, Scalar], tol: float = 1e-14) -> "FourierTaylorSeries":
        """Build from a sparse {(n, alpha): coefficient} mapping, enforcing cutoffs and reality."""
        out = cls(dim, fourier_cutoff, degree_cutoff)
        return out._from_mapping(terms, tol)

    def _from_mapping(self, terms: Mapping[TermKey, Scalar], tol: float):
        arr = np.zeros_like(self.coef, dtype=complex)
        n_cut = self.fourier_cutoff
        for (n, alpha), value in terms.items():
            n = tuple(int(x) for x in n)
            alpha = tuple(int(x) for x in alpha)
            if len(n) != self.dim or len(alpha) != self.nvars:
                raise SeriesValidationError(f"term {(n, alpha)} has wrong dimension")
            if max((abs(x) for x in n), default=0) > n_cut:
                raise SeriesValidationError(f"term {(n, alpha)} exceeds Fourier cutoff {n_cut}")
            k = self.basis.index.get(alpha)
            if k is None:
                raise SeriesValidationError(f"term {(n, alpha)} exceeds the degree cutoffs")
            arr[tuple(x + n_cut for x in n) + (k,)] += complex(value)
        result = self._like(arr)
        mirror = np.conj(np.flip(arr, axis=tuple(range(self.dim))))
        bad = np.abs(arr - mirror) > tol * np.maximum(1.0, np.abs(arr))
        if bad.any():
            pos = np.argwhere(bad)[0]
            n = tuple(int(x) - n_cut for x in pos[:-1])
            alpha = tuple(int(x) for x in self.basis.exponents[pos[-1]])
            raise SeriesValidationError(
                f"reality violated at n={n}, alpha={alpha}: coefficient of -n must be the conjugate")
        return result

    @classmethod
    def constant(cls, dim: int, value: float, fourier_cutoff: int = 0, degree_cutoff: int = 0):
        zero = (0,) * dim
        return cls.from_terms(dim, fourier_cutoff, degree_cutoff, {(zero, zero): value})

    @classmethod
    def polynomial(cls, dim: int, degree_cutoff: int, coeffs: Mapping[Tuple[int, ...], float],
                   fourier_cutoff: int = 0) -> "FourierTaylorSeries":
        zero = (0,) * dim
        return cls.from_terms(dim, fourier_cutoff, degree_cutoff, {(zero, tuple(a)): v for a, v in coeffs.items()})

    @classmethod
    def linear(cls, vector: Sequence[float], fourier_cutoff: int = 0, degree_cutoff: int = 1):
        dim = len(vector)
        coeffs = {}
        for i, v in enumerate(vector):
            if v != 0:
                alpha = [0] * dim
                alpha[i] = 1
                coeffs[tuple(alpha)] = float(v)
        return cls.polynomial(dim, degree_cutoff, coeffs, fourier_cutoff)

    @classmethod
    def variable(cls, dim: int, i: int, fourier_cutoff: int = 0, degree_cutoff: int = 1):
        e = [0.0] * dim
        e[i] = 1.0
        return cls.linear(e, fourier_cutoff, degree_cutoff)

    @classmethod
    def cosine(cls, mode: Sequence[int], alpha: Sequence[int], amplitude: float,
               fourier_cutoff: int, degree_cutoff: int) -> "FourierTaylorSeries":
        """amplitude * cos(2 pi <mode, phi>) x^alpha."""
        dim = len(mode)
        n = tuple(int(x) for x in mode)
        neg = tuple(-x for x in n)
        a = tuple(int(x) for x in alpha)
        if n == neg:
            return cls.from_terms(dim, fourier_cutoff, degree_cutoff, {(n, a): amplitude})
        return cls.from_terms(dim, fourier_cutoff, degree_cutoff, {(n, a): amplitude / 2, (neg, a): amplitude / 2})

    # --- inspection ---------------------------------------------------

    def modes(self) -> np.ndarray:
        return mode_grid(self.fourier_cutoff, self.dim)

    def coeff(self, n: Sequence[int], alpha: Sequence[int]) -> complex:
        n = tuple(int(x) for x in n)
        if max((abs(x) for x in n), default=0) > self.fourier_cutoff:
            return 0j
        k = self.basis.index.get(tuple(int(x) for x in alpha))
        if k is None:
            return 0j
        return complex(self.coef[tuple(x + self.fourier_cutoff for x in n) + (k,)])

    def terms(self, tol: float = 0.0) -> Dict[TermKey, complex]:
        out = {}
        for pos in np.argwhere(np.abs(self.coef) > tol):
            n = tuple(int(x) - self.fourier_cutoff for x in pos[:-1])
            alpha = tuple(int(x) for x in self.basis.exponents[pos[-1]])
            out[(n, alpha)] = complex(self.coef[tuple(pos)])
        return out

    def is_zero(self, tol: float = 0.0) -> bool:
        return not np.any(np.abs(self.coef) > tol)

    def is_real(self, tol: float = 1e-12) -> bool:
        mirror = np.conj(np.flip(self.coef, axis=tuple(range(self.dim))))
        return bool(np.all(np.abs(self.coef - mirror) <= tol * np.maximum(1.0, np.abs(self.coef))))

    def symmetrized(self) -> "FourierTaylorSeries":
        mirror = np.conj(np.flip(self.coef, axis=tuple(range(self.dim))))
        return self._like(0.5 * (self.coef + mirror))

    def max_abs_diff(self, other: "FourierTaylorSeries") -> float:
        a, b = self._common(other)
        return float(np.max(np.abs(a.coef - b.coef), initial=0.0))

    def __repr__(self) -> str:
        kind = type(self).__name__
        return f"{kind}(d={self.dim}, N={self.fourier_cutoff}, q={self.degree_cutoff}, nnz={int(np.count_nonzero(self.coef))})"

    # --- workspace handling -------------------------------------------

    def project(self, fourier_cutoff: Optional[int] = None, basis: Optional[MonomialBasis] = None):
        """Pad or cut to a new workspace; monomials absent from the target basis are dropped."""
        n_new = self.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
        basis = basis or self.basis
        if n_new == self.fourier_cutoff and basis == self.basis:
            return self
        shape = (2 * n_new + 1,) * self.dim + (len(basis),)
        arr = np.zeros(shape, dtype=complex)
        m = min(n_new, self.fourier_cutoff)
        src_f = tuple(slice(self.fourier_cutoff - m, self.fourier_cutoff + m + 1) for _ in range(self.dim))
        dst_f = tuple(slice(n_new - m, n_new + m + 1) for _ in range(self.dim))
        if basis == self.basis:
            arr[dst_f] = self.coef[src_f]
        else:
            src, dst = self.basis.remap_to(basis)
            arr[dst_f + (dst,)] = self.coef[src_f + (src,)]
        return self._like(arr, n_new, basis)

    def with_workspace(self, fourier_cutoff: int, degree_cutoff: int) -> "FourierTaylorSeries":
        return self.project(fourier_cutoff, self._make_basis(self.dim, degree_cutoff))

    def _common(self, other: "FourierTaylorSeries"):
        if not isinstance(other, FourierTaylorSeries) or other.dim != self.dim or other.nvars != self.nvars:
            raise SeriesValidationError(f"dimension mismatch: {self!r} vs {other!r}")
        n = max(self.fourier_cutoff, other.fourier_cutoff)
        basis = self.basis if self.basis.degree >= other.basis.degree else other.basis
        if self.basis.head and other.basis.head_degree > basis.head_degree:
            basis = monomial_basis(basis.nvars, basis.degree, basis.head, other.basis.head_degree)
        return self.project(n, basis), other.project(n, basis)

    # --- algebra --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            arr = np.array(self.coef)
            arr[(self.fourier_cutoff,) * self.dim + (0,)] += other
            return self._like(arr)
        a, b = self._common(other)
        return a._like(a.coef + b.coef)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, lam: Scalar) -> "FourierTaylorSeries":
        return self._like(self.coef * lam)

    def __mul__(self, other):
        if isinstance(other, FourierTaylorSeries):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, lam):
        return self.scale(1.0 / lam)

    def mul(self, other: "FourierTaylorSeries", fourier_cutoff: Optional[int] = None,
            basis: Optional[MonomialBasis] = None) -> "FourierTaylorSeries":
        """Exact coefficient convolution projected onto the output workspace."""
        a, b = self._common(other)
        n_out = a.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
        basis = basis or a.basis
        a = a.project(basis=basis)
        b = b.project(basis=basis)
        n_a = a.fourier_cutoff
        ii, jj, kk = basis.multiplication_table()
        out = np.zeros((2 * n_out + 1,) * self.dim + (len(basis),), dtype=complex)
        boxes_a = [_support_box(a.coef[..., m]) for m in range(len(basis))]
        boxes_b = [_support_box(b.coef[..., m]) for m in range(len(basis))]
        for i, j, k in zip(ii, jj, kk):
            box_a, box_b = boxes_a[i], boxes_b[j]
            if box_a is None or box_b is None:
                continue
            sub_a = a.coef[tuple(slice(lo, hi + 1) for lo, hi in box_a) + (i,)]
            sub_b = b.coef[tuple(slice(lo, hi + 1) for lo, hi in box_b) + (j,)]
            full = convolve(sub_a, sub_b, method="direct")
            src, dst = [], []
            for (la, _), (lb, _), length in zip(box_a, box_b, full.shape):
                start = (la - n_a) + (lb - n_a)
                t_lo = max(0, -n_out - start)
                t_hi = min(length - 1, n_out - start)
                if t_lo > t_hi:
                    break
                src.append(slice(t_lo, t_hi + 1))
                dst.append(slice(start + t_lo + n_out, start + t_hi + n_out + 1))
            else:
                out[tuple(dst) + (k,)] += full[tuple(src)]
        return self._like(out, n_out, basis).symmetrized()

    def power(self, k: int) -> "FourierTaylorSeries":
        result = self._like(np.zeros_like(self.coef)) + 1.0
        for _ in range(k):
            result = result.mul(self)
        return result

    def times_variable(self, var: int) -> "FourierTaylorSeries":
        """Multiply by the polynomial variable x_var; the top degree falls off."""
        arr = np.zeros_like(self.coef)
        for i, a in enumerate(self.basis.exponents.tolist()):
            b = list(a)
            b[var] += 1
            k = self.basis.index.get(tuple(b))
            if k is not None:
                arr[..., k] = self.coef[..., i]
        return self._like(arr)

    # --- calculus -------------------------------------------------------

    def d_angle(self, i: int) -> "FourierTaylorSeries":
        if not 0 <= i < self.dim:
            raise IndexError(f"angle index {i} out of range")
        factor = 2j * np.pi * self.modes()[..., i]
        return self._like(self.coef * factor[..., None])

    def d_action(self, i: int) -> "FourierTaylorSeries":
        if not 0 <= i < self.nvars:
            raise IndexError(f"action index {i} out of range")
        src, dst, fac = self.basis.derivative_table(i)
        arr = np.zeros_like(self.coef)
        arr[..., dst] = self.coef[..., src] * fac
        return self._like(arr)

    def differentiate(self, kind: str, i: int) -> "FourierTaylorSeries":
        if kind == "angle":
            return self.d_angle(i)
        if kind == "action":
            return self.d_action(i)
        raise ValueError(f"unknown variable kind {kind!r}")

    def angle_gradient(self):
        return tuple(self.d_angle(i) for i in range(self.dim))

    def action_gradient(self):
        return tuple(self.d_action(i) for i in range(self.dim))

    def mean_value(self) -> "FourierTaylorSeries":
        arr = np.zeros_like(self.coef)
        center = (self.fourier_cutoff,) * self.dim
        arr[center] = self.coef[center]
        return self._like(arr)

    def oscillating_part(self) -> "FourierTaylorSeries":
        return self - self.mean_value()

    def degree_part(self, lo: int, hi: Optional[int] = None) -> "FourierTaylorSeries":
        """Keep monomials with lo <= |alpha| <= hi (hi defaults to lo)."""
        hi = lo if hi is None else hi
        mask = (self.basis.degrees >= lo) & (self.basis.degrees <= hi)
        return self._like(self.coef * mask)

    def truncate_fourier(self, k: int) -> "FourierTaylorSeries":
        if k < 0:
            raise ValueError("Fourier truncation order must be nonnegative")
        keep = np.max(np.abs(self.modes()), axis=-1) <= k
        return self._like(self.coef * keep[..., None])

    def translate_angles(self, v: Sequence[float]) -> "FourierTaylorSeries":
        """f(phi + v, x) for a constant vector v."""
        phase = np.exp(2j * np.pi * (self.modes() @ np.asarray(v, dtype=float)))
        return self._like(self.coef * phase[..., None])

    # --- norms ----------------------------------------------------------

    def majorant_norm(self, weights: NormWeights) -> float:
        """sum |a| exp(2 pi |n|_1 rho) delta^|alpha|."""
        l1 = np.abs(self.modes()).sum(axis=-1)
        with np.errstate(over="ignore"):
            fw = np.exp(2 * np.pi * weights.rho * l1)
            pw = float(weights.delta) ** self.basis.degrees.astype(float)
        if not (np.all(np.isfinite(fw)) and np.all(np.isfinite(pw))):
            logger.error(f"majorant weights overflow at rho={weights.rho}, delta={weights.delta}")
            raise NormOverflowError(f"norm weights overflow for rho={weights.rho}, delta={weights.delta}")
        return float(np.sum(np.abs(self.coef) * fw[..., None] * pw))

    def coefficient_norm(self, delta: float = 1.0) -> float:
        """sum |a| delta^|alpha|, the size of the coefficients with no angle weight."""
        return float(np.sum(np.abs(self.coef) * float(delta) ** self.basis.degrees.astype(float)))

    # --- evaluation -----------------------------------------------------

    def _variables(self, r, c=None) -> np.ndarray:
        return np.atleast_2d(np.asarray(r, dtype=float))

    def evaluate_complex(self, phi, r, c=None, chunk: int = 512) -> np.ndarray:
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        xs = self._variables(r, c)
        if xs.shape[0] == 1 and phi.shape[0] > 1:
            xs = np.repeat(xs, phi.shape[0], axis=0)
        if phi.shape[0] == 1 and xs.shape[0] > 1:
            phi = np.repeat(phi, xs.shape[0], axis=0)
        modes = self.modes().reshape(-1, self.dim).astype(float)
        flat = self.coef.reshape(-1, len(self.basis))
        live = np.any(flat != 0, axis=1)
        modes, flat = modes[live], flat[live]
        out = np.empty(phi.shape[0], dtype=complex)
        for start in range(0, phi.shape[0], chunk):
            sl = slice(start, start + chunk)
            phase = np.exp(2j * np.pi * phi[sl] @ modes.T)
            out[sl] = np.sum((phase @ flat) * self.basis.powers(xs[sl]), axis=1)
        return out

    def evaluate(self, phi, r, c=None):
        values = self.evaluate_complex(phi, r, c).real
        scalar = np.ndim(phi) <= 1 and np.ndim(r) <= 1
        return float(values[0]) if scalar else values

    # --- action recentering ---------------------------------------------

    def shift_actions(self, c: Sequence[float]) -> "FourierTaylorSeries":
        """g(phi, rho) = f(phi, c + rho) for a numeric point c."""
        c = np.asarray(c, dtype=float)
        exps = self.basis.exponents.tolist()
        mat = np.zeros((len(exps), len(exps)))
        for i, a in enumerate(exps):
            for j, g in enumerate(exps):
                if all(gv <= av for gv, av in zip(g, a)):
                    w = 1.0
                    for av, gv, cv in zip(a, g, c):
                        w *= comb(av, gv) * cv ** (av - gv)
                    mat[i, j] = w
        return self._like(self.coef @ mat)

    def recenter(self, action_cutoff: Optional[int] = None) -> "CenteredSeries":
        """Re-expand x^alpha = (rho + c)^alpha as a series in (rho, c)."""
        q = self.degree_cutoff
        q_r = q if action_cutoff is None else action_cutoff
        target = CenteredSeries.zeros(self.dim, self.fourier_cutoff, q_r, q)
        mat = _recenter_matrix(self.basis, target.basis)
        return target._like(self.coef @ mat)

    # --- serialization ----------------------------------------------------

    def to_payload(self, tol: float = 0.0):
        from kamlab.schemas.series import SeriesPayload, SeriesTerm

        terms = [
            SeriesTerm(n=list(n), alpha=list(a), re=v.real, im=v.imag)
            for (n, a), v in sorted(self.terms(tol).items())
        ]
        return SeriesPayload(d=self.dim, N=self.fourier_cutoff, q=self.degree_cutoff, terms=terms)

    @classmethod
    def from_payload(cls, payload) -> "FourierTaylorSeries":
        terms = {(tuple(t.n), tuple(t.alpha)): complex(t.re, t.im) for t in payload.terms}
        return cls.from_terms(payload.d, payload.N, payload.q, terms)


@lru_cache(maxsize=32)
def _recenter_matrix(source: MonomialBasis, target: MonomialBasis) -> np.ndarray:
    d = source.nvars
    mat = np.zeros((len(source), len(target)))
    for i, a in enumerate(source.exponents.tolist()):
        for gamma in np.ndindex(*[x + 1 for x in a]):
            rest = tuple(x - g for x, g in zip(a, gamma))
            k = target.index.get(tuple(gamma) + rest)
            if k is None:
                continue
            w = 1
            for x, g in zip(a, gamma):
                w *= comb(x, g)
            mat[i, k] = w
    return mat


class CenteredSeries(FourierTaylorSeries):
    """Series in angles and the 2d polynomial variables (rho, c) with rho = r - c.

    Variables 0..d-1 are rho, d..2d-1 are c. |rho-degree| <= action_cutoff and total
    degree <= degree_cutoff.
    """

    def __init__(self, dim: int, fourier_cutoff: int, action_cutoff: int, degree_cutoff: int,
                 coef: Optional[np.ndarray] = None, basis: Optional[MonomialBasis] = None):
        basis = basis if basis is not None else monomial_basis(2 * dim, degree_cutoff, dim, action_cutoff)
        super().__init__(dim, fourier_cutoff, degree_cutoff, coef, basis=basis)
        self.action_cutoff = self.basis.head_degree

    @classmethod
    def zeros(cls, dim: int, fourier_cutoff: int = 0, action_cutoff: int = 0, degree_cutoff: int = 0):
        return cls(dim, fourier_cutoff, action_cutoff, degree_cutoff)

    @classmethod
    def from_terms(cls, dim: int, fourier_cutoff: int, action_cutoff: int, degree_cutoff: int,
                   terms: Mapping[TermKey, Scalar], tol: float = 1e-14) -> "CenteredSeries":
        return cls(dim, fourier_cutoff, action_cutoff, degree_cutoff)._from_mapping(terms, tol)

    def _like(self, coef, fourier_cutoff=None, basis=None) -> "CenteredSeries":
        basis = basis or self.basis
        n = self.fourier_cutoff if fourier_cutoff is None else fourier_cutoff
        return CenteredSeries(self.dim, n, basis.head_degree, basis.degree, coef, basis=basis)

    def _variables(self, r, c=None) -> np.ndarray:
        r = np.atleast_2d(np.asarray(r, dtype=float))
        c = np.atleast_2d(np.asarray(c, dtype=float))
        if r.shape[0] != c.shape[0]:
            r, c = np.broadcast_arrays(r, c)
        return np.hstack([r - c, c])

    def evaluate(self, phi, r, c=None):
        if c is None:
            raise ValueError("centered series need the center c")
        values = self.evaluate_complex(phi, r, c).real
        scalar = np.ndim(phi) <= 1 and np.ndim(r) <= 1 and np.ndim(c) <= 1
        return float(values[0]) if scalar else values

    def action_degree_part(self, lo: int, hi: Optional[int] = None) -> "CenteredSeries":
        """Keep monomials whose rho-degree lies in [lo, hi]; this is the O^lo(r - c) projection."""
        hi = self.action_cutoff if hi is None else hi
        deg = self.basis.head_degrees
        return self._like(self.coef * ((deg >= lo) & (deg <= hi)))

    def d_rho(self, i: int) -> "CenteredSeries":
        return self.d_action(i)

    def d_center(self, i: int) -> "CenteredSeries":
        return self.d_action(self.dim + i)

    def at_center(self) -> FourierTaylorSeries:
        """Series in (phi, c) obtained by setting rho = 0."""
        flat = FourierTaylorSeries.zeros(self.dim, self.fourier_cutoff, self.degree_cutoff)
        arr = np.zeros_like(flat.coef)
        for i, a in enumerate(self.basis.exponents.tolist()):
            if any(a[: self.dim]):
                continue
            arr[..., flat.basis.index[tuple(a[self.dim:])]] += self.coef[..., i]
        return flat._like(arr)

    def to_payload(self, tol: float = 0.0):
        payload = super().to_payload(tol)
        payload.q_r = self.action_cutoff
        return payload

    @classmethod
    def from_payload(cls, payload) -> "CenteredSeries":
        terms = {(tuple(t.n), tuple(t.alpha)): complex(t.re, t.im) for t in payload.terms}
        q_r = payload.q if payload.q_r is None else payload.q_r
        return cls.from_terms(payload.d, payload.N, q_r, payload.q, terms)


def vector_norm(components: Iterable[FourierTaylorSeries], weights: NormWeights) -> float:
    """Max-component majorant norm of a vector of series."""
    return max((s.majorant_norm(weights) for s in components), default=0.0)
