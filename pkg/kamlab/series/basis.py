"""
Monomial Basis
Graded exponent tables shared by every truncated series in a workspace
"""
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np


def _compositions(nvars: int, degree: int) -> List[Tuple[int, ...]]:
    if nvars == 0:
        return [()]
    out = []
    for head in range(degree + 1):
        for tail in _compositions(nvars - 1, degree - head):
            out.append((head,) + tail)
    return out


class MonomialBasis:
    """Exponents alpha with |alpha| <= degree, optionally with the first `head`
    variables limited to a partial degree `head_degree`.

    Ordering is graded (total degree first), so slicing by degree is cheap.
    """

    def __init__(self, nvars: int, degree: int, head: int = 0, head_degree: Optional[int] = None):
        if nvars < 1 or degree < 0:
            raise ValueError(f"invalid basis ({nvars}, {degree})")
        self.nvars = nvars
        self.degree = degree
        self.head = head
        self.head_degree = degree if head_degree is None else min(head_degree, degree)

        exps = [
            a for a in _compositions(nvars, degree)
            if sum(a[:head]) <= self.head_degree
        ]
        exps.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
        self.exponents = np.array(exps, dtype=np.int64).reshape(len(exps), nvars)
        self.index: Dict[Tuple[int, ...], int] = {a: i for i, a in enumerate(exps)}
        self.degrees = self.exponents.sum(axis=1)
        self.head_degrees = self.exponents[:, :head].sum(axis=1) if head else np.zeros(len(exps), dtype=np.int64)
        self._mul = None
        self._deriv: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def __len__(self) -> int:
        return len(self.exponents)

    @property
    def key(self) -> Tuple[int, int, int, int]:
        return (self.nvars, self.degree, self.head, self.head_degree)

    def __eq__(self, other) -> bool:
        return isinstance(other, MonomialBasis) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def contains(self, alpha) -> bool:
        return tuple(int(x) for x in alpha) in self.index

    def multiplication_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index triples (i, j, k) with alpha_i + alpha_j = alpha_k inside the basis."""
        if self._mul is None:
            ii, jj, kk = [], [], []
            exps = [tuple(e) for e in self.exponents.tolist()]
            for i, a in enumerate(exps):
                for j, b in enumerate(exps):
                    k = self.index.get(tuple(x + y for x, y in zip(a, b)))
                    if k is not None:
                        ii.append(i)
                        jj.append(j)
                        kk.append(k)
            self._mul = (np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64), np.array(kk, dtype=np.int64))
        return self._mul

    def derivative_table(self, var: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(source, target, factor): d/dx_var maps monomial source to factor * target."""
        if var not in self._deriv:
            src, dst, fac = [], [], []
            for i, a in enumerate(self.exponents.tolist()):
                if a[var] == 0:
                    continue
                b = list(a)
                b[var] -= 1
                src.append(i)
                dst.append(self.index[tuple(b)])
                fac.append(a[var])
            self._deriv[var] = (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), np.array(fac, dtype=float))
        return self._deriv[var]

    def powers(self, points: np.ndarray) -> np.ndarray:
        """Monomial values x^alpha for points of shape (P, nvars) -> (P, n_mon)."""
        points = np.atleast_2d(np.asarray(points))
        out = np.ones((points.shape[0], len(self)), dtype=np.result_type(points.dtype, float))
        for v in range(self.nvars):
            e = self.exponents[:, v]
            if e.any():
                out = out * points[:, v:v + 1] ** e[None, :]
        return out

    def remap_to(self, other: "MonomialBasis") -> Tuple[np.ndarray, np.ndarray]:
        """Positions (src, dst) of monomials shared with a basis over the same variables."""
        if other.nvars != self.nvars:
            raise ValueError("bases act on different variable counts")
        src, dst = [], []
        for i, a in enumerate(self.exponents.tolist()):
            k = other.index.get(tuple(a))
            if k is not None:
                src.append(i)
                dst.append(k)
        return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


@lru_cache(maxsize=64)
def monomial_basis(nvars: int, degree: int, head: int = 0, head_degree: Optional[int] = None) -> MonomialBasis:
    return MonomialBasis(nvars, degree, head, head_degree)
