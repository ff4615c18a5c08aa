"""
Increasing Covers
Interlaced geometric intervals (a_n, b_n) of the half line with inner intervals and gap parameters
"""
import logging
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from kamlab.errors import InfeasibleCoverError, ModelValidationError

logger = logging.getLogger(__name__)


class CoverSpec(BaseModel):
    lo: int
    hi: int
    growth: float = Field(..., gt=1.0)
    overlap: float = Field(..., gt=0.0, lt=1.0)
    inner: float = Field(default=0.25, gt=0.0, lt=0.5)  # margin of I' as a fraction of |I|
    a: List[float]
    b: List[float]

    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def left(self, n: int) -> float:
        return self.growth ** n * (1.0 - self.overlap)

    def right(self, n: int) -> float:
        return self.growth ** n * (self.growth + self.overlap)

    def interval(self, n: int) -> Tuple[float, float]:
        if not self.lo <= n <= self.hi:
            raise ModelValidationError(f"interval {n} is outside the stored range [{self.lo}, {self.hi}]")
        return self.a[n - self.lo], self.b[n - self.lo]

    def inner_interval(self, n: int) -> Tuple[float, float]:
        a, b = self.interval(n)
        margin = self.inner * (b - a)
        return a + margin, b - margin

    def gap(self, m: int) -> float:
        """u with a_m - u > b_(m-2) and b_(m+1) + u < a_(m+3)."""
        return 0.5 * min(self.left(m) - self.right(m - 2), self.left(m + 3) - self.right(m + 1))

    def containing(self, x: float) -> List[int]:
        return [n for n in self.indices() if self.a[n - self.lo] < x < self.b[n - self.lo]]

    def chain_holds(self) -> bool:
        """a_n < b_(n-1) < a_(n+1) < b_n over the stored range."""
        for n in range(self.lo + 1, self.hi):
            if not self.left(n) < self.right(n - 1) < self.left(n + 1) < self.right(n):
                return False
        return True


def build_cover(lo: int, hi: int, growth: float, overlap: float = 0.1, inner: float = 0.25) -> CoverSpec:
    """a_n = g^n (1 - o), b_n = g^n (g + o) for lo <= n <= hi."""
    if hi < lo:
        raise ModelValidationError(f"empty cover range [{lo}, {hi}]")
    if growth <= 1.0:
        raise InfeasibleCoverError(f"growth {growth} must exceed 1")
    if not 0.0 < overlap < 1.0:
        raise InfeasibleCoverError(f"overlap {overlap} must lie in (0, 1)")
    # b_(n-1) < a_(n+1) and the gap conditions both reduce to g^2 (1 - o) > g + o
    slack = growth ** 2 * (1.0 - overlap) - growth - overlap
    if slack <= 0:
        logger.error(f"infeasible cover: growth {growth}, overlap {overlap}")
        raise InfeasibleCoverError(f"growth {growth} with overlap {overlap} breaks the interlacing chain",
                                   {"growth": growth, "overlap": overlap, "slack": slack})
    n = np.arange(lo, hi + 1, dtype=float)
    a = growth ** n * (1.0 - overlap)
    b = growth ** n * (growth + overlap)
    cover = CoverSpec(lo=lo, hi=hi, growth=growth, overlap=overlap, inner=inner, a=a.tolist(), b=b.tolist())
    if not cover.chain_holds():
        raise InfeasibleCoverError("interlacing chain fails in floating point", {"growth": growth})
    logger.info(f"cover of {hi - lo + 1} intervals from {a[0]:.3e} to {b[-1]:.3e}")
    return cover
