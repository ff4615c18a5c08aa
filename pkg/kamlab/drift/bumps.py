"""
Plateau Bump Functions
f_1, f_2, f_3 constant on unions of consecutive cover intervals, with Liouville plateau frequency pairs
"""
import logging
from math import ceil, log10
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp, mpf
from pydantic import BaseModel, Field

from kamlab.arithmetic.liouville import build_liouville_pair, decimal_string, parse_decimal, witness_residuals
from kamlab.drift.cover import CoverSpec
from kamlab.errors import ConstructionError, ModelValidationError
from kamlab.kam.mollifier import smooth_step, smooth_step_derivative
from kamlab.schemas.arithmetic import FrequencyVector, LiouvilleSchedule
from kamlab.utils.grids import cs_norm

logger = logging.getLogger(__name__)

# f_1 is flat on I_3n u I_3n+1, f_2 on I_3n-1 u I_3n, f_3 on I_3n+1 u I_3n+2
FAMILY_OFFSET = {1: 0, 2: -1, 3: 1}
LINK_FAMILY = {0: 2, 1: 1, 2: 3}


class Plateau(BaseModel):
    family: int
    n: int
    first: int  # first cover interval of the plateau
    start: float
    end: float
    gap: float
    bound: float
    value: float  # fbar
    exact: str  # fbar + omega_family as an exact decimal


class PlateauPair(BaseModel):
    interval: int
    coords: List[int]  # families in the order of vector.omega
    vector: FrequencyVector


class BumpFunctions(BaseModel):
    cover: CoverSpec
    omega: List[float]
    eps: float
    s: int
    eta: float
    sigma: Optional[float] = None
    plateaus: List[Plateau]
    pairs: List[PlateauPair]
    norms: Dict[int, float] = Field(default_factory=dict)

    def _family(self, i: int) -> List[Plateau]:
        return [p for p in self.plateaus if p.family == i]

    def _zeta(self, y):
        return smooth_step(np.asarray(y) + 1.0, self.sigma)

    def _dzeta(self, y):
        return smooth_step_derivative(np.asarray(y) + 1.0, self.sigma)

    def f(self, i: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for p in self._family(i):
            out = out + p.value * (self._zeta((x - p.start) / p.gap) - self._zeta((x - p.end - p.gap) / p.gap))
        return out

    def df(self, i: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for p in self._family(i):
            out = out + p.value / p.gap * (self._dzeta((x - p.start) / p.gap)
                                           - self._dzeta((x - p.end - p.gap) / p.gap))
        return out

    def plateau_at(self, i: int, x: float) -> Optional[Plateau]:
        for p in self._family(i):
            if p.start <= x <= p.end:
                return p
        return None

    def pair_for(self, interval: int) -> PlateauPair:
        for pair in self.pairs:
            if pair.interval == interval:
                return pair
        raise ModelValidationError(f"no plateau pair stored for interval {interval}")


def _node(m: int) -> Tuple[int, int]:
    """Left plateau of the link on interval m; the right one is _node(m + 1)."""
    return LINK_FAMILY[m % 3], m // 3


def _plateau_geometry(cover: CoverSpec, family: int, n: int) -> Tuple[int, float, float, float]:
    first = 3 * n + FAMILY_OFFSET[family]
    return first, cover.left(first), cover.right(first + 1), cover.gap(first)


def plateau_bound(eta: float, gap: float, n: int, s: int, gevrey: bool = False) -> float:
    """|fbar| < eta u^(|n| + s), or eta u^(u^-|n|) for the Gevrey schedule, with u capped at 1."""
    u = min(1.0, gap)
    if gevrey:
        return eta * u ** (u ** (-abs(n)))
    return eta * u ** (abs(n) + s)


def _exact(value) -> str:
    num, scale = parse_decimal(value)
    return decimal_string(num, scale)


def _seed_frequency(omega: float, bound: float) -> str:
    """omega + bound/2 as a short exact decimal."""
    num, scale = parse_decimal(omega)
    digits = max(scale, ceil(-log10(bound)) + 3)
    start = num * 10 ** (digits - scale) + int(round(bound / 2 * 10 ** digits))
    return decimal_string(start, digits)


def build_bumps(cover: CoverSpec, omega: Sequence[float], eps: float, s: int, eta: float,
                exponents: Sequence[float] = (6.0,), sigma: Optional[float] = None) -> BumpFunctions:
    """Plateau constants fbar linked into a chain of Liouville pairs over the stored cover range."""
    if len(omega) < 3 or any(w <= 0 for w in omega[:3]):
        raise ModelValidationError("the three plateau frequencies must be positive")
    if eps <= 0 or not 0 < eta < 1 or s < 0:
        raise ModelValidationError("need eps > 0, 0 < eta < 1 and s >= 0")
    omega = [float(w) for w in omega[:3]]
    gevrey = sigma is not None
    nodes = [_node(m) for m in range(cover.lo, cover.hi + 2)]

    plateaus: Dict[Tuple[int, int], Plateau] = {}

    def make_plateau(node, exact: str) -> Plateau:
        family, n = node
        first, start, end, gap = _plateau_geometry(cover, family, n)
        bound = plateau_bound(eta, gap, n, s, gevrey)
        with mp.workdps(len(exact) + 20):
            value = float(mpf(exact) - mpf(_exact(omega[family - 1])))
        if not 0 < value < bound:
            logger.error(f"plateau ({family}, {n}) value {value:.3e} violates bound {bound:.3e}")
            raise ConstructionError(f"plateau constant {value:.3e} for f_{family}, n={n} is outside (0, {bound:.3e})",
                                    {"family": family, "n": n, "bound": bound})
        return Plateau(family=family, n=n, first=first, start=start, end=end, gap=gap, bound=bound,
                       value=value, exact=exact)

    first_node = nodes[0]
    _, _, _, gap0 = _plateau_geometry(cover, *first_node)
    seed = _seed_frequency(omega[first_node[0] - 1], plateau_bound(eta, gap0, first_node[1], s, gevrey))
    plateaus[first_node] = make_plateau(first_node, seed)

    pairs: List[PlateauPair] = []
    for m, (left, right) in zip(range(cover.lo, cover.hi + 1), zip(nodes, nodes[1:])):
        base = plateaus[left].exact
        _, _, _, gap = _plateau_geometry(cover, *right)
        bound = plateau_bound(eta, gap, right[1], s, gevrey)
        with mp.workdps(len(base) + 40):
            f_prev = mpf(base)
            anchor = mp.nstr(mpf(_exact(omega[right[0] - 1])) + mpf(bound) / 2, int(-log10(bound)) + 25)
            start_digits = max(1, int(mp.ceil(mp.log10(4 * f_prev / mpf(bound)))) + 1)
        schedule = LiouvilleSchedule(exponents=list(exponents), base=base, anchor=anchor,
                                     start_digits=start_digits, depth=len(exponents))
        vector = build_liouville_pair(schedule)
        plateaus[right] = make_plateau(right, vector.exact[1])
        pairs.append(PlateauPair(interval=m, coords=[left[0], right[0]], vector=vector))
        logger.debug(f"interval {m}: Liouville link f_{left[0]} -> f_{right[0]}")

    bumps = BumpFunctions(cover=cover, omega=omega, eps=eps, s=s, eta=eta, sigma=sigma,
                          plateaus=sorted(plateaus.values(), key=lambda p: (p.family, p.n)), pairs=pairs)
    for i in (1, 2, 3):
        norm = max((edge_norm(bumps, p) for p in bumps._family(i)), default=0.0)
        if norm >= eps:
            raise ConstructionError(f"grid C^{s} norm of f_{i} is {norm:.3e}, not below {eps}",
                                    {"family": i, "norm": norm})
        bumps.norms[i] = norm
    logger.info(f"bumps built with {len(plateaus)} plateaus and {len(pairs)} Liouville pairs")
    return bumps


def edge_norm(bumps: BumpFunctions, p: Plateau, points: int = 20001) -> float:
    """Grid C^s norm of f_i over the rising and falling edges of one plateau."""
    def fn(x):
        return bumps.f(p.family, x)
    rising = cs_norm(fn, p.start - p.gap, p.start, bumps.s, points)
    return max(rising, cs_norm(fn, p.end, p.end + p.gap, bumps.s, points))


def check_plateaus(bumps: BumpFunctions, points: int = 1000) -> bool:
    """f_i == fbar on every stored plateau, sampled."""
    for p in bumps.plateaus:
        x = np.linspace(p.start, p.end, points)
        if not np.all(bumps.f(p.family, x) == p.value):
            return False
    return True


def check_witnesses(bumps: BumpFunctions, tol: float = 1e-15) -> bool:
    return all(max(witness_residuals(pair.vector), default=0.0) <= tol for pair in bumps.pairs)
