"""
Grid Norms
Finite-difference C^s estimates on uniform grids
"""
import logging
from typing import Callable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def derivative_sups(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, s: int,
                    points: int = 4001) -> List[float]:
    """sup |f^(j)| on [lo, hi] for j = 0..s by repeated central differences."""
    if hi <= lo:
        raise ValueError("empty grid interval")
    x = np.linspace(lo, hi, points)
    values = np.asarray(fn(x), dtype=float)
    sups = [float(np.max(np.abs(values)))]
    for _ in range(s):
        values = np.gradient(values, x, edge_order=2)
        sups.append(float(np.max(np.abs(values))))
    return sups


def cs_norm(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, s: int, points: int = 4001) -> float:
    return max(derivative_sups(fn, lo, hi, s, points))


def angle_weighted_norm(sups: Sequence[float], frequency: float, s: int) -> float:
    """C^s norm of A(x) cos(2 pi theta) where every angle derivative brings 2 pi frequency."""
    w = 2 * np.pi * abs(frequency)
    return max(sups[j] * w ** k for j in range(s + 1) for k in range(s + 1 - j))
