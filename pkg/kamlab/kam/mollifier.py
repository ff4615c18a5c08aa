"""
Smooth Plateau Profiles
The cut-off profile l and the step function shared with the bump construction
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


def flat_profile(t, sigma: Optional[float] = None) -> np.ndarray:
    """exp(-1/t) for t > 0 and 0 otherwise; with sigma the Gevrey profile exp(-t^(-1/(sigma-1)))."""
    t = np.asarray(t, dtype=float)
    positive = t > 0
    safe = np.where(positive, t, 1.0)
    power = 1.0 if sigma is None else 1.0 / (sigma - 1.0)
    with np.errstate(over="ignore", under="ignore"):
        return np.where(positive, np.exp(-safe ** (-power)), 0.0)


def smooth_step(y, sigma: Optional[float] = None) -> np.ndarray:
    """0 for y <= 0, 1 for y >= 1, smooth and monotone in between."""
    left = flat_profile(y, sigma)
    right = flat_profile(1.0 - np.asarray(y, dtype=float), sigma)
    return left / (left + right)


def smooth_step_derivative(y, sigma: Optional[float] = None) -> np.ndarray:
    """Closed-form derivative of smooth_step."""
    y = np.asarray(y, dtype=float)
    inside = (y > 0) & (y < 1)
    safe = np.where(inside, y, 0.5)
    p = 1.0 if sigma is None else 1.0 / (sigma - 1.0)
    left = flat_profile(safe, sigma)
    right = flat_profile(1.0 - safe, sigma)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        rate = p * safe ** (-p - 1) + p * (1.0 - safe) ** (-p - 1)
        value = rate * left * right / (left + right) ** 2
    return np.where(inside & np.isfinite(value), value, 0.0)


class MollifierSpec(BaseModel):
    """Even profile with l = 1 on [-inner, inner] and l = 0 off (-outer, outer)."""
    model_config = ConfigDict(frozen=True)

    inner: float = Field(default=0.25, gt=0.0)
    outer: float = Field(default=0.5, gt=0.0)
    sigma: Optional[float] = Field(default=None, gt=1.0)

    def __call__(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        return smooth_step((self.outer - x) / (self.outer - self.inner), self.sigma)

    def derivative(self, x) -> np.ndarray:
        """l'(x) = -sign(x) zeta'((outer - |x|) / w) / w with w = outer - inner."""
        x = np.asarray(x, dtype=float)
        width = self.outer - self.inner
        return -np.sign(x) * smooth_step_derivative((self.outer - np.abs(x)) / width, self.sigma) / width

    def check(self, points: int = 1000) -> bool:
        x = np.linspace(-1.0, 1.0, points)
        values = self(x)
        inside = np.abs(x) <= self.inner
        outside = np.abs(x) >= self.outer
        return bool(
            np.all(values[inside] == 1.0)
            and np.all(values[outside] == 0.0)
            and np.all((values >= 0.0) & (values <= 1.0))
            and np.allclose(values, self(-x))
        )


DEFAULT_MOLLIFIER = MollifierSpec()
